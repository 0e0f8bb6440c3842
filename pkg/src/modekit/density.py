"""Semirecursive (Wolverton-Wagner) and nonrecursive (Rosenblatt) kernel
density estimators with first and second derivatives."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .bandwidth import BandwidthSchedule, parse_schedule
from .kernels import KernelSpec, gaussian_kernel

__all__ = [
    "SEMIRECURSIVE",
    "NONRECURSIVE",
    "FLAVORS",
    "ConstantBandwidth",
    "RecursiveKernelDensity",
    "resolve_bandwidth",
    "as_points",
]

SEMIRECURSIVE = "semirecursive"
NONRECURSIVE = "nonrecursive"
FLAVORS = (SEMIRECURSIVE, NONRECURSIVE)

# upper bound on m * n kernel evaluations held in memory at once
_CHUNK = 1 << 21


class ConstantBandwidth:
    """Bandwidth that does not depend on the sample size."""

    def __init__(self, value: float):
        if not value > 0:
            raise ValueError(f"bandwidth must be positive, got {value}")
        self.value = float(value)

    def evaluate(self, n):
        out = np.full(np.shape(n), self.value)
        return float(out) if out.ndim == 0 else out

    __call__ = evaluate

    def __eq__(self, other):
        return isinstance(other, ConstantBandwidth) and other.value == self.value

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return f"ConstantBandwidth({self.value!r})"


def resolve_bandwidth(bandwidth):
    """Turn a schedule, schedule string or positive number into a schedule."""
    if isinstance(bandwidth, (BandwidthSchedule, ConstantBandwidth)):
        return bandwidth
    if isinstance(bandwidth, str):
        return parse_schedule(bandwidth)
    if isinstance(bandwidth, numbers.Real):
        return ConstantBandwidth(bandwidth)
    if callable(bandwidth):
        return bandwidth
    raise TypeError(f"unsupported bandwidth {bandwidth!r}")


def as_points(X, d: int | None = None) -> np.ndarray:
    """Coerce scalars, 1-D arrays and 2-D arrays to an ``(m, d)`` float array.

    A 1-D array is read as ``m`` scalar observations when ``d`` is 1 or
    unknown, and as a single point otherwise.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(-1, 1) if d in (None, 1) else X.reshape(1, -1)
    X = check_array(X, ensure_min_samples=1)
    if d is not None and X.shape[1] != d:
        raise ValueError(f"expected points of dimension {d}, got {X.shape[1]}")
    return X


def _kernel_sums(kernel: KernelSpec, points, samples, bandwidths, deriv: int):
    """(1/n) sum_i h_i^(-d-deriv) D^deriv K((x - X_i) / h_i) for every point."""
    m, d = points.shape
    n = samples.shape[0]
    scale = bandwidths ** (-(d + deriv))
    out_shape = {0: (m,), 1: (m, d), 2: (m, d, d)}[deriv]
    out = np.empty(out_shape)
    fn = (kernel.value_fn, kernel.gradient_fn, kernel.hessian_fn)[deriv]
    step = max(1, _CHUNK // max(n, 1))
    for start in range(0, m, step):
        p = points[start:start + step]
        u = (p[:, None, :] - samples[None, :, :]) / bandwidths[None, :, None]
        vals = fn(u.reshape(-1, d)).reshape((p.shape[0], n) + out_shape[1:])
        radius = kernel.support_radius
        if radius is not None and np.abs(u).max() > radius / np.sqrt(d):
            far = np.einsum("mnd,mnd->mn", u, u) > radius ** 2
            vals[far] = 0.0
        if deriv == 0:
            out[start:start + step] = vals @ scale
        else:
            out[start:start + step] = np.einsum("mn...,n->m...", vals, scale)
    return out / n


class RecursiveKernelDensity(BaseEstimator):
    """Kernel density estimate with per-arrival or common bandwidths.

    With ``flavor="semirecursive"`` observation ``i`` is smoothed with the
    bandwidth ``h_i`` in force when it arrived::

        f_n(x) = (1/n) sum_i h_i^-d K((x - X_i) / h_i)

    With ``flavor="nonrecursive"`` every observation uses the current
    ``h_n`` (Rosenblatt's estimator).

    Parameters
    ----------
    bandwidth : BandwidthSchedule, str or float
        Bandwidth sequence, e.g. ``"n^-0.142857/log"``, or a fixed value.
    kernel : KernelSpec or "gaussian"
        Smoothing kernel; the Gaussian kernel adapts to the data dimension.
    flavor : {"semirecursive", "nonrecursive"}

    Attributes
    ----------
    samples_ : ndarray of shape (n, d)
    bandwidths_ : ndarray of shape (n,)
        Bandwidth attached to each observation. All equal to ``h_n`` for
        the nonrecursive flavor.
    n_samples_ : int
    grid_, grid_values_ : ndarray
        Evaluation grid registered with :meth:`track` and the density on it.
    """

    def __init__(self, bandwidth="n^(-1/7)/log", kernel="gaussian", flavor=SEMIRECURSIVE):
        self.bandwidth = bandwidth
        self.kernel = kernel
        self.flavor = flavor

    # -- fitting ---------------------------------------------------------
    def _init_state(self, d: int):
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}, got {self.flavor!r}")
        if isinstance(self.kernel, KernelSpec):
            kernel = self.kernel
            if kernel.dimension != d:
                raise ValueError(
                    f"kernel dimension {kernel.dimension} does not match data dimension {d}"
                )
        elif self.kernel in (None, "gaussian"):
            kernel = gaussian_kernel(d)
        else:
            raise ValueError(f"unknown kernel {self.kernel!r}")
        self.kernel_ = kernel
        self.schedule_ = resolve_bandwidth(self.bandwidth)
        self._bandwidth_param = self.bandwidth
        self.n_features_in_ = d
        self.samples_ = np.empty((0, d))
        self._arrival_h = np.empty(0)
        self.n_samples_ = 0

    def fit(self, X, y=None):
        """Reset the estimator and absorb ``X`` in row order."""
        X = as_points(X)
        self._init_state(X.shape[1])
        grid = getattr(self, "grid_", None)
        self.samples_ = X.copy()
        self.n_samples_ = X.shape[0]
        self._arrival_h = np.asarray(
            self.schedule_(np.arange(1, self.n_samples_ + 1, dtype=float)), dtype=float
        ).reshape(-1)
        if grid is not None and grid.shape[1] == X.shape[1]:
            self.track(grid)
        return self

    def partial_fit(self, X, y=None):
        """Absorb further observations one at a time."""
        if not hasattr(self, "samples_"):
            X = as_points(X)
            self._init_state(X.shape[1])
        for x in as_points(X, self.n_features_in_):
            self.observe(x)
        return self

    def observe(self, x):
        """Absorb one observation.

        Values on a tracked grid are updated in place; for the
        semirecursive flavor this uses
        ``f_n = (1 - 1/n) f_{n-1} + K((. - X_n)/h_n) / (n h_n^d)``.
        """
        if not hasattr(self, "samples_"):
            self._init_state(as_points(x, None).shape[1])
        if self.bandwidth is not self._bandwidth_param:
            raise ValueError("bandwidth changed after fitting; call fit to restart")
        x = as_points(x, self.n_features_in_)
        if x.shape[0] != 1:
            raise ValueError("observe takes a single point")
        n = self.n_samples_ + 1
        h = float(self.schedule_(n))
        self.samples_ = np.vstack([self.samples_, x])
        self._arrival_h = np.append(self._arrival_h, h)
        self.n_samples_ = n
        grid = getattr(self, "grid_", None)
        if grid is not None:
            if self.flavor == SEMIRECURSIVE:
                d = self.n_features_in_
                u = (grid - x) / h
                bump = self.kernel_.value_fn(u) / (n * h ** d)
                self.grid_values_ = (1.0 - 1.0 / n) * self.grid_values_ + bump
            else:
                self.grid_values_ = self.evaluate(grid)
        return self

    def track(self, grid):
        """Register evaluation points whose values are kept current."""
        check_is_fitted(self, "kernel_")
        grid = as_points(grid, self.n_features_in_)
        self.grid_ = grid
        if self.n_samples_ == 0:
            self.grid_values_ = np.zeros(grid.shape[0])
        else:
            self.grid_values_ = self.evaluate(grid)
        return self

    # -- evaluation ------------------------------------------------------
    @property
    def bandwidths_(self) -> np.ndarray:
        check_is_fitted(self, "kernel_")
        return self._bandwidth_array()

    def _bandwidth_array(self) -> np.ndarray:
        if self.flavor == SEMIRECURSIVE:
            return self._arrival_h
        cached = getattr(self, "_common_h", None)
        if cached is None or cached.shape[0] != self.n_samples_:
            cached = np.full(self.n_samples_, self.current_bandwidth)
            self._common_h = cached
        return cached

    @property
    def current_bandwidth(self) -> float:
        """Bandwidth ``h_n`` for the current sample size."""
        return float(self.schedule_(max(self.n_samples_, 1)))

    def _check_ready(self, X):
        check_is_fitted(self, "kernel_")
        if self.n_samples_ == 0:
            raise ValueError("density estimate has no observations")
        return as_points(X, self.n_features_in_)

    def _sums(self, points: np.ndarray, deriv: int) -> np.ndarray:
        # no validation: points must already be a float (m, d) array
        return _kernel_sums(self.kernel_, points, self.samples_, self._bandwidth_array(), deriv)

    def evaluate(self, X) -> np.ndarray:
        """Density estimate at each row of ``X``."""
        return self._sums(self._check_ready(X), 0)

    def evaluate_gradient(self, X) -> np.ndarray:
        """Gradient of :meth:`evaluate`, shape ``(m, d)``."""
        return self._sums(self._check_ready(X), 1)

    def evaluate_hessian(self, X) -> np.ndarray:
        """Hessian of :meth:`evaluate`, shape ``(m, d, d)``."""
        return self._sums(self._check_ready(X), 2)

    def score_samples(self, X) -> np.ndarray:
        """Log density, as in :class:`sklearn.neighbors.KernelDensity`."""
        with np.errstate(divide="ignore"):
            return np.log(self.evaluate(X))
