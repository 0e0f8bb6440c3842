"""Scikit-learn style front end for joint estimation of the mode location and size."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .bandwidth import BandwidthSchedule
from .density import SEMIRECURSIVE, RecursiveKernelDensity, as_points
from .inference import UnsupportedDimension, ellipsoid_coefficients
from .kernels import compute_constants
from .mode import SearchConfig, locate_mode

__all__ = ["KernelModeEstimator"]


class KernelModeEstimator(BaseEstimator):
    """Estimate where a density peaks and how high the peak is.

    Three density estimates are built on the same stream: one with
    ``location_bandwidth`` whose maximiser is the location estimate, one
    with ``size_bandwidth`` evaluated there for the size, and (for
    one-dimensional data) one with ``curvature_bandwidth`` whose second
    derivative feeds the confidence ellipsoid.

    Parameters
    ----------
    location_bandwidth, size_bandwidth, curvature_bandwidth : schedule, str or float
    flavor : {"semirecursive", "nonrecursive"}
    kernel : "gaussian" or KernelSpec
    alpha : float
        Level of the confidence ellipsoid.
    c_alpha : float, optional
        Overrides the chi-square quantile.
    ellipsoid : bool
        Build the confidence ellipsoid (one-dimensional data only).
    grid_points : int, optional
        Grid points per dimension for the initial scan.

    Attributes
    ----------
    location_ : ndarray of shape (d,)
    size_ : float
    curvature_ : float
        Estimated second derivative at ``location_`` (d = 1 only).
    ellipsoid_ : EllipsoidCoefficients or None
    mode_estimate_ : ModeEstimate
        Search diagnostics.

    Examples
    --------
    >>> import numpy as np
    >>> X = np.random.default_rng(0).normal(size=200)
    >>> est = KernelModeEstimator().fit(X)
    >>> bool(abs(est.location_[0]) < 0.5)
    True
    """

    def __init__(self, location_bandwidth="n^(-1/7)/log",
                 size_bandwidth="n^(-1/5)/log", curvature_bandwidth="n^(-1/9)",
                 flavor=SEMIRECURSIVE, kernel="gaussian", alpha=0.05, c_alpha=None,
                 ellipsoid=True, grid_points=None):
        self.location_bandwidth = location_bandwidth
        self.size_bandwidth = size_bandwidth
        self.curvature_bandwidth = curvature_bandwidth
        self.flavor = flavor
        self.kernel = kernel
        self.alpha = alpha
        self.c_alpha = c_alpha
        self.ellipsoid = ellipsoid
        self.grid_points = grid_points

    def _densities(self, d):
        make = lambda bw: RecursiveKernelDensity(bandwidth=bw, kernel=self.kernel, flavor=self.flavor)
        dens = {"location": make(self.location_bandwidth), "size": make(self.size_bandwidth)}
        if d == 1:
            dens["curvature"] = make(self.curvature_bandwidth)
        return dens

    def fit(self, X, y=None):
        X = as_points(X)
        self.densities_ = self._densities(X.shape[1])
        for est in self.densities_.values():
            est.fit(X)
        return self._refresh()

    def partial_fit(self, X, y=None):
        X = as_points(X, getattr(self, "n_features_in_", None))
        if not hasattr(self, "densities_"):
            self.densities_ = self._densities(X.shape[1])
        for est in self.densities_.values():
            est.partial_fit(X)
        return self._refresh()

    def _refresh(self):
        loc = self.densities_["location"]
        self.n_features_in_ = loc.n_features_in_
        self.n_samples_ = loc.n_samples_
        self.mode_estimate_ = locate_mode(loc, SearchConfig(grid_points_per_dim=self.grid_points))
        self.location_ = self.mode_estimate_.location
        self.size_ = float(self.densities_["size"].evaluate(self.location_[None, :])[0])
        self.mode_estimate_.size = self.size_
        self.curvature_ = None
        self.ellipsoid_ = None
        if "curvature" in self.densities_:
            self.curvature_ = float(
                self.densities_["curvature"].evaluate_hessian(self.location_[None, :])[0, 0, 0]
            )
        if self.ellipsoid and self.n_features_in_ == 1:
            self.ellipsoid_ = self._ellipsoid()
        return self

    def _ellipsoid(self):
        loc, size = self.densities_["location"], self.densities_["size"]
        for est in (loc, size):
            if not isinstance(est.schedule_, BandwidthSchedule):
                raise ValueError(
                    "the ellipsoid needs regularly varying bandwidth schedules, "
                    f"got {est.schedule_!r}"
                )
        return ellipsoid_coefficients(
            n=self.n_samples_,
            h=loc.current_bandwidth,
            h_tilde=size.current_bandwidth,
            f_at_theta=self.size_,
            f2_at_theta=self.curvature_,
            constants=compute_constants(loc.kernel_),
            a=loc.schedule_.exponent,
            a_tilde=size.schedule_.exponent,
            flavor=self.flavor,
            alpha=self.alpha,
            c_alpha=self.c_alpha,
        )

    def confidence_region(self):
        """Ellipsoid coefficients for the fitted (location, size) pair."""
        check_is_fitted(self, "location_")
        if self.n_features_in_ != 1:
            raise UnsupportedDimension("confidence ellipsoids are only available for d = 1")
        return self.ellipsoid_ if self.ellipsoid_ is not None else self._ellipsoid()

    def contains(self, theta, mu) -> bool:
        """Whether ``(theta, mu)`` lies in the fitted confidence ellipsoid."""
        region = self.confidence_region()
        return region.contains((float(self.location_[0]), self.size_), (float(theta), float(mu)))

    def score_samples(self, X):
        """Density estimate (location bandwidth) at each row of ``X``."""
        check_is_fitted(self, "densities_")
        return self.densities_["location"].evaluate(X)
