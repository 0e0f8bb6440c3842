"""Asymptotic bias and covariance of the (location, size) estimators, and
chi-square(2) confidence ellipsoids for the pair in one dimension."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .density import FLAVORS, NONRECURSIVE, SEMIRECURSIVE, RecursiveKernelDensity, as_points
from .kernels import KernelConstants

__all__ = [
    "UnsupportedDimension",
    "AsymptoticModel",
    "EllipsoidCoefficients",
    "asymptotic_covariance",
    "variance_factors",
    "bias_vector",
    "balanced_centering",
    "chi2_quantile_df2",
    "ellipsoid_coefficients",
    "ellipsoid_contains",
    "estimate_second_derivative",
]


class UnsupportedDimension(ValueError):
    """The requested construction only exists for one-dimensional data."""


def _check_flavor(flavor):
    if flavor not in FLAVORS:
        raise ValueError(f"flavor must be one of {FLAVORS}, got {flavor!r}")


@dataclass(frozen=True)
class AsymptoticModel:
    """Population quantities entering the limit law of the estimators.

    Parameters
    ----------
    a, a_tilde : float
        Exponents of the location and size bandwidths.
    density_at_mode : float
        ``f(theta)``.
    hessian_at_mode : array_like, shape (d, d)
        ``D^2 f(theta)``; must be symmetric negative definite.
    constants : KernelConstants
    q : int
        Kernel order.
    qth_derivatives : array_like, shape (d,), optional
        ``d^q f / dx_j^q (theta)`` for each coordinate ``j``.
    qth_derivative_gradient : array_like, shape (d, d), optional
        Row ``j`` is the gradient of ``d^q f / dx_j^q`` at ``theta``.
    """

    a: float
    a_tilde: float
    density_at_mode: float
    hessian_at_mode: np.ndarray
    constants: KernelConstants
    q: int = 2
    qth_derivatives: Optional[np.ndarray] = None
    qth_derivative_gradient: Optional[np.ndarray] = None

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.hessian_at_mode, dtype=float))
        object.__setattr__(self, "hessian_at_mode", H)
        if not self.density_at_mode > 0:
            raise ValueError("density at the mode must be positive")
        if H.shape[0] != H.shape[1] or not np.allclose(H, H.T):
            raise ValueError("Hessian at the mode must be a symmetric square matrix")
        if H.shape[0] != self.constants.gram_matrix.shape[0]:
            raise ValueError("Hessian and kernel dimensions differ")
        if np.any(np.linalg.eigvalsh(H) >= 0):
            raise np.linalg.LinAlgError("Hessian at the mode must be negative definite")
        d = H.shape[0]
        if self.qth_derivatives is not None:
            qd = np.atleast_1d(np.asarray(self.qth_derivatives, dtype=float))
            if qd.shape != (d,):
                raise ValueError(f"qth_derivatives must have shape ({d},)")
            object.__setattr__(self, "qth_derivatives", qd)
        if self.qth_derivative_gradient is not None:
            qg = np.asarray(self.qth_derivative_gradient, dtype=float).reshape(d, d)
            object.__setattr__(self, "qth_derivative_gradient", qg)

    @property
    def d(self) -> int:
        return self.hessian_at_mode.shape[0]

    def a_matrix(self) -> np.ndarray:
        """Block diagonal ``diag(-[D^2 f]^-1, 1)``."""
        d = self.d
        A = np.zeros((d + 1, d + 1))
        A[:d, :d] = -np.linalg.inv(self.hessian_at_mode)
        A[d, d] = 1.0
        return A

    def sigma(self, flavor: str = SEMIRECURSIVE) -> np.ndarray:
        """Covariance of the (gradient, density) pair before the delta method."""
        _check_flavor(flavor)
        d = self.d
        f = self.density_at_mode
        loc_factor, size_factor = variance_factors(self.a, self.a_tilde, d, flavor)
        S = np.zeros((d + 1, d + 1))
        S[:d, :d] = f * self.constants.gram_matrix * loc_factor
        S[d, d] = f * self.constants.square_integral * size_factor
        return S


def variance_factors(a: float, a_tilde: float, d: int, flavor: str) -> tuple[float, float]:
    """Variance reduction of per-arrival bandwidths: ``1/(1+a(d+2))`` and
    ``1/(1+a_tilde d)``, or ones for the nonrecursive estimator."""
    _check_flavor(flavor)
    if flavor == NONRECURSIVE:
        return 1.0, 1.0
    return 1.0 / (1.0 + a * (d + 2)), 1.0 / (1.0 + a_tilde * d)


def asymptotic_covariance(model: AsymptoticModel, flavor: str = SEMIRECURSIVE) -> np.ndarray:
    """Limit covariance ``A Sigma A`` of the normalised (location, size) errors."""
    A = model.a_matrix()
    return A @ model.sigma(flavor) @ A


def bias_vector(model: AsymptoticModel, flavor: str = SEMIRECURSIVE) -> np.ndarray:
    """Leading bias term of the (gradient, density) pair, length ``d + 1``."""
    _check_flavor(flavor)
    if model.qth_derivatives is None or model.qth_derivative_gradient is None:
        raise ValueError("bias needs the q-th derivatives at the mode and their gradient")
    q = model.q
    if math.isclose(model.a * q, 1.0) or math.isclose(model.a_tilde * q, 1.0):
        raise ValueError("bias is undefined when a*q == 1 or a_tilde*q == 1")
    beta = model.constants.moments
    coef = (-1) ** q / math.factorial(q)
    top = coef * (model.qth_derivative_gradient.T @ beta)
    bottom = coef * float(beta @ model.qth_derivatives)
    if flavor == SEMIRECURSIVE:
        top = top / (1.0 - model.a * q)
        bottom = bottom / (1.0 - model.a_tilde * q)
    return np.append(top, bottom)


def balanced_centering(model: AsymptoticModel, c: float, c_tilde: float,
                       flavor: str = SEMIRECURSIVE) -> np.ndarray:
    """Limit mean ``D(c, c_tilde) A B_q`` when bias and variance are of the same order."""
    if c < 0 or c_tilde < 0:
        raise ValueError("c and c_tilde must be nonnegative")
    D = np.diag(np.append(np.full(model.d, math.sqrt(c)), math.sqrt(c_tilde)))
    return D @ model.a_matrix() @ bias_vector(model, flavor)


def chi2_quantile_df2(alpha: float) -> float:
    """Upper ``alpha`` quantile of chi-square with two degrees of freedom.

    >>> round(chi2_quantile_df2(0.05), 4)
    5.9915
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return -2.0 * math.log(alpha)


@dataclass(frozen=True)
class EllipsoidCoefficients:
    """Region ``{(theta, mu): P (theta_hat - theta)^2 + Q (mu_hat - mu)^2 <= c}``."""

    p_coeff: float
    q_coeff: float
    c_alpha: float
    flavor: str = SEMIRECURSIVE

    def __post_init__(self):
        if not (self.p_coeff > 0 and self.q_coeff > 0 and self.c_alpha > 0):
            raise ValueError("ellipsoid coefficients must be positive")

    @property
    def semi_axes(self) -> tuple[float, float]:
        """Half-lengths along the location and size directions."""
        return math.sqrt(self.c_alpha / self.p_coeff), math.sqrt(self.c_alpha / self.q_coeff)

    def statistic(self, center, candidate) -> float:
        (t_hat, m_hat), (t, m) = center, candidate
        return self.p_coeff * (t_hat - t) ** 2 + self.q_coeff * (m_hat - m) ** 2

    def contains(self, center, candidate) -> bool:
        return self.statistic(center, candidate) <= self.c_alpha


def ellipsoid_contains(coeffs: EllipsoidCoefficients, center, candidate) -> bool:
    return coeffs.contains(center, candidate)


def ellipsoid_coefficients(n: int, h: float, h_tilde: float, f_at_theta: float,
                           f2_at_theta: float, constants: KernelConstants, a: float,
                           a_tilde: float, flavor: str = SEMIRECURSIVE, alpha: float = 0.05,
                           c_alpha: float | None = None) -> EllipsoidCoefficients:
    """Coefficients ``P`` and ``Q`` of the confidence ellipsoid for (theta, mu).

    ``f_at_theta`` and ``f2_at_theta`` may be true values or estimates. The
    semirecursive coefficients carry the extra factors ``1 + 3a`` and
    ``1 + a_tilde``. ``c_alpha`` overrides the chi-square quantile.
    """
    _check_flavor(flavor)
    if constants.gram_matrix.shape != (1, 1):
        raise UnsupportedDimension("confidence ellipsoids are only available for d = 1")
    if f2_at_theta == 0:
        raise ZeroDivisionError("second derivative at the mode is zero")
    if not (n >= 1 and h > 0 and h_tilde > 0 and f_at_theta > 0):
        raise ValueError("n, bandwidths and the density at the mode must be positive")
    loc_factor, size_factor = variance_factors(a, a_tilde, 1, flavor)
    int_dk2 = float(constants.gram_matrix[0, 0])
    p = n * h ** 3 * f2_at_theta ** 2 / (loc_factor * f_at_theta * int_dk2)
    q = n * h_tilde / (size_factor * f_at_theta * constants.square_integral)
    c = chi2_quantile_df2(alpha) if c_alpha is None else float(c_alpha)
    return EllipsoidCoefficients(p, q, c, flavor)


def estimate_second_derivative(samples, check_bandwidth, at, flavor: str = SEMIRECURSIVE,
                               kernel="gaussian") -> float:
    """Kernel estimate of ``f''`` at ``at`` from a one-dimensional sample."""
    X = as_points(samples)
    if X.shape[1] != 1:
        raise UnsupportedDimension("second-derivative estimate is only provided for d = 1")
    est = RecursiveKernelDensity(bandwidth=check_bandwidth, kernel=kernel, flavor=flavor).fit(X)
    return float(est.evaluate_hessian(np.reshape(at, (1, 1)))[0, 0, 0])
