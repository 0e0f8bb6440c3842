"""Location and size of the mode of a kernel density estimate."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .density import RecursiveKernelDensity, as_points

__all__ = [
    "SearchConfig",
    "ModeEstimate",
    "locate_mode",
    "sample_argmax_mode",
    "estimate_size",
    "search_grid",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SearchConfig:
    """Grid-plus-Newton search settings.

    ``box`` is a ``(d, 2)`` array of lower/upper bounds; ``None`` means the
    sample range padded by three times the widest bandwidth in use.
    """

    box: Optional[np.ndarray] = None
    grid_points_per_dim: Optional[int] = None
    max_steps: int = 50
    gradient_tol: float = 1e-12
    tie_tol: float = 1e-15
    margin: float = 3.0

    def __post_init__(self):
        if self.grid_points_per_dim is not None and self.grid_points_per_dim < 2:
            raise ValueError("need at least 2 grid points per dimension")
        if self.max_steps < 0:
            raise ValueError("max_steps must be nonnegative")
        if not (self.gradient_tol > 0 and self.tie_tol >= 0 and self.margin >= 0):
            raise ValueError("tolerances and margin must be nonnegative")
        if self.box is not None:
            box = np.atleast_2d(np.asarray(self.box, dtype=float))
            if box.shape[1] != 2 or np.any(~(box[:, 0] < box[:, 1])):
                raise ValueError("box must be a nonempty (d, 2) array of [low, high] rows")
            object.__setattr__(self, "box", box)


@dataclass
class ModeEstimate:
    location: np.ndarray
    value: float
    size: Optional[float] = None
    grid_winner: np.ndarray = field(default=None, repr=False)
    n_steps: int = 0
    gradient_norm: float = np.nan
    converged: bool = False


def _require_observations(density):
    if getattr(density, "n_samples_", 0) == 0:
        raise ValueError("density estimate has no observations")


def search_grid(density: RecursiveKernelDensity, cfg: SearchConfig) -> np.ndarray:
    """Grid points in lexicographic order, shape ``(m, d)``."""
    d = density.n_features_in_
    if cfg.box is None:
        pad = cfg.margin * float(np.max(density._bandwidth_array()))
        lo = density.samples_.min(axis=0) - pad
        hi = density.samples_.max(axis=0) + pad
        box = np.column_stack([lo, hi])
    else:
        box = cfg.box
        if box.shape[0] != d:
            raise ValueError(f"box has {box.shape[0]} rows, data dimension is {d}")
    m = cfg.grid_points_per_dim or (512 if d == 1 else 64)
    axes = [np.linspace(lo, hi, m) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def _lexicographic_first(points: np.ndarray, values: np.ndarray, tol: float) -> int:
    """Index of the lexicographically smallest point among near-maximal values."""
    tied = np.flatnonzero(values >= values.max() - tol)
    if tied.size == 1:
        return int(tied[0])
    order = np.lexsort(points[tied].T[::-1])
    return int(tied[order[0]])


def locate_mode(density: RecursiveKernelDensity, cfg: SearchConfig | None = None) -> ModeEstimate:
    """Maximise the density estimate.

    A grid scan picks the starting point (ties go to the lexicographically
    smallest point), then Newton steps climb to a stationary point. When the
    Hessian is not negative definite a gradient step with backtracking is
    used instead. A step is only accepted if it does not lower the estimate.
    """
    cfg = cfg or SearchConfig()
    _require_observations(density)
    grid = search_grid(density, cfg)
    values = density._sums(grid, 0)
    best = _lexicographic_first(grid, values, cfg.tie_tol)
    grid_max = float(values[best])

    x = grid[best].copy()
    fx = grid_max
    g = density._sums(x[None, :], 1)[0]
    gnorm = float(np.linalg.norm(g))
    steps = 0
    while gnorm > cfg.gradient_tol and steps < cfg.max_steps:
        H = density._sums(x[None, :], 2)[0]
        try:
            np.linalg.cholesky(-H)
            direction = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            curvature = np.max(np.abs(np.linalg.eigvalsh(H)))
            direction = g / curvature if curvature > 0 else g
        accepted = False
        t = 1.0
        for _ in range(60):
            x_new = x + t * direction
            f_new = float(density._sums(x_new[None, :], 0)[0])
            g_new = density._sums(x_new[None, :], 1)[0]
            gn_new = float(np.linalg.norm(g_new))
            # f is flat to rounding near the top; then progress is judged by the gradient
            flat = f_new >= fx - 8 * _EPS * abs(fx) and f_new >= grid_max and gn_new < gnorm
            if f_new > fx or flat:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        x, fx, g, gnorm = x_new, f_new, g_new, gn_new
        steps += 1

    return ModeEstimate(
        location=x,
        value=fx,
        grid_winner=grid[best].copy(),
        n_steps=steps,
        gradient_norm=gnorm,
        converged=gnorm <= max(cfg.gradient_tol, 1e-10),
    )


def sample_argmax_mode(density: RecursiveKernelDensity, tie_tol: float = 1e-15) -> np.ndarray:
    """The observation at which the density estimate is largest."""
    _require_observations(density)
    X = density.samples_
    values = density._sums(X, 0)
    return X[_lexicographic_first(X, values, tie_tol)].copy()


def estimate_size(theta, size_density: RecursiveKernelDensity) -> float:
    """Size of the mode: the (second) density estimate evaluated at ``theta``.

    Passing the density used to locate ``theta`` gives the single-bandwidth
    estimator; a density fitted on the same stream with a second bandwidth
    gives the dual-bandwidth one.
    """
    d = getattr(size_density, "n_features_in_", None)
    theta = as_points(np.atleast_1d(theta).reshape(1, -1), d)
    return float(size_density.evaluate(theta)[0])
