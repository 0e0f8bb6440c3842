"""Coverage study of the mode confidence ellipsoids under Gaussian data.

Every (sigma, replication) pair owns an independent random stream derived
from the master seed with :class:`numpy.random.SeedSequence` (spawn key =
IEEE-754 bits of sigma, replication index). Normal variates are produced by
inverse-CDF transform of PCG64 uniforms, so results do not depend on the
order or the process in which replications run.
"""
from __future__ import annotations

import csv
import io
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtri

from .bandwidth import BandwidthSchedule, parse_schedule
from .density import NONRECURSIVE, SEMIRECURSIVE, RecursiveKernelDensity
from .inference import chi2_quantile_df2, ellipsoid_coefficients
from .kernels import compute_constants, gaussian_kernel
from .mode import SearchConfig, locate_mode

__all__ = [
    "DEFAULT_SIGMAS",
    "SimulationConfig",
    "SimulationRow",
    "Table2Row",
    "ReplicationRecord",
    "ReplicationError",
    "gaussian_truth",
    "replication_rng",
    "draw_normal",
    "run_replication",
    "standardized_statistic",
    "run_table1",
    "run_table2",
    "format_csv",
]

DEFAULT_SIGMAS = (0.3, 0.4, 0.5, 0.7, 0.75, 1.0, 1.5, 2.0, 2.5)


class ReplicationError(RuntimeError):
    """A replication failed; the campaign is aborted."""


@dataclass(frozen=True)
class SimulationConfig:
    """Settings of the coverage study.

    ``c_alpha_decimals`` rounds the chi-square quantile the way the tables
    were computed (``5.99`` at the 5% level); ``None`` keeps it exact.
    ``threads`` is the number of worker processes.
    """

    sigmas: Sequence[float] = DEFAULT_SIGMAS
    n: int = 100
    replications: int = 5000
    alpha: float = 0.05
    h: str = "n^(-1/7)/log"
    h_tilde: str = "n^(-1/5)/log"
    h_check: str = "n^(-1/9)"
    seed: int = 0
    c_alpha_decimals: Optional[int] = 2
    grid_points: int = 512
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not self.sigmas or any(not s > 0 for s in self.sigmas):
            raise ValueError("sigmas must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        for s in (self.h, self.h_tilde, self.h_check):
            parse_schedule(s)

    @property
    def schedules(self) -> tuple[BandwidthSchedule, BandwidthSchedule, BandwidthSchedule]:
        return parse_schedule(self.h), parse_schedule(self.h_tilde), parse_schedule(self.h_check)

    @property
    def c_alpha(self) -> float:
        c = chi2_quantile_df2(self.alpha)
        return c if self.c_alpha_decimals is None else round(c, self.c_alpha_decimals)


@dataclass(frozen=True)
class ReplicationRecord:
    theta: float
    theta_star: float
    mu: float
    mu_star: float
    f2: float
    f2_star: float
    b: float
    b_star: float
    a: float
    a_star: float
    covered: bool
    covered_star: bool


@dataclass(frozen=True)
class SimulationRow:
    sigma: float
    mean_theta: float
    mean_theta_star: float
    mean_mu: float
    mean_mu_star: float
    b: float
    b_star: float
    a: float
    a_star: float
    p: float
    p_star: float


@dataclass(frozen=True)
class Table2Row:
    sigma: float
    b: float
    b_star: float
    mu: float
    a: float
    a_star: float


def gaussian_truth(sigma: float) -> tuple[float, float, float]:
    """Mode location, mode size and second derivative at the mode of N(0, sigma^2)."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    mu = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
    return 0.0, mu, -mu / sigma ** 2


def replication_rng(seed: int, sigma: float, index: int) -> np.random.Generator:
    sigma_bits = struct.unpack("<Q", struct.pack("<d", float(sigma)))[0]
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(sigma_bits, index))
    return np.random.Generator(np.random.PCG64(ss))


def draw_normal(rng: np.random.Generator, sigma: float, n: int) -> np.ndarray:
    """N(0, sigma^2) sample by inverse-CDF transform of uniforms in (0, 1)."""
    u = rng.random(n)
    # rng.random lies in [0, 1); 0 maps to -inf
    u[u == 0.0] = np.nextafter(0.0, 1.0)
    return sigma * ndtri(u)


def _flavor_estimates(X, flavor, schedules, grid_points):
    h, h_tilde, h_check = (
        RecursiveKernelDensity(bandwidth=s, flavor=flavor).fit(X) for s in schedules
    )
    found = locate_mode(h, SearchConfig(grid_points_per_dim=grid_points))
    theta = found.location[None, :]
    mu = float(h_tilde._sums(theta, 0)[0])
    f2 = float(h_check._sums(theta, 2)[0, 0, 0])
    return float(found.location[0]), mu, f2


def run_replication(sigma: float, n: int, schedules, rng: np.random.Generator,
                    c_alpha: float, grid_points: int = 512,
                    true_parameters: bool = False) -> ReplicationRecord:
    """One draw of the study: both estimator flavors and their ellipsoids.

    With ``true_parameters`` the ellipsoid coefficients use the true
    ``f(theta)`` and ``f''(theta)`` instead of their estimates.
    """
    X = draw_normal(rng, sigma, n).reshape(-1, 1)
    h_sched, ht_sched, _ = schedules
    consts = compute_constants(gaussian_kernel(1))
    truth_theta, truth_mu, truth_f2 = gaussian_truth(sigma)
    out = {}
    for flavor, tag in ((SEMIRECURSIVE, ""), (NONRECURSIVE, "_star")):
        theta, mu, f2 = _flavor_estimates(X, flavor, schedules, grid_points)
        f_used, f2_used = (truth_mu, truth_f2) if true_parameters else (mu, f2)
        coeffs = ellipsoid_coefficients(
            n=n, h=h_sched(n), h_tilde=ht_sched(n), f_at_theta=f_used, f2_at_theta=f2_used,
            constants=consts, a=h_sched.exponent, a_tilde=ht_sched.exponent,
            flavor=flavor, c_alpha=c_alpha,
        )
        b, a = coeffs.semi_axes
        out.update({
            "theta" + tag: theta, "mu" + tag: mu, "f2" + tag: f2,
            "b" + tag: b, "a" + tag: a,
            "covered" + tag: coeffs.contains((theta, mu), (truth_theta, truth_mu)),
        })
    return ReplicationRecord(**out)


def standardized_statistic(sigma: float, n: int, schedules, rng: np.random.Generator,
                           flavor: str = SEMIRECURSIVE, grid_points: int = 512) -> float:
    """Quadratic form ``P (theta_n - theta)^2 + Q (mu_n - mu)^2`` with true nuisance values.

    Asymptotically chi-square with two degrees of freedom.
    """
    X = draw_normal(rng, sigma, n).reshape(-1, 1)
    h_sched, ht_sched, _ = schedules
    truth_theta, truth_mu, truth_f2 = gaussian_truth(sigma)
    theta, mu, _ = _flavor_estimates(X, flavor, schedules, grid_points)
    coeffs = ellipsoid_coefficients(
        n=n, h=h_sched(n), h_tilde=ht_sched(n), f_at_theta=truth_mu, f2_at_theta=truth_f2,
        constants=compute_constants(gaussian_kernel(1)), a=h_sched.exponent,
        a_tilde=ht_sched.exponent, flavor=flavor, c_alpha=1.0,
    )
    return coeffs.statistic((theta, mu), (truth_theta, truth_mu))


def _run_chunk(args):
    cfg, sigma, start, stop = args
    schedules = cfg.schedules
    records = []
    for i in range(start, stop):
        try:
            records.append(run_replication(
                sigma, cfg.n, schedules, replication_rng(cfg.seed, sigma, i),
                cfg.c_alpha, cfg.grid_points,
            ))
        except Exception as exc:
            raise ReplicationError(f"replication {i} (sigma={sigma}) failed: {exc}") from exc
    return records


def _aggregate(sigma: float, records: Sequence[ReplicationRecord]) -> SimulationRow:
    N = len(records)
    mean = lambda name: math.fsum(getattr(r, name) for r in records) / N
    return SimulationRow(
        sigma=sigma,
        mean_theta=mean("theta"), mean_theta_star=mean("theta_star"),
        mean_mu=mean("mu"), mean_mu_star=mean("mu_star"),
        b=mean("b"), b_star=mean("b_star"), a=mean("a"), a_star=mean("a_star"),
        p=sum(r.covered for r in records) / N,
        p_star=sum(r.covered_star for r in records) / N,
    )


def run_table1(cfg: SimulationConfig) -> list[SimulationRow]:
    """Empirical means, mean semi-axes and coverage for every sigma."""
    n_chunks = max(1, cfg.threads) * 4
    size = math.ceil(cfg.replications / n_chunks)
    tasks = [
        (cfg, sigma, start, min(start + size, cfg.replications))
        for sigma in cfg.sigmas
        for start in range(0, cfg.replications, size)
    ]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            chunks = list(pool.map(_run_chunk, tasks))
    else:
        chunks = [_run_chunk(t) for t in tasks]
    rows = []
    for sigma in cfg.sigmas:
        records = [r for t, c in zip(tasks, chunks) if t[1] == sigma for r in c]
        rows.append(_aggregate(sigma, records))
    return rows


def run_table2(cfg: SimulationConfig) -> list[Table2Row]:
    """Semi-axes of both ellipsoids with the true f(theta) and f''(theta)."""
    h, h_tilde, _ = cfg.schedules
    consts = compute_constants(gaussian_kernel(1))
    rows = []
    for sigma in cfg.sigmas:
        _, mu, f2 = gaussian_truth(sigma)
        axes = {}
        for flavor in (SEMIRECURSIVE, NONRECURSIVE):
            axes[flavor] = ellipsoid_coefficients(
                n=cfg.n, h=h(cfg.n), h_tilde=h_tilde(cfg.n), f_at_theta=mu, f2_at_theta=f2,
                constants=consts, a=h.exponent, a_tilde=h_tilde.exponent, flavor=flavor,
                c_alpha=cfg.c_alpha,
            ).semi_axes
        rows.append(Table2Row(
            sigma=sigma, b=axes[SEMIRECURSIVE][0], b_star=axes[NONRECURSIVE][0], mu=mu,
            a=axes[SEMIRECURSIVE][1], a_star=axes[NONRECURSIVE][1],
        ))
    return rows


def format_csv(rows) -> str:
    """CSV with a header from the row fields and floats at 6 significant digits."""
    if not rows:
        return ""
    names = [f.name for f in fields(rows[0])]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in rows:
        values = asdict(row)
        writer.writerow([format(values[k], ".6g") for k in names])
    return buf.getvalue()
