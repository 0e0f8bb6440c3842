"""Regularly varying bandwidth sequences and asymptotic regime classification."""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "SlowFactor",
    "BandwidthSchedule",
    "Regime",
    "RegimeClassification",
    "parse_schedule",
    "classify_regime",
    "classify_schedules",
    "validate_a3",
    "balanced_limit",
]


class SlowFactor(str, enum.Enum):
    CONSTANT = "constant"
    INVERSE_LOG = "inverse_log"
    LOG = "log"
    LOG_OVER_LOGLOG = "log_over_loglog"


@dataclass(frozen=True)
class BandwidthSchedule:
    """``h(n) = scale * n**(-exponent) * L(n)`` with ``L`` slowly varying.

    The logarithmic factors use the natural log with a floor at 1 (``e`` for
    the log-over-loglog factor), so that ``h(1)`` is finite and positive.

    >>> BandwidthSchedule(1 / 7, "inverse_log")(100)
    0.11247...
    """

    exponent: float
    slow_factor: SlowFactor = SlowFactor.CONSTANT
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "slow_factor", SlowFactor(self.slow_factor))
        if not 0.0 < self.exponent < 1.0:
            raise ValueError(f"exponent must lie in (0, 1), got {self.exponent}")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    def slow(self, n):
        n = np.asarray(n, dtype=float)
        if self.slow_factor is SlowFactor.CONSTANT:
            return np.ones_like(n)
        ln = np.maximum(np.log(n), 1.0)
        if self.slow_factor is SlowFactor.INVERSE_LOG:
            return 1.0 / ln
        if self.slow_factor is SlowFactor.LOG:
            return ln
        ln = np.maximum(np.log(n), math.e)
        return ln / np.log(ln)

    def evaluate(self, n):
        """Bandwidth at sample size ``n`` (scalar or array, ``n >= 1``)."""
        arr = np.asarray(n, dtype=float)
        if np.any(arr < 1):
            raise ValueError("bandwidth schedules are defined for n >= 1")
        out = self.scale * arr ** (-self.exponent) * self.slow(arr)
        return float(out) if out.ndim == 0 else out

    __call__ = evaluate

    def slow_limit(self) -> float:
        """Limit of the slowly varying factor (``0``, constant or ``inf``)."""
        if self.slow_factor is SlowFactor.CONSTANT:
            return self.scale
        if self.slow_factor is SlowFactor.INVERSE_LOG:
            return 0.0
        return math.inf

    def __str__(self):
        s = f"n^-{self.exponent:.6g}"
        if self.scale != 1.0:
            s = f"{self.scale:.6g}*{s}"
        suffix = {
            SlowFactor.CONSTANT: "",
            SlowFactor.INVERSE_LOG: "/log",
            SlowFactor.LOG: "*log",
            SlowFactor.LOG_OVER_LOGLOG: "*log/loglog",
        }[self.slow_factor]
        return s + suffix


_NUM = r"[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?"
_SCHEDULE_RE = re.compile(
    rf"^(?:(?P<scale>{_NUM})\*)?n\^\(?-(?P<exp>{_NUM}(?:/{_NUM})?)\)?"
    r"(?P<tail>/log|\*log/loglog|\*log)?$"
)


def parse_schedule(text: str) -> BandwidthSchedule:
    """Parse strings like ``"n^-0.142857/log"``, ``"n^(-1/9)"`` or ``"2*n^-0.2*log"``."""
    m = _SCHEDULE_RE.match(text.replace(" ", ""))
    if m is None:
        raise ValueError(f"cannot parse bandwidth schedule {text!r}")
    exp = m["exp"]
    exponent = float(Fraction(exp)) if "/" in exp else float(exp)
    tail = {
        None: SlowFactor.CONSTANT,
        "/log": SlowFactor.INVERSE_LOG,
        "*log": SlowFactor.LOG,
        "*log/loglog": SlowFactor.LOG_OVER_LOGLOG,
    }[m["tail"]]
    scale = float(m["scale"]) if m["scale"] else 1.0
    return BandwidthSchedule(exponent, tail, scale)


def validate_a3(a: float, a_tilde: float, d: int) -> bool:
    """Exponent ranges required of the location and size bandwidths."""
    return 0.0 < a < 1.0 / (d + 4) and 0.0 < a_tilde < 1.0 / (d + 2)


class Regime(str, enum.Enum):
    BIAS_NEGLIGIBLE = "BiasNegligible_C1"
    VARIANCE_NEGLIGIBLE = "VarianceNegligible_C2"
    BALANCED = "Balanced"
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class RegimeClassification:
    regime: Regime
    details: str = ""


_REL_TOL = 1e-12


def _eq(x, y):
    return math.isclose(x, y, rel_tol=_REL_TOL, abs_tol=0.0)


def _lt(x, y):
    return x < y and not _eq(x, y)


def _le(x, y):
    return x < y or _eq(x, y)


def classify_regime(a: float, a_tilde: float, d: int, q: int,
                    size_slow_factor_diverges: bool = False) -> RegimeClassification:
    """Classify bandwidth exponents into bias-negligible, variance-negligible
    or balanced regimes.

    The second variance-negligible case needs the slowly varying factor of
    the size bandwidth to diverge, which exponents alone cannot tell; pass
    ``size_slow_factor_diverges=True`` to allow it (or use
    :func:`classify_schedules`).
    """
    if not (0.0 < a < 1.0 and 0.0 < a_tilde < 1.0):
        raise ValueError(f"exponents must lie in (0, 1), got a={a}, a_tilde={a_tilde}")
    if d < 1 or q < 2:
        raise ValueError(f"need d >= 1 and q >= 2, got d={d}, q={q}")
    at = a_tilde
    b_loc = 1.0 / (d + 2 * q + 2)
    b_size = 1.0 / (d + 2 * q)
    b_a3 = 1.0 / (d + 4)

    if _eq(a, b_loc) and _eq(at, b_size):
        return RegimeClassification(Regime.BALANCED, "balanced a=1/(d+2q+2), a~=1/(d+2q)")
    if _lt(b_a3, at) and _lt(at, q / (d + 2 * q + 2)) and _lt(at / q, a) and _lt(a, (1 - 2 * at) / (d + 2)):
        return RegimeClassification(Regime.BIAS_NEGLIGIBLE, "C1-i")
    if _lt(b_size, at) and _le(at, b_a3) and _lt(b_loc, a) and _lt(a, (1 + at * d) / (2 * (d + 2))):
        return RegimeClassification(Regime.BIAS_NEGLIGIBLE, "C1-ii")
    if _lt(0.0, at) and _lt(at, b_size) and _lt(at / 2, a) and _lt(a, b_loc):
        return RegimeClassification(Regime.VARIANCE_NEGLIGIBLE, "C2-i")
    if (size_slow_factor_diverges and _eq(at, b_size)
            and _lt(1.0 / (2 * (d + 2 * q)), a) and _lt(a, b_loc)):
        return RegimeClassification(Regime.VARIANCE_NEGLIGIBLE, "C2-ii")
    return RegimeClassification(Regime.UNCLASSIFIED, "")


def classify_schedules(h: BandwidthSchedule, h_tilde: BandwidthSchedule,
                       d: int, q: int) -> RegimeClassification:
    """:func:`classify_regime` with the slowly varying factors taken into account."""
    return classify_regime(h.exponent, h_tilde.exponent, d, q,
                           size_slow_factor_diverges=h_tilde.slow_limit() == math.inf)


def balanced_limit(schedule: BandwidthSchedule, power: int) -> float:
    """Limit of ``n * h_n**power`` when ``exponent * power == 1``.

    With the exponent exactly balanced only the slowly varying factor
    survives, so the limit is ``L(inf)**power``.
    """
    if not _eq(schedule.exponent * power, 1.0):
        raise ValueError("schedule exponent is not balanced for this power")
    return schedule.slow_limit() ** power
