"""Algebra over violation-probability bounds.

Every bound in the package is a nonincreasing function ``eps(sigma)`` that
is reported capped at 1. Three closed forms are supported:

* power law        ``K sigma^-alpha``
* power law * log  ``A sigma^-beta (a log sigma + b)``, equal to 1 below a floor
* Weibull          ``L exp(-(sigma/c)^beta)``

The cap is applied at evaluation time only, so algebraic manipulation of
the stored constants stays exact.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import exp1

from ._numeric import bisect_decreasing, inf_split


class TailKind(enum.Enum):
    POWER_LAW = "PowerLaw"
    POWER_LAW_LOG = "PowerLawLog"
    WEIBULL = "Weibull"


@dataclass(frozen=True)
class LogTerms:
    """Coefficients of the factor ``a log(sigma) + b``."""

    a: float
    b: float


@dataclass(frozen=True)
class TailBound:
    kind: TailKind
    K: float
    alpha: float
    c: float | None = None
    log_terms: LogTerms | None = None
    sigma_floor: float = 0.0

    def __post_init__(self):
        if not (self.K > 0 and math.isfinite(self.K)):
            raise ValueError(f"K must be positive and finite, got {self.K}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.kind is TailKind.WEIBULL and not (self.c is not None and self.c > 0):
            raise ValueError("Weibull tail needs a positive scale c")
        if self.kind is TailKind.POWER_LAW_LOG:
            if self.log_terms is None or self.log_terms.a < 0:
                raise ValueError("PowerLawLog needs log_terms with a >= 0")

    def raw(self, sigma):
        """Uncapped formula value."""
        s = np.asarray(sigma, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if self.kind is TailKind.POWER_LAW:
                v = self.K * s ** (-self.alpha)
            elif self.kind is TailKind.WEIBULL:
                v = self.K * np.exp(-((s / self.c) ** self.alpha))
            else:
                lt = self.log_terms
                v = self.K * s ** (-self.alpha) * (lt.a * np.log(s) + lt.b)
                v = np.where(s <= self.sigma_floor, np.inf, v)
        return v

    def __call__(self, sigma):
        v = self.raw(sigma)
        return np.clip(np.nan_to_num(v, nan=1.0, posinf=1.0), 0.0, 1.0)

    def scaled(self, factor: float) -> "TailBound":
        """Same bound with its prefactor multiplied by ``factor``."""
        return TailBound(self.kind, self.K * factor, self.alpha, self.c,
                         self.log_terms, self.sigma_floor)

    def inverse(self, eps: float) -> float:
        """Smallest sigma at which the capped bound is <= eps (power law / Weibull)."""
        if not 0 < eps <= 1:
            raise ValueError("eps must lie in (0, 1]")
        if self.kind is TailKind.POWER_LAW:
            return (self.K / eps) ** (1.0 / self.alpha)
        if self.kind is TailKind.WEIBULL:
            return self.c * max(math.log(self.K / eps), 0.0) ** (1.0 / self.alpha)
        hi = max(self.sigma_floor, 1.0) * 10.0
        while self(hi) > eps:
            hi *= 10.0
        lo = self.sigma_floor if self.sigma_floor > 0 else 1e-300
        return bisect_decreasing(lambda s: float(self(s)), eps, lo, hi,
                                 rtol=1e-10)


def power_law(K: float, alpha: float) -> TailBound:
    return TailBound(TailKind.POWER_LAW, K, alpha)


def weibull(L: float, c: float, beta: float) -> TailBound:
    return TailBound(TailKind.WEIBULL, L, beta, c=c)


def power_law_log(A: float, beta: float, a: float, b: float,
                  sigma_floor: float = 0.0) -> TailBound:
    return TailBound(TailKind.POWER_LAW_LOG, A, beta,
                     log_terms=LogTerms(a, b), sigma_floor=sigma_floor)


class ZeroTail:
    """The bound that is identically zero (an ideal, never-violated curve)."""

    def __call__(self, sigma):
        return np.zeros_like(np.asarray(sigma, dtype=float))

    def __repr__(self):
        return "ZeroTail()"


TailLike = Callable[[np.ndarray], np.ndarray]


class SplitTail:
    """``inf_{s1+s2=sigma} first(s1) + second(s2)``, capped at 1.

    Used wherever a proof splits the burst between two independent
    violation events and the split is left to numerical optimization.
    """

    def __init__(self, first: TailLike, second: TailLike):
        self.first = first
        self.second = second

    def at(self, sigma: float) -> tuple[float, float]:
        if isinstance(self.second, ZeroTail):
            return float(self.first(np.array([sigma]))[0]), sigma
        if isinstance(self.first, ZeroTail):
            return float(self.second(np.array([sigma]))[0]), 0.0
        return inf_split(self.first, self.second, sigma)

    def __call__(self, sigma):
        s = np.atleast_1d(np.asarray(sigma, dtype=float))
        out = np.array([min(1.0, self.at(x)[0]) if x > 0 else 1.0 for x in s])
        return out if np.ndim(sigma) else out[0]


def evaluate(tb: TailBound, sigma: float) -> float:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return float(tb(sigma))


def lower_power(tb: TailBound, alpha_prime: float) -> TailBound:
    """``K s^-a <= K^(a'/a) s^-a'`` wherever the left side is <= 1."""
    _require_power_law(tb)
    if not 0 < alpha_prime < tb.alpha:
        raise ValueError("alpha_prime must lie in (0, alpha)")
    return power_law(tb.K ** (alpha_prime / tb.alpha), alpha_prime)


def remove_log(beta: float, beta_prime: float) -> TailBound:
    """Power law dominating ``s^-beta log s``: ``1/(e(beta-beta')) s^-beta'``."""
    if not 0 < beta_prime < beta:
        raise ValueError("beta_prime must lie in (0, beta)")
    return power_law(1.0 / (math.e * (beta - beta_prime)), beta_prime)


def remove_shift(tb: TailBound, sigma0: float) -> TailBound:
    """Power law dominating ``K (s - s0)^-a`` where that is <= 1."""
    _require_power_law(tb)
    if sigma0 < 0:
        raise ValueError("sigma0 must be nonnegative")
    a = tb.alpha
    return power_law(2.0 ** max(a - 1.0, 0.0) * (tb.K + sigma0 ** a), a)


def minimize_sum(terms: Sequence[TailBound]) -> TailBound:
    """Exact ``min_{s1+..+sn=s} sum K_j s_j^-a`` as a single power law."""
    a = _common_alpha(terms)
    k = sum(t.K ** (1.0 / (1.0 + a)) for t in terms) ** (1.0 + a)
    return power_law(k, a)


def optimal_split(terms: Sequence[TailBound]) -> np.ndarray:
    """Proportions ``s_j / s`` attaining the minimum in :func:`minimize_sum`."""
    a = _common_alpha(terms)
    w = np.array([t.K ** (1.0 / (1.0 + a)) for t in terms])
    return w / w.sum()


def tail_integral(tb: TailBound, z: float) -> float:
    """``int_z^inf eps(x)/x dx`` for the uncapped formula, in closed form."""
    if not z > 0:
        raise ValueError("z must be positive")
    if tb.kind is TailKind.POWER_LAW:
        return tb.K * z ** (-tb.alpha) / tb.alpha
    if tb.kind is TailKind.WEIBULL:
        return tb.K * float(exp1((z / tb.c) ** tb.alpha)) / tb.alpha
    lt, b = tb.log_terms, tb.alpha
    return tb.K * z ** (-b) * ((lt.a * math.log(z) + lt.b) / b + lt.a / b**2)


def geometric_sum_bound_est1(eps: TailBound, gamma: float, c: float, H: float,
                             sigma: float) -> float:
    """Bound on ``sum_k eps((sigma + c x_k) / x_k^H)`` over ``x_k = tau gamma^k``.

    The bound is independent of ``tau``. Returned uncapped.
    """
    if not gamma > 1:
        raise ValueError("gamma must exceed 1")
    if not 0 < H < 1:
        raise ValueError("H must lie in (0, 1)")
    if not (c > 0 and sigma > 0):
        raise ValueError("c and sigma must be positive")
    z = c**H * sigma ** (1 - H) / gamma ** (H * (1 - H))
    return tail_integral(eps, z) / (H * (1 - H) * math.log(gamma))


def geometric_sum_bound_est2(eps: TailBound, gamma: float, tau: float, c: float,
                             sigma: float) -> float:
    """Bound on ``sum_{k>=1} eps(sigma + c y_k)`` with ``y_k = tau + gamma y_{k-1}``."""
    if not gamma > 1:
        raise ValueError("gamma must exceed 1")
    if not (tau > 0 and c > 0):
        raise ValueError("tau and c must be positive")
    if sigma < c * tau / (gamma - 1):
        raise ValueError("sigma below c*tau/(gamma-1): bound not guaranteed")
    z = sigma + c * tau
    head = float(eps.raw(z)) * math.log((gamma - 1) * z / (c * tau))
    return (head + tail_integral(eps, z)) / math.log(gamma)


def _require_power_law(tb: TailBound) -> None:
    if tb.kind is not TailKind.POWER_LAW:
        raise TypeError(f"expected a PowerLaw tail, got {tb.kind.value}")


def _common_alpha(terms: Sequence[TailBound]) -> float:
    if not terms:
        raise ValueError("need at least one term")
    for t in terms:
        _require_power_law(t)
    a = terms[0].alpha
    if any(not math.isclose(t.alpha, a, rel_tol=1e-12) for t in terms):
        raise ValueError("all terms must share the same exponent")
    return a
