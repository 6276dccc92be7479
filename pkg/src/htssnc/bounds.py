"""Backlog and delay bounds at a node or along a path.

A delay bound combines the sample-path envelope of the arrivals with a
service curve of rate ``R``: with ``mu = R - r`` the delay exceeds ``w``
with probability at most ``inf_{s1+s2=Rw} arrival(s1) + service(s2)``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from ._numeric import bisect_decreasing, inf_split
from .envelopes import GaussEnvelope, HtssEnvelope, gauss_sample_path_params, k_tilde
from .powerlaw_algebra import (TailBound, TailKind, ZeroTail, lower_power,
                               minimize_sum, power_law, weibull)
from .service import HtServiceCurve, InstabilityError

W_MIN, W_MAX = 1e-9, 1e9


@dataclass(frozen=True)
class BacklogBound:
    tail: TailBound

    def __call__(self, sigma):
        return self.tail(sigma)


def arrival_tail(env: HtssEnvelope | GaussEnvelope, mu: float) -> TailBound:
    """Sample-path burst tail of ``env`` at rate ``env.r + mu``."""
    if isinstance(env, GaussEnvelope):
        return weibull(*gauss_sample_path_params(env, mu))
    return power_law(k_tilde(env, mu), env.alpha * (1.0 - env.H))


def backlog_bound(env: HtssEnvelope | GaussEnvelope, C: float) -> BacklogBound:
    if not C > env.r:
        raise InstabilityError(f"link rate {C} does not exceed arrival rate {env.r}")
    return BacklogBound(arrival_tail(env, C - env.r))


@dataclass(frozen=True)
class ClosedForm:
    """``P(W > w) <= M (R w)^-beta_prime``."""

    M: float
    R: float
    beta_prime: float

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            v = self.M * (self.R * w) ** (-self.beta_prime)
        return np.minimum(np.nan_to_num(v, posinf=1.0), 1.0)

    def quantile(self, eps: float) -> float:
        return (self.M / eps) ** (1.0 / self.beta_prime) / self.R


@dataclass(frozen=True)
class DelayBound:
    """Delay tail built from an arrival term and a service term.

    ``split_fraction`` pins ``s1 = split_fraction * R w`` instead of
    minimizing over the split.
    """

    R: float
    arrival: TailBound
    service: TailBound | ZeroTail
    closed: ClosedForm | None = None
    split_fraction: float | None = None

    def two_term(self, w: float) -> float:
        total = self.R * float(w)
        if not total > 0:
            return 1.0
        if self.split_fraction is not None:
            s1 = self.split_fraction * total
            v = self.arrival(np.array([s1]))[0] + self.service(np.array([total - s1]))[0]
            return min(1.0, float(v))
        if isinstance(self.service, ZeroTail):
            return float(self.arrival(total))
        v, _ = inf_split(self.arrival, self.service, total)
        return min(1.0, v)

    def __call__(self, w):
        w_arr = np.atleast_1d(np.asarray(w, dtype=float))
        out = np.array([self.two_term(x) for x in w_arr])
        return out if np.ndim(w) else float(out[0])

    def with_split(self, fraction: float) -> "DelayBound":
        if not 0 < fraction < 1:
            raise ValueError("split fraction must lie in (0, 1)")
        return DelayBound(self.R, self.arrival, self.service, self.closed, fraction)


def delay_bound(env: HtssEnvelope | GaussEnvelope, sc: HtServiceCurve) -> DelayBound:
    if not env.r < sc.R:
        raise InstabilityError(f"arrival rate {env.r} is not below service rate {sc.R}")
    arr = arrival_tail(env, sc.R - env.r)
    closed = None
    if arr.kind is TailKind.POWER_LAW:
        if isinstance(sc.tail, ZeroTail):
            closed = ClosedForm(arr.K, sc.R, arr.alpha)
        elif sc.tail.kind is TailKind.POWER_LAW:
            bp = min(arr.alpha, sc.tail.alpha)
            terms = [t if t.alpha == bp else lower_power(t, bp) for t in (arr, sc.tail)]
            closed = ClosedForm(minimize_sum(terms).K, sc.R, bp)
    return DelayBound(sc.R, arr, sc.tail, closed)


def delay_quantile(db, eps: float, closed_form: bool = False) -> float:
    """Smallest delay ``w`` in [1e-9, 1e9] s whose bound is <= eps.

    ``db`` is a DelayBound (two-term form unless ``closed_form``) or any
    nonincreasing callable. At ``eps = 1`` the point where the capped
    bound first drops below 1 is returned.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    if closed_form:
        if db.closed is None:
            raise ValueError("no closed form available for this bound")
        fn = lambda w: float(db.closed(w))
    else:
        fn = (lambda w: db.two_term(w)) if isinstance(db, DelayBound) else (lambda w: float(db(w)))
    strict = eps >= 1.0
    ok = (lambda v: v < eps) if strict else (lambda v: v <= eps)
    grid = np.logspace(math.log10(W_MIN), math.log10(W_MAX), 181)
    hit = next((i for i, w in enumerate(grid) if ok(fn(w))), None)
    if hit is None:
        raise ValueError(f"bound never reaches {eps} within [{W_MIN}, {W_MAX}] s")
    if hit == 0:
        return float(grid[0])
    return bisect_decreasing(fn, eps, float(grid[hit - 1]), float(grid[hit]),
                             rtol=1e-5, strict=strict)


def lower_bound_quantile_pareto(N: int, b: float, alpha: float, lambda_packets: float,
                                eps: float, C: float = 1.0) -> float:
    """Known lower bound on the delay quantile of a Pareto tandem without cross traffic.

    ``b / C`` is the smallest service time (s); ``lambda_packets`` in packets/s.
    With the default ``C = 1`` pass ``b`` directly in seconds.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    scale = N * b / C
    denom = (alpha - 1.0) / lambda_packets * abs(math.log1p(-eps))
    return scale ** (alpha / (alpha - 1.0)) / denom ** (1.0 / (alpha - 1.0))


def loglog_slope(fn, w_lo: float, w_hi: float, n: int = 31) -> float:
    """Least-squares slope of log fn(w) against log w."""
    w = np.logspace(math.log10(w_lo), math.log10(w_hi), n)
    p = np.array([float(fn(x)) for x in w])
    return float(np.polyfit(np.log(w), np.log(p), 1)[0])


def bound_csv(db: DelayBound, w_grid, header: dict | None = None) -> str:
    buf = io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k}={v}\n")
    buf.write("w_seconds,prob_bound\n")
    for w in w_grid:
        buf.write(f"{float(w):.6e},{db.two_term(w):.6e}\n")
    return buf.getvalue()
