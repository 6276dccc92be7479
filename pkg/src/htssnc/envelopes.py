"""htss traffic envelopes and their sample-path versions.

Units: rates in bit/s, time in s. For an htss envelope ``G(t; s) = r t + s t^H``
the burst ``s`` carries units of bit * s^-H; sample-path bursts are in bits.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .powerlaw_algebra import TailBound, power_law, weibull
from .stable import QuantileTable, c_alpha


@dataclass(frozen=True)
class HtssEnvelope:
    """``P(A(s,t) > r(t-s) + sigma (t-s)^H) <= K sigma^-alpha``."""

    r: float
    H: float
    alpha: float
    K: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("r must be positive")
        if not 0 < self.H < 1:
            raise ValueError("H must lie in (0, 1)")
        if not 1 < self.alpha <= 2:
            raise ValueError("alpha must lie in (1, 2]")
        if not self.K > 0:
            raise ValueError("K must be positive")

    @property
    def tail(self) -> TailBound:
        return power_law(self.K, self.alpha)

    def sigma_at(self, eps: float) -> float:
        return (self.K / eps) ** (1.0 / self.alpha)

    def curve(self, t, eps: float):
        """``G(t)`` at the burst whose violation bound equals ``eps``."""
        t = np.asarray(t, dtype=float)
        return self.r * t + self.sigma_at(eps) * t**self.H

    def to_json(self) -> str:
        return json.dumps({"kind": "htss", "r_bps": self.r, "H": self.H,
                           "alpha": self.alpha, "K": self.K})


@dataclass(frozen=True)
class GaussEnvelope:
    """``P(A(s,t) > r(t-s) + sigma (t-s)^H) <= K exp(-(sigma/b)^2 / 2)``."""

    r: float
    H: float
    b: float
    K: float

    def __post_init__(self):
        if not (self.r > 0 and 0 < self.H < 1 and self.b > 0 and self.K > 0):
            raise ValueError("invalid Gaussian envelope parameters")

    @property
    def tail(self) -> TailBound:
        return weibull(self.K, math.sqrt(2.0) * self.b, 2.0)

    def sigma_at(self, eps: float) -> float:
        return self.tail.inverse(eps)

    def curve(self, t, eps: float):
        t = np.asarray(t, dtype=float)
        return self.r * t + self.sigma_at(eps) * t**self.H

    def to_json(self) -> str:
        return json.dumps({"kind": "gauss", "r_bps": self.r, "H": self.H,
                           "b": self.b, "K": self.K})


class SourceKind(enum.Enum):
    POWER_LAW = "PowerLaw"
    WEIBULL = "Weibull"


@dataclass(frozen=True)
class SamplePathEnvelope:
    """``P(sup_s {A(s,t) - rate (t-s)} > sigma) <= tail(sigma)``."""

    rate: float
    tail: TailBound
    mu: float
    source_kind: SourceKind


def envelope_from_json(text: str | dict) -> HtssEnvelope | GaussEnvelope:
    d = json.loads(text) if isinstance(text, str) else dict(text)
    kind = d.get("kind", "htss")
    if kind == "htss":
        return HtssEnvelope(float(d["r_bps"]), float(d["H"]), float(d["alpha"]),
                            float(d["K"]))
    if kind == "gauss":
        return GaussEnvelope(float(d["r_bps"]), float(d["H"]), float(d["b"]),
                             float(d.get("K", 0.5)))
    raise ValueError(f"unknown envelope kind {kind!r}")


# -- sample-path constant -------------------------------------------------

def _log_objective_x(env: HtssEnvelope, mu: float, x):
    """log of the K-tilde objective in terms of ``x = gamma - 1``."""
    r, a, h = env.r, env.alpha, env.H
    x = np.asarray(x, dtype=float)
    lg = np.log1p(x)
    with np.errstate(invalid="ignore", divide="ignore"):
        v = (-a * h * np.log((mu - r * x) / (1.0 + x)) + a * h * (1 - h) * lg
             - np.log(a * h * (1 - h) * lg))
    return np.where(np.isfinite(v), v, np.inf)


def k_tilde_objective(env: HtssEnvelope, mu: float, gamma):
    """The bracketed expression whose infimum over gamma defines K-tilde / K."""
    r, a, h = env.r, env.alpha, env.H
    g = np.asarray(gamma, dtype=float)
    return (((r + mu) / g - r) ** (-a * h) * g ** (a * h * (1 - h))
            / (a * h * (1 - h) * np.log(g)))


def k_tilde(env: HtssEnvelope, mu: float) -> float:
    """Sample-path prefactor: K times the inf over ``1 < gamma < 1 + mu/r``.

    The objective diverges at both ends of the interval. It is minimized in
    ``u = log((gamma - 1) r / mu)`` after a coarse scan.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    span = mu / env.r

    def f(u):
        return _log_objective_x(env, mu, span * np.exp(u))

    grid = np.unique(np.concatenate([np.linspace(-60.0, -1.0, 600),
                                     -np.logspace(0, -15, 300)]))
    vals = f(grid)
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(lambda u: float(f(u)), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    best = min(float(vals[i]), float(res.fun))
    return env.K * math.exp(best)


def k_tilde_gamma(env: HtssEnvelope, mu: float) -> float:
    """The minimizing gamma (diagnostic)."""
    span = mu / env.r
    x = span * np.logspace(-15, 0, 20001)[:-1]
    return 1.0 + float(x[np.argmin(_log_objective_x(env, mu, x))])


def sample_path_envelope(env: HtssEnvelope, mu: float) -> SamplePathEnvelope:
    tail = power_law(k_tilde(env, mu), env.alpha * (1.0 - env.H))
    return SamplePathEnvelope(env.r + mu, tail, mu, SourceKind.POWER_LAW)


def gauss_sample_path_params(env: GaussEnvelope, mu: float) -> tuple[float, float, float]:
    """``(L, c, beta)`` of the Weibull sample-path bound for Gaussian-tail traffic."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    h = env.H
    beta = 2.0 * (1.0 - h)
    c = (2.0 * env.b / mu**h) ** (1.0 / (1.0 - h))
    L = math.e * max(1.0, 4.0**h * env.K * (env.r / mu + 2.0 - h) / (h * (1.0 - h)))
    return L, c, beta


def sample_path_envelope_gauss(env: GaussEnvelope, mu: float) -> SamplePathEnvelope:
    L, c, beta = gauss_sample_path_params(env, mu)
    return SamplePathEnvelope(env.r + mu, weibull(L, c, beta), mu, SourceKind.WEIBULL)


# -- constructors -----------------------------------------------------------

def envelope_from_stable(r: float, alpha: float, H: float, b: float) -> HtssEnvelope:
    """Envelope of ``A(t) = r t + b t^H S_alpha`` from the stable tail asymptote.

    Only valid for large sigma (small violation probabilities).
    """
    if not b > 0:
        raise ValueError("b must be positive")
    return HtssEnvelope(r, H, alpha, (b / c_alpha(alpha)) ** alpha)


def envelope_from_stable_quantiles(r: float, alpha: float, H: float, b: float,
                                   qt: QuantileTable) -> HtssEnvelope:
    """Envelope valid for every sigma: ``K = max_eps eps (b z(eps))^alpha``."""
    if not qt.entries:
        raise ValueError("empty quantile table")
    if not math.isclose(qt.alpha, alpha, rel_tol=1e-12):
        raise ValueError("quantile table computed for a different alpha")
    k = max((e * (b * z) ** alpha for e, z in qt.entries if z > 0), default=None)
    if k is None:
        raise ValueError("no positive quantiles in table")
    return HtssEnvelope(r, H, alpha, k)


def pareto_mean(b: float, alpha: float) -> float:
    return b * alpha / (alpha - 1.0)


def envelope_from_pareto(lambda_packets: float, b: float, alpha: float) -> HtssEnvelope:
    """GCLT envelope of evenly spaced Pareto(b, alpha) packets at ``lambda_packets``/s.

    ``r = lambda E[X]``, ``H = 1/alpha``, ``K = lambda b^alpha``: with packet
    sizes measured in units of ``b`` this is the familiar ``K = lambda``.
    """
    if not (1 < alpha < 2 and b > 0 and lambda_packets > 0):
        raise ValueError("need 1 < alpha < 2, b > 0, lambda > 0")
    return HtssEnvelope(lambda_packets * pareto_mean(b, alpha), 1.0 / alpha, alpha,
                        lambda_packets * b**alpha)


def envelope_from_fbm(r: float, H: float, b: float,
                      effective_bandwidth: bool = False) -> GaussEnvelope:
    """Gaussian-tail envelope of ``r t + b t^H N(0,1)`` (K=1/2).

    With ``effective_bandwidth`` the Chernoff-bound version (K=1) is returned,
    valid for any process with ``eb(theta,t) <= r + b^2 theta t^(2H-1) / 2``.
    """
    if not b > 0:
        raise ValueError("b must be positive")
    return GaussEnvelope(r, H, b, 1.0 if effective_bandwidth else 0.5)


def envelope_dict(env) -> dict:
    d = asdict(env)
    d["kind"] = "htss" if isinstance(env, HtssEnvelope) else "gauss"
    return d
