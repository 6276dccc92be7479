"""Totally skewed standardized alpha-stable variates.

``S_alpha`` has skewness 1, scale 1 and location 0 in the usual
(Samorodnitsky-Taqqu) parameterization, so that
``P(S_alpha > x) ~ (c_alpha x)^-alpha`` as ``x -> inf``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class StableSpec:
    alpha: float
    beta_skew: float = field(default=1.0, init=False)
    scale: float = field(default=1.0, init=False)
    location: float = field(default=0.0, init=False)

    def __post_init__(self):
        if not 1.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie strictly inside (1, 2), got {self.alpha}")


def c_alpha(alpha: float) -> float:
    """Tail constant: ``(2 Gamma(alpha) sin(pi alpha / 2) / pi)^(-1/alpha)``."""
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
    base = 2.0 * math.gamma(alpha) * math.sin(math.pi * alpha / 2.0) / math.pi
    return base ** (-1.0 / alpha)


def sample(spec: StableSpec, seed: int, n: int) -> np.ndarray:
    """Chambers-Mallows-Stuck draws of ``S_alpha``; deterministic per seed."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return _cms(spec.alpha, np.random.default_rng(seed), n)


def _cms(alpha: float, rng: np.random.Generator, size) -> np.ndarray:
    v = rng.uniform(-math.pi / 2, math.pi / 2, size)
    w = rng.exponential(1.0, size)
    t = math.tan(math.pi * alpha / 2.0)
    b = math.atan(t) / alpha
    s = (1.0 + t * t) ** (1.0 / (2.0 * alpha))
    av = alpha * (v + b)
    return (s * np.sin(av) / np.cos(v) ** (1.0 / alpha)
            * (np.cos(v - av) / w) ** ((1.0 - alpha) / alpha))


@dataclass(frozen=True)
class QuantileTable:
    """Monte-Carlo upper quantiles ``z(eps)`` with ``P(S_alpha > z) = eps``.

    ``entries`` are ``(eps, z)`` pairs sorted by decreasing eps.
    """

    alpha: float
    entries: tuple[tuple[float, float], ...]
    sample_count: int
    seed: int

    def z(self, eps: float) -> float:
        for e, z in self.entries:
            if math.isclose(e, eps, rel_tol=1e-12):
                return z
        raise KeyError(eps)

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        buf.write(f"# alpha={self.alpha!r} sampleCount={self.sample_count} seed={self.seed}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epsilon", "z"])
        for e, z in self.entries:
            w.writerow([repr(e), repr(z)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path_or_text: str | Path) -> "QuantileTable":
        p = Path(path_or_text) if not str(path_or_text).startswith("#") else None
        text = p.read_text() if p is not None else str(path_or_text)
        lines = text.splitlines()
        meta = dict(kv.split("=", 1) for kv in lines[0].lstrip("# ").split())
        rows = list(csv.DictReader(lines[1:]))
        entries = tuple((float(r["epsilon"]), float(r["z"])) for r in rows)
        return cls(float(meta["alpha"]), entries, int(meta["sampleCount"]),
                   int(meta["seed"]))


def _check_count(eps: float, sample_count: int) -> None:
    if not 0.0 < eps < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if sample_count < 10.0 / eps:
        raise ValueError(f"sampleCount {sample_count} < 10/epsilon for epsilon={eps}")


def quantile(spec: StableSpec, eps: float, sample_count: int, seed: int) -> float:
    """Order-statistic estimate of the upper quantile ``z(eps)``."""
    return quantile_table(spec, [eps], sample_count, seed).entries[0][1]


def quantile_table(spec: StableSpec, epsilons, sample_count: int,
                   seed: int) -> QuantileTable:
    """Quantiles for several eps from one shared sample."""
    eps = sorted({float(e) for e in epsilons}, reverse=True)
    if not eps:
        raise ValueError("need at least one epsilon")
    for e in eps:
        _check_count(e, sample_count)
    x = np.sort(sample(spec, seed, sample_count))
    # z(eps) is the (1 - eps) empirical quantile
    zs = np.quantile(x, [1.0 - e for e in eps], method="inverted_cdf")
    return QuantileTable(spec.alpha, tuple(zip(eps, map(float, zs))),
                         sample_count, seed)


DEFAULT_EPSILONS = tuple(float(f"{m}e{k}") for k in range(-4, 0) for m in (1, 2, 5)) + (0.5,)
