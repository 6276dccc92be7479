"""Packet traces, trace envelopes and the normalized violation statistic.

Timestamps are seconds, sizes bytes, arrivals ``A`` in bits. ``A(s, t)``
counts packets with ``s <= timestamp < t`` (left-continuous arrivals).
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class TraceFormatError(ValueError):
    pass


@dataclass(frozen=True)
class PacketTrace:
    times: np.ndarray
    sizes: np.ndarray
    horizon: float | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.sizes, dtype=float)
        if t.shape != s.shape or t.ndim != 1:
            raise TraceFormatError("times and sizes must be 1-d arrays of equal length")
        bad = np.flatnonzero(np.diff(t) < 0)
        if bad.size:
            raise TraceFormatError(f"timestamps not sorted at row {int(bad[0]) + 1}")
        if np.any(s <= 0):
            raise TraceFormatError(f"nonpositive size at row {int(np.flatnonzero(s <= 0)[0])}")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "sizes", s)

    def __len__(self) -> int:
        return self.times.size

    @property
    def start(self) -> float:
        return float(self.times[0]) if len(self) else 0.0

    @property
    def duration(self) -> float:
        if self.horizon is not None:
            return float(self.horizon)
        return float(self.times[-1] - self.times[0]) if len(self) else 0.0

    @property
    def total_bytes(self) -> float:
        return float(self.sizes.sum())

    @property
    def rate(self) -> float:
        """Average rate in bit/s (0 for an empty or instantaneous trace)."""
        d = self.duration
        return 8.0 * self.total_bytes / d if d > 0 else 0.0

    def _cumbits(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(8.0 * self.sizes)])

    def cumulative(self, t):
        """``A(t)``: bits with timestamp strictly before ``t``."""
        idx = np.searchsorted(self.times, np.asarray(t, dtype=float), side="left")
        return self._cumbits()[idx]

    def summary(self) -> dict:
        return {"packets": len(self), "total_bytes": self.total_bytes,
                "duration_s": self.duration, "rate_bps": self.rate}

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        buf.write("timestamp_ns,size_bytes\n")
        for t, s in zip(self.times, self.sizes):
            buf.write(f"{int(round(t * 1e9))},{int(round(s))}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def ingest(path: str | Path, fmt: str = "csv", horizon: float | None = None) -> PacketTrace:
    """Read a ``timestamp_ns,size_bytes`` CSV (header optional)."""
    if fmt.lower() != "csv":
        raise ValueError(f"unsupported trace format {fmt!r}")
    times: list[float] = []
    sizes: list[int] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].startswith("#"):
                continue
            if row[0].strip() == "timestamp_ns":
                continue
            try:
                ns, sz = int(row[0]), int(row[1])
            except (ValueError, IndexError) as exc:
                raise TraceFormatError(f"line {lineno}: cannot parse {row!r}") from exc
            if sz <= 0:
                raise TraceFormatError(f"line {lineno}: nonpositive size {sz}")
            if times and ns * 1e-9 < times[-1]:
                raise TraceFormatError(f"line {lineno}: timestamp {ns} ns before previous row")
            times.append(ns * 1e-9)
            sizes.append(sz)
    return PacketTrace(np.array(times), np.array(sizes, dtype=float), horizon)


def generate_pareto_trace(lambda_packets: float, b: float, alpha: float, n_packets: int,
                          seed: int) -> PacketTrace:
    """Packets at ``i / lambda`` with Pareto(b, alpha) sizes in bytes."""
    if n_packets < 1:
        raise ValueError("n_packets must be at least 1")
    rng = np.random.default_rng(seed)
    u = 1.0 - rng.random(n_packets)
    sizes = b * u ** (-1.0 / alpha)
    times = np.arange(n_packets) / lambda_packets
    return PacketTrace(times, sizes, n_packets / lambda_packets)


# -- deterministic envelope -----------------------------------------------

@dataclass(frozen=True)
class EnvelopeTable:
    t: np.ndarray
    bits: np.ndarray

    def to_csv(self, header: dict | None = None) -> str:
        buf = io.StringIO()
        for k, v in (header or {}).items():
            buf.write(f"# {k}={v}\n")
        buf.write("t_ms,bits\n")
        for t, g in zip(self.t, self.bits):
            buf.write(f"{t * 1e3:.6g},{g:.6e}\n")
        return buf.getvalue()


def deterministic_envelope(trace: PacketTrace, horizon: float, grid_step: float) -> EnvelopeTable:
    """``G(t) = sup_tau A(tau, tau + t)`` on the grid ``grid_step, 2 grid_step, ...``.

    The supremum is attained with ``tau`` at an arrival instant, so every
    packet start is tried: cost O(n log n) per grid point.
    """
    if not grid_step > 0:
        raise ValueError("grid_step must be positive")
    if horizon > trace.duration:
        raise ValueError(f"horizon {horizon} exceeds trace duration {trace.duration}")
    ts = trace.times
    cs = trace._cumbits()
    grid = grid_step * np.arange(1, int(math.floor(horizon / grid_step + 1e-9)) + 1)
    out = np.empty(grid.size)
    i = np.arange(ts.size)
    for k, t in enumerate(grid):
        j = np.searchsorted(ts, ts + t, side="left")
        out[k] = float(np.max(cs[j] - cs[i])) if ts.size else 0.0
    return EnvelopeTable(grid, out)


# -- violation statistic ------------------------------------------------

@dataclass(frozen=True)
class EmpiricalCcdf:
    """Points ``(sigma, P(Y > sigma))`` of a sample of size ``n``."""

    sigma: np.ndarray
    prob: np.ndarray
    n: int
    window: float

    def reliable(self, min_count: float = 10.0) -> np.ndarray:
        return self.prob >= min_count / self.n


def empirical_ccdf(samples, window: float = float("nan")) -> EmpiricalCcdf:
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValueError("no samples")
    vals, first = np.unique(x, return_index=True)
    # P(Y > v) = fraction of samples strictly above v
    last = np.concatenate([first[1:], [x.size]])
    prob = (x.size - last) / x.size
    return EmpiricalCcdf(vals, prob, int(x.size), window)


def y_statistic(trace: PacketTrace, r: float, H: float, window: float,
                stride: float | None = None, bits_per_unit: float = 1.0) -> EmpiricalCcdf:
    """CCDF of ``Y = (A(s, s+T) - r T) / T^H`` over windows ``s = start + k stride``.

    ``bits_per_unit`` rescales ``A`` and ``r`` (1e6 for Mbit).
    """
    if not window > 0:
        raise ValueError("window must be positive")
    stride = window / 10.0 if stride is None else stride
    if not stride > 0:
        raise ValueError("stride must be positive")
    if window > trace.duration:
        raise ValueError(f"window {window} exceeds trace duration {trace.duration}")
    n = int(math.floor((trace.duration - window) / stride + 1e-9)) + 1
    s = trace.start + stride * np.arange(n)
    a = trace.cumulative(s + window) - trace.cumulative(s)
    y = (a - r * window) / bits_per_unit / window**H
    return empirical_ccdf(y, window)


def y_statistic_from_increments(increments, r: float, H: float, window: float) -> EmpiricalCcdf:
    """Same statistic for precomputed window increments ``A(s, s+T)``."""
    y = (np.asarray(increments, dtype=float) - r * window) / window**H
    return empirical_ccdf(y, window)


# -- fitting ----------------------------------------------------------------

@dataclass(frozen=True)
class EnvelopeFit:
    alpha: float
    H: float
    K: float
    r: float
    windows: tuple[float, ...]
    curves: tuple[EmpiricalCcdf, ...] = field(repr=False)
    points_used: int = 0
    binding: tuple[float, float] | None = None

    def sigma_at(self, eps: float) -> float:
        return (self.K / eps) ** (1.0 / self.alpha)

    def envelope(self, t, eps: float):
        t = np.asarray(t, dtype=float)
        return self.r * t + self.sigma_at(eps) * t**self.H

    def report(self) -> dict:
        return {"alpha": self.alpha, "H": self.H, "K": self.K, "r_bps": self.r,
                "windows": list(self.windows), "points_used": self.points_used}

    def to_json(self) -> str:
        return json.dumps(self.report(), indent=2)


def fit_from_ccdfs(curves, r: float, alpha: float, H: float,
                   include_unreliable: bool = False) -> EnvelopeFit:
    """Smallest ``K`` with ``K sigma^-alpha >= p`` at every positive CCDF point.

    Points with ``p < 10 / n`` are skipped unless ``include_unreliable``.
    """
    curves = tuple(curves)
    best, binding, used = 0.0, None, 0
    for c in curves:
        mask = (c.sigma > 0) & (c.prob > 0)
        if not include_unreliable:
            mask &= c.reliable()
        if not mask.any():
            continue
        vals = c.prob[mask] * c.sigma[mask] ** alpha
        used += int(mask.sum())
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, binding = float(vals[i]), (float(c.sigma[mask][i]), float(c.prob[mask][i]))
    if best == 0.0:
        warnings.warn("no positive violation statistic: trace never exceeds rate r; K = 0")
    return EnvelopeFit(alpha, H, best, r, tuple(c.window for c in curves), curves, used, binding)


def fit_htss_K(trace: PacketTrace, r: float, alpha: float, H: float, windows,
               stride: float | None = None, include_unreliable: bool = False,
               bits_per_unit: float = 1.0) -> EnvelopeFit:
    curves = [y_statistic(trace, r, H, w, None if stride is None else stride, bits_per_unit)
              for w in windows]
    return fit_from_ccdfs(curves, r, alpha, H, include_unreliable)


def ccdf_csv(curves, header: dict | None = None) -> str:
    buf = io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k}={v}\n")
    buf.write("sigma,prob,window_ms\n")
    for c in curves:
        for s, p in zip(c.sigma, c.prob):
            buf.write(f"{s:.6g},{p:.6g},{c.window * 1e3:.6g}\n")
    return buf.getvalue()


def load_ccdf_fixture(path: str | Path) -> list[EmpiricalCcdf]:
    """CCDF points ``sigma,prob,window_ms,n_windows`` grouped by window."""
    groups: dict[float, list[tuple[float, float, int]]] = {}
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    for r in rows[1:]:
        groups.setdefault(float(r[2]), []).append((float(r[0]), float(r[1]), int(r[3])))
    out = []
    for w, pts in sorted(groups.items()):
        pts.sort()
        out.append(EmpiricalCcdf(np.array([p[0] for p in pts]), np.array([p[1] for p in pts]),
                                 pts[0][2], w / 1e3))
    return out
