"""Event-driven simulation of FIFO constant-rate links in tandem.

The through flow visits nodes 0..N-1 and keeps its packet sizes at every
node. Cross packets join one node and leave to a sink after service.
Events are ordered by ``(time, node, seq)`` so a run is reproducible bit
for bit from its seed.
"""

from __future__ import annotations

import heapq
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .envelopes import pareto_mean
from .traces import PacketTrace

_ARRIVE, _DEPART = 0, 1
_CHUNK = 1 << 16


class UnstableConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ParetoGen:
    """Pareto(b, alpha) packet sizes (bytes) at ``lambda_packets`` per second.

    ``spacing`` is ``"even"`` (deterministic gaps) or ``"poisson"``.
    """

    lambda_packets: float
    b_bytes: float
    alpha: float
    spacing: str = "even"

    def __post_init__(self):
        if not (self.lambda_packets > 0 and self.b_bytes > 0 and self.alpha > 1):
            raise ValueError("need lambda > 0, b > 0, alpha > 1")
        if self.spacing not in ("even", "poisson"):
            raise ValueError("spacing must be 'even' or 'poisson'")

    @property
    def rate_bps(self) -> float:
        return 8.0 * self.lambda_packets * pareto_mean(self.b_bytes, self.alpha)

    @classmethod
    def from_rate(cls, rate_bps: float, b_bytes: float, alpha: float,
                  spacing: str = "even") -> "ParetoGen":
        return cls(rate_bps / (8.0 * pareto_mean(b_bytes, alpha)), b_bytes, alpha, spacing)

    def to_dict(self) -> dict:
        return {"kind": "pareto", "lambda_pps": self.lambda_packets,
                "b_bytes": self.b_bytes, "alpha": self.alpha, "spacing": self.spacing}


@dataclass(frozen=True)
class TraceReplay:
    trace: PacketTrace

    @property
    def rate_bps(self) -> float:
        return self.trace.rate

    def to_dict(self) -> dict:
        return {"kind": "trace", "packets": len(self.trace)}


def _gen_from_dict(d: dict) -> ParetoGen:
    if d.get("kind", "pareto") != "pareto":
        raise ValueError("only pareto generators can be read from JSON")
    if "lambda_pps" in d:
        return ParetoGen(float(d["lambda_pps"]), float(d["b_bytes"]), float(d["alpha"]),
                         d.get("spacing", "even"))
    return ParetoGen.from_rate(float(d["rate_bps"]), float(d["b_bytes"]), float(d["alpha"]),
                               d.get("spacing", "even"))


@dataclass(frozen=True)
class TandemConfig:
    N: int
    C: float
    source: ParetoGen | TraceReplay
    cross: tuple[ParetoGen | None, ...] = ()
    service_mode: str = "IdenticalSizes"
    warmup_packets: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if not self.C > 0:
            raise ValueError("C must be positive")
        if self.service_mode != "IdenticalSizes":
            raise ValueError(f"unsupported service mode {self.service_mode!r}")
        if self.cross and len(self.cross) != self.N:
            raise ValueError("give one cross source (or None) per node")
        if self.warmup_packets < 0:
            raise ValueError("warmup_packets must be nonnegative")

    def cross_at(self, n: int) -> ParetoGen | None:
        return self.cross[n] if self.cross else None

    def utilization(self) -> list[float]:
        r0 = self.source.rate_bps
        return [(r0 + (c.rate_bps if c else 0.0)) / self.C
                for c in (self.cross_at(n) for n in range(self.N))]

    def check_stable(self) -> None:
        # a finite replayed trace always drains; only generators can overload a node
        if isinstance(self.source, TraceReplay) and not any(self.cross):
            return
        for n, u in enumerate(self.utilization()):
            if not u < 1:
                raise UnstableConfigError(f"node {n}: utilization {u:.4f} >= 1")

    def to_dict(self) -> dict:
        return {"N": self.N, "C_bps": self.C, "source": self.source.to_dict(),
                "cross": [None if c is None else c.to_dict() for c in self.cross],
                "serviceMode": self.service_mode, "warmupPackets": self.warmup_packets,
                "seed": self.seed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "TandemConfig":
        cross = tuple(None if c is None else _gen_from_dict(c) for c in d.get("cross", []))
        return cls(int(d["N"]), float(d["C_bps"]), _gen_from_dict(d["source"]), cross,
                   d.get("serviceMode", "IdenticalSizes"), int(d.get("warmupPackets", 0)),
                   int(d.get("seed", 0)))

    @classmethod
    def from_json(cls, text: str) -> "TandemConfig":
        return cls.from_dict(json.loads(text))


def default_warmup(n_packets: int) -> int:
    return max(n_packets // 100, 10_000)


# -- empirical CCDF ---------------------------------------------------------

@dataclass(frozen=True)
class Ccdf:
    """Exact empirical CCDF: ``prob[i] = P(X > x[i])``, ``count[i]`` exceedances."""

    x: np.ndarray
    prob: np.ndarray
    count: np.ndarray
    n: int
    min_count: int = 100

    @property
    def reliable(self) -> np.ndarray:
        return self.count >= self.min_count

    @property
    def max_reliable_eps(self) -> float:
        return self.min_count / self.n

    def at(self, x: float) -> float:
        """``P(X > x)``."""
        i = np.searchsorted(self.x, x, side="right")
        return float(self.prob[i - 1]) if i > 0 else 1.0

    def thinned(self, max_points: int) -> "Ccdf":
        """Subset of points roughly evenly spaced in log probability."""
        if self.x.size <= max_points:
            return self
        pos = self.prob > 0
        lp = np.log(np.where(pos, self.prob, self.prob[pos].min() if pos.any() else 1.0))
        targets = np.linspace(lp[0], lp[-1], max_points)
        idx = np.unique(np.searchsorted(-lp, -targets, side="left").clip(0, self.x.size - 1))
        return Ccdf(self.x[idx], self.prob[idx], self.count[idx], self.n, self.min_count)

    def to_csv(self, header: dict | None = None, name: str = "w_s") -> str:
        buf = io.StringIO()
        for k, v in (header or {}).items():
            buf.write(f"# {k}={v}\n")
        buf.write(f"{name},prob,count,reliable_flag\n")
        for x, p, c, r in zip(self.x, self.prob, self.count, self.reliable):
            buf.write(f"{x:.9e},{p:.9e},{int(c)},{int(r)}\n")
        return buf.getvalue()


def ccdf(samples, min_count: int = 100) -> Ccdf:
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValueError("empty sample")
    vals, first = np.unique(x, return_index=True)
    count = x.size - np.concatenate([first[1:], [x.size]])
    return Ccdf(vals, count / x.size, count, int(x.size), min_count)


def loglog_slope(c: Ccdf, p_hi: float = 1e-1, p_lo: float | None = None) -> float:
    """Least-squares slope of log P against log x over the reliable range."""
    p_lo = c.max_reliable_eps if p_lo is None else p_lo
    m = (c.prob <= p_hi) & (c.prob >= p_lo) & (c.x > 0)
    if m.sum() < 3:
        raise ValueError("too few points in the requested range")
    return float(np.polyfit(np.log(c.x[m]), np.log(c.prob[m]), 1)[0])


@dataclass(frozen=True)
class DelayCcdfEstimate:
    samples: np.ndarray
    ccdf: Ccdf
    backlog: tuple[Ccdf, ...]
    arrival_times: np.ndarray = field(repr=False)
    sizes_bits: np.ndarray = field(repr=False)
    bits_in: tuple[float, ...] = ()
    bits_out: tuple[float, ...] = ()

    @property
    def max_reliable_eps(self) -> float:
        return self.ccdf.max_reliable_eps

    def quantile(self, eps: float) -> float:
        """Smallest sample value ``w`` with ``P(W > w) <= eps``."""
        i = int(np.searchsorted(-self.ccdf.prob, -eps, side="left"))
        return float(self.ccdf.x[min(i, self.ccdf.x.size - 1)])

    def exceedances(self, w: float) -> int:
        return int(np.sum(self.samples > w))


# -- packet sources ---------------------------------------------------------

class _Source:
    """Lazily generated packet stream, drawn in chunks for speed."""

    def __init__(self, gen: ParetoGen | TraceReplay, rng: np.random.Generator):
        self.gen = gen
        self.rng = rng
        self.t = 0.0
        self.k = 0
        self._sizes = np.empty(0)
        self._gaps = np.empty(0)
        self._i = 0

    def _refill(self) -> None:
        g = self.gen
        u = 1.0 - self.rng.random(_CHUNK)
        self._sizes = 8.0 * g.b_bytes * u ** (-1.0 / g.alpha)
        if g.spacing == "poisson":
            self._gaps = self.rng.exponential(1.0 / g.lambda_packets, _CHUNK)
        else:
            self._gaps = np.full(_CHUNK, 1.0 / g.lambda_packets)
        self._i = 0

    def next(self) -> tuple[float, float] | None:
        """``(arrival time, size in bits)`` of the next packet."""
        if isinstance(self.gen, TraceReplay):
            tr = self.gen.trace
            if self.k >= len(tr):
                return None
            out = (float(tr.times[self.k] - tr.times[0]), 8.0 * float(tr.sizes[self.k]))
            self.k += 1
            return out
        if self._i >= self._sizes.size:
            self._refill()
        g = self.gen
        if g.spacing == "even":
            t = self.k / g.lambda_packets
        else:
            t = self.t
            self.t += float(self._gaps[self._i])
        size = float(self._sizes[self._i])
        self._i += 1
        self.k += 1
        return t, size


def _spawn(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def run_tandem(cfg: TandemConfig, n_packets: int, check_fifo: bool = False) -> DelayCcdfEstimate:
    """Simulate ``n_packets`` through packets from an empty system.

    Cross traffic runs until the last through packet leaves its node.
    Backlog (bits in queue and server) is sampled right after each
    departure of any packet.
    """
    if n_packets < 1:
        raise ValueError("n_packets must be at least 1")
    if n_packets < cfg.warmup_packets:
        raise ValueError(f"n_packets {n_packets} < warmup {cfg.warmup_packets}")
    cfg.check_stable()
    if isinstance(cfg.source, TraceReplay):
        n_packets = min(n_packets, len(cfg.source.trace))

    N, C = cfg.N, cfg.C
    rngs = _spawn(cfg.seed, N + 1)
    src = _Source(cfg.source, rngs[0])
    cross = [None if cfg.cross_at(n) is None else _Source(cfg.cross_at(n), rngs[n + 1])
             for n in range(N)]

    busy = [0.0] * N          # time each server frees up
    backlog = [0.0] * N
    bits_in = [0.0] * N
    bits_out = [0.0] * N
    last_seq = [-1] * N
    backlog_samples: list[list[float]] = [[] for _ in range(N)]
    arrival0 = np.empty(n_packets)
    delays = np.empty(n_packets)
    sizes = np.empty(n_packets)
    through_left = [n_packets] * N

    heap: list = []
    seq = 0
    push, pop = heapq.heappush, heapq.heappop

    # packet ids: >= 0 through packets, < 0 cross packets (-1 - node)
    first = src.next()
    if first is not None:
        push(heap, (first[0], 0, seq, _ARRIVE, 0, first[1]))
        seq += 1
    for n, cs in enumerate(cross):
        if cs is not None:
            t, s = cs.next()
            push(heap, (t, n, seq, _ARRIVE, -1 - n, s))
            seq += 1

    while heap:
        t, n, _, kind, pid, size = pop(heap)
        if kind == _ARRIVE:
            if pid >= 0:
                if n == 0:
                    arrival0[pid] = t
                    sizes[pid] = size
                    if pid + 1 < n_packets:
                        nxt = src.next()
                        if nxt is not None:
                            push(heap, (nxt[0], 0, seq, _ARRIVE, pid + 1, nxt[1]))
                            seq += 1
            else:
                if through_left[n] == 0:
                    continue
                t2, s2 = cross[n].next()
                push(heap, (t2, n, seq, _ARRIVE, pid, s2))
                seq += 1
            start = busy[n] if busy[n] > t else t
            dep = start + size / C
            busy[n] = dep
            backlog[n] += size
            bits_in[n] += size
            push(heap, (dep, n, seq, _DEPART, pid, size))
            seq += 1
        else:
            backlog[n] -= size
            bits_out[n] += size
            backlog_samples[n].append(backlog[n] if backlog[n] > 1e-9 else 0.0)
            if pid >= 0:
                if check_fifo:
                    if pid <= last_seq[n]:
                        raise AssertionError(f"FIFO violated at node {n}")
                    last_seq[n] = pid
                through_left[n] -= 1
                if n + 1 < N:
                    push(heap, (t, n + 1, seq, _ARRIVE, pid, size))
                    seq += 1
                else:
                    delays[pid] = t - arrival0[pid]

    w = cfg.warmup_packets
    kept = delays[w:]
    bl = tuple(ccdf(np.asarray(s)) for s in backlog_samples)
    return DelayCcdfEstimate(kept, ccdf(kept), bl, arrival0, sizes, tuple(bits_in),
                             tuple(bits_out))


# -- reference recursions ---------------------------------------------------

def lindley_delays(arrivals, sizes_bits, C: float) -> np.ndarray:
    """Per-packet sojourn at one FIFO node by the waiting-time recursion."""
    a = np.asarray(arrivals, dtype=float)
    x = np.asarray(sizes_bits, dtype=float) / C
    out = np.empty(a.size)
    wq = 0.0
    for k in range(a.size):
        if k:
            wq = max(wq + x[k - 1] - (a[k] - a[k - 1]), 0.0)
        out[k] = wq + x[k]
    return out


def tandem_departures(arrivals, sizes_bits, C: float, N: int) -> np.ndarray:
    """Last-node departures of a cross-free tandem via ``D = S + cummax(A - S_prev)``."""
    x = np.asarray(sizes_bits, dtype=float) / C
    d = np.asarray(arrivals, dtype=float)
    for _ in range(N):
        cs = np.cumsum(x)
        d = cs + np.maximum.accumulate(d - (cs - x))
    return d


def merge_estimates(runs: list[DelayCcdfEstimate]) -> Ccdf:
    """Pool delay samples from independent runs."""
    return ccdf(np.concatenate([r.samples for r in runs]))
