"""Concatenation of service curves along a tandem path and end-to-end bounds."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bounds import DelayBound, arrival_tail, delay_bound, delay_quantile, \
    lower_bound_quantile_pareto
from .envelopes import GaussEnvelope, HtssEnvelope, envelope_from_json, envelope_from_pareto
from .powerlaw_algebra import (SplitTail, TailBound, TailKind, ZeroTail, lower_power,
                               minimize_sum, power_law, power_law_log, remove_log, weibull)
from .service import (MU_THIRD, HtServiceCurve, InstabilityError, LinkSpec,
                      mu_preset, node_curve)


def _pos(x: float) -> float:
    return max(x, 0.0)


def _check_gamma(gamma: float) -> None:
    if not gamma > 1:
        raise ValueError(f"gamma must exceed 1, got {gamma}")


def log_corrected_prefactor(L: float, beta: float, gamma: float) -> float:
    """``2^max(1,beta) L / (beta log gamma)``."""
    return 2.0 ** max(1.0, beta) * L / (beta * math.log(gamma))


def log_corrected_tail(L: float, beta: float, gamma: float) -> TailBound:
    """``2^[beta-1]+ e(|log e| + 2)`` with ``e = min(1, Lt s^-beta)``.

    Above the floor ``Lt^(1/beta)`` this is
    ``2^[beta-1]+ Lt s^-beta (beta log s - log Lt + 2)``; below it the value is >= 1.
    """
    lt = log_corrected_prefactor(L, beta, gamma)
    return power_law_log(2.0 ** _pos(beta - 1.0) * lt, beta, beta, 2.0 - math.log(lt),
                         sigma_floor=lt ** (1.0 / beta))


def concat_two(sc1: HtServiceCurve, sc2: HtServiceCurve, gamma: float,
               beta: float | None = None) -> HtServiceCurve:
    """Concatenate two nodes; the second node's rate is relaxed by ``gamma``.

    Without ``beta`` the tail is the exact inf over the burst split. With a
    target ``beta < beta1`` (and ``beta <= beta2``) a pure power law is
    returned: the log factor is removed, exponents lowered to ``beta`` and
    the two terms combined by the closed-form minimal sum.
    """
    _check_gamma(gamma)
    t1 = sc1.tail
    if not (isinstance(t1, TailBound) and t1.kind is TailKind.POWER_LAW):
        raise TypeError("first curve needs a PowerLaw tail")
    R = min(sc1.R, sc2.R / gamma)
    first = log_corrected_tail(t1.K, t1.alpha, gamma)
    if beta is None:
        return HtServiceCurve(R, SplitTail(first, sc2.tail))

    b1 = t1.alpha
    if not 0 < beta < b1:
        raise ValueError("target beta must lie in (0, beta1)")
    lt = log_corrected_prefactor(t1.K, b1, gamma)
    # in s = sigma / lt^(1/b1): s^-b1 (b1 log s + 2) <= (b1 c_log + 2) s^-beta for s >= 1
    c = b1 * remove_log(b1, beta).K + 2.0
    terms = [power_law(2.0 ** _pos(b1 - 1.0) * c * lt ** (beta / b1), beta)]
    t2 = sc2.tail
    if not isinstance(t2, ZeroTail):
        if t2.kind is not TailKind.POWER_LAW:
            raise TypeError("power-law reduction needs a PowerLaw second tail")
        if beta > t2.alpha * (1 + 1e-12):
            raise ValueError("target beta must not exceed beta2")
        terms.append(t2 if math.isclose(t2.alpha, beta) else lower_power(t2, beta))
    return HtServiceCurve(R, minimize_sum(terms) if len(terms) > 1 else terms[0])


@dataclass(frozen=True)
class NetworkServiceCurve:
    R_net: float
    tail: TailBound
    N: int
    gamma: float


def _homogeneous(per_node: HtServiceCurve | list[HtServiceCurve]) -> HtServiceCurve:
    if isinstance(per_node, HtServiceCurve):
        return per_node
    return homogenize(per_node)


def homogenize(curves: list[HtServiceCurve]) -> HtServiceCurve:
    """One curve dominated by every node: min rate, min exponent, max prefactor."""
    if not curves:
        raise ValueError("no curves")
    R = min(c.R for c in curves)
    tails = [c.tail for c in curves]
    if all(isinstance(t, ZeroTail) for t in tails):
        return HtServiceCurve(R, ZeroTail())
    if any(isinstance(t, ZeroTail) for t in tails):
        raise ValueError("cannot homogenize ideal and random nodes")
    kinds = {t.kind for t in tails}
    if kinds == {TailKind.POWER_LAW}:
        beta = min(t.alpha for t in tails)
        lowered = [t if math.isclose(t.alpha, beta) else lower_power(t, beta) for t in tails]
        return HtServiceCurve(R, power_law(max(t.K for t in lowered), beta))
    if kinds == {TailKind.WEIBULL}:
        betas = {round(t.alpha, 12) for t in tails}
        if len(betas) != 1:
            raise ValueError("Weibull nodes must share one exponent")
        return HtServiceCurve(R, weibull(max(t.K for t in tails), max(t.c for t in tails),
                                         tails[0].alpha))
    raise TypeError(f"cannot homogenize tails of kinds {sorted(k.value for k in kinds)}")


def network_service_curve(per_node, N: int, gamma: float) -> NetworkServiceCurve:
    """End-to-end curve of ``N`` identical power-law nodes at rate ``R / gamma``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    _check_gamma(gamma)
    sc = _homogeneous(per_node)
    t = sc.tail
    if not (isinstance(t, TailBound) and t.kind is TailKind.POWER_LAW):
        raise TypeError("per-node curve needs a PowerLaw tail")
    beta = t.alpha
    lt = log_corrected_prefactor(t.K, beta, gamma)
    A = N ** (2.0 + beta) * 2.0 ** _pos(beta - 1.0) * lt
    b = -math.log(lt) + (1.0 + beta) * math.log(N) + 2.0
    tail = power_law_log(A, beta, beta, b, sigma_floor=lt ** (1.0 / beta))
    return NetworkServiceCurve(sc.R / gamma, tail, N, gamma)


def iterated_chain_tail(L: float, beta: float, N: int, gamma: float, sigma: float) -> float:
    """Chain of two-node concatenations with per-step factor ``gamma^(1/(N-1))``.

    Every node receives the burst share ``sigma/N``; the tail of the last
    node enters unchanged.
    """
    last = min(1.0, L * (sigma / N) ** (-beta))
    if N == 1:
        return min(1.0, L * sigma ** (-beta))
    step = log_corrected_tail(L, beta, gamma ** (1.0 / (N - 1)))
    return min(1.0, (N - 1) * float(step(sigma / N)) + last)


def weibull_network_prefactor(L: float, c: float, beta: float, N: int, gamma: float) -> float:
    lt = max(math.e**2 / N * math.log(gamma), (2 * math.e) ** _pos(beta - 1.0) / c * L)
    return N * (1.0 + N / math.log(gamma)) * lt


def network_service_curve_weibull(per_node, N: int, gamma: float) -> NetworkServiceCurve:
    """Weibull analogue: scale ``N c``, exponent unchanged."""
    if N < 1:
        raise ValueError("N must be at least 1")
    _check_gamma(gamma)
    sc = _homogeneous(per_node)
    t = sc.tail
    if not (isinstance(t, TailBound) and t.kind is TailKind.WEIBULL):
        raise TypeError("per-node curve needs a Weibull tail")
    K = weibull_network_prefactor(t.K, t.c, t.alpha, N, gamma)
    return NetworkServiceCurve(sc.R / gamma, weibull(K, N * t.c, t.alpha), N, gamma)


def concat_two_weibull(sc1: HtServiceCurve, sc2: HtServiceCurve,
                       gamma: float) -> HtServiceCurve:
    _check_gamma(gamma)
    t1 = sc1.tail
    if not (isinstance(t1, TailBound) and t1.kind is TailKind.WEIBULL):
        raise TypeError("first curve needs a Weibull tail")
    b1 = t1.alpha
    lt = max(math.e**2, gamma / (gamma - 1.0) * (2 * math.e) ** _pos(b1 - 1.0) / t1.c * t1.K)
    return HtServiceCurve(min(sc1.R, sc2.R / gamma), SplitTail(weibull(lt, t1.c, b1), sc2.tail))


# -- paths ------------------------------------------------------------------

@dataclass(frozen=True)
class MuPolicy:
    """Either a fraction of each node's residual capacity or explicit values."""

    fraction: float | None = MU_THIRD
    explicit: tuple[float, ...] | None = None

    def __post_init__(self):
        if (self.fraction is None) == (self.explicit is None):
            raise ValueError("give exactly one of fraction or explicit")
        if self.fraction is not None and not 0 < self.fraction < 1:
            raise ValueError("mu fraction must lie in (0, 1)")

    def values(self, nodes: list[LinkSpec], r_through: float) -> list[float]:
        if self.explicit is not None:
            if len(self.explicit) != len(nodes):
                raise ValueError("one explicit mu per node required")
            return list(self.explicit)
        return [mu_preset(n, r_through, self.fraction) for n in nodes]


@dataclass(frozen=True)
class ParetoSource:
    """Evenly spaced packets with Pareto(b, alpha) sizes (b in bits)."""

    lambda_packets: float
    b: float
    alpha: float

    def envelope(self) -> HtssEnvelope:
        return envelope_from_pareto(self.lambda_packets, self.b, self.alpha)


@dataclass(frozen=True)
class PathSpec:
    nodes: tuple[LinkSpec, ...]
    through: HtssEnvelope | GaussEnvelope
    mu_policy: MuPolicy = field(default_factory=MuPolicy)
    gamma: float | None = None
    pareto: ParetoSource | None = None

    def __post_init__(self):
        if not self.nodes:
            raise ValueError("path needs at least one node")
        if self.gamma is not None:
            _check_gamma(self.gamma)
        for i, n in enumerate(self.nodes):
            if not self.through.r + n.cross_rate < n.C:
                raise InstabilityError(
                    f"node {i}: r_through + r_cross = {self.through.r + n.cross_rate:.6g}"
                    f" >= C = {n.C:.6g}")

    @property
    def N(self) -> int:
        return len(self.nodes)

    def replicate(self, N: int) -> "PathSpec":
        """Homogeneous path of ``N`` copies of the first node."""
        mp = self.mu_policy
        if mp.explicit is not None:
            mp = MuPolicy(None, (mp.explicit[0],) * N)
        return replace(self, nodes=(self.nodes[0],) * N, mu_policy=mp)

    def to_dict(self) -> dict:
        d = {"nodes": [n.to_dict() for n in self.nodes],
             "through": json.loads(self.through.to_json()),
             "muPolicy": ({"fraction": self.mu_policy.fraction}
                          if self.mu_policy.explicit is None
                          else {"explicit_bps": list(self.mu_policy.explicit)})}
        if self.pareto is not None:
            p = self.pareto
            d["through"] = {"kind": "pareto", "lambda_pps": p.lambda_packets,
                            "b_bytes": p.b / 8.0, "alpha": p.alpha}
        if self.gamma is not None:
            d["gamma"] = self.gamma
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "PathSpec":
        nodes = tuple(LinkSpec.from_dict(n) for n in d["nodes"])
        th = d["through"]
        pareto = None
        if th.get("kind") == "pareto":
            b = 8.0 * float(th["b_bytes"])
            alpha = float(th["alpha"])
            if "lambda_pps" in th:
                lam = float(th["lambda_pps"])
            else:
                lam = float(th["rate_bps"]) / (b * alpha / (alpha - 1.0))
            pareto = ParetoSource(lam, b, alpha)
            through = pareto.envelope()
        else:
            through = envelope_from_json(th)
        mp = d.get("muPolicy", {"fraction": MU_THIRD})
        policy = (MuPolicy(None, tuple(float(x) for x in mp["explicit_bps"]))
                  if "explicit_bps" in mp else MuPolicy(float(mp["fraction"])))
        gamma = d.get("gamma")
        return cls(nodes, through, policy, None if gamma is None else float(gamma), pareto)

    @classmethod
    def from_json(cls, text: str) -> "PathSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class PathBound:
    """End-to-end delay bound with the quantities it was assembled from."""

    delay: DelayBound
    per_node: HtServiceCurve
    network: NetworkServiceCurve | None
    mu: tuple[float, ...]
    gamma: float | None

    def paper_split(self) -> DelayBound:
        """The bound with the fixed split ``s1 = N^(-1-2/beta) R_net w``."""
        N = 1 if self.network is None else self.network.N
        beta = self.delay.service.alpha if isinstance(self.delay.service, TailBound) else 1.0
        return self.delay.with_split(N ** (-1.0 - 2.0 / beta))


def default_gamma(R_node: float, r_through: float, mu: float) -> float:
    return R_node / (r_through + mu)


def path_bound(path: PathSpec) -> PathBound:
    r0 = path.through.r
    mus = path.mu_policy.values(list(path.nodes), r0)
    curves = [node_curve(n, m) for n, m in zip(path.nodes, mus)]
    sc = homogenize(curves)
    if path.N == 1:
        return PathBound(delay_bound(path.through, sc), sc, None, tuple(mus), None)
    mu = min(mus)
    gamma = path.gamma if path.gamma is not None else default_gamma(sc.R, r0, mu)
    if not gamma > 1:
        raise InstabilityError(
            f"default gamma = {gamma:.6g} <= 1; choose a smaller mu or pass gamma")
    if isinstance(sc.tail, TailBound) and sc.tail.kind is TailKind.WEIBULL:
        net = network_service_curve_weibull(sc, path.N, gamma)
    elif isinstance(sc.tail, ZeroTail):
        net = NetworkServiceCurve(sc.R / gamma, ZeroTail(), path.N, gamma)
    else:
        net = network_service_curve(sc, path.N, gamma)
    if not net.R_net > r0:
        raise InstabilityError(f"network rate {net.R_net:.6g} <= through rate {r0:.6g}")
    arr = arrival_tail(path.through, net.R_net - r0)
    return PathBound(DelayBound(net.R_net, arr, net.tail), sc, net, tuple(mus), gamma)


def end_to_end_delay(path: PathSpec) -> DelayBound:
    return path_bound(path).delay


# -- scaling ----------------------------------------------------------------

@dataclass(frozen=True)
class ScalingRow:
    N: int
    w_upper: float
    w_lower: float | None


@dataclass(frozen=True)
class ScalingTable:
    rows: tuple[ScalingRow, ...]
    eps: float
    slope_upper: float | None
    slope_lower: float | None
    slope_upper_normalized: float | None
    log_power: float | None

    def to_csv(self, header: dict | None = None) -> str:
        buf = io.StringIO()
        for k, v in (header or {}).items():
            buf.write(f"# {k}={v}\n")
        if "eps" not in (header or {}):
            buf.write(f"# eps={self.eps}\n")
        for name in ("slope_upper", "slope_lower", "slope_upper_normalized"):
            v = getattr(self, name)
            if v is not None:
                buf.write(f"# {name}={v:.6f}\n")
        buf.write("N,w_upper_s,w_lower_s\n")
        for r in self.rows:
            lo = "" if r.w_lower is None else f"{r.w_lower:.6e}"
            buf.write(f"{r.N},{r.w_upper:.6e},{lo}\n")
        return buf.getvalue()


def fit_slope(Ns, ws) -> float:
    return float(np.polyfit(np.log(np.asarray(Ns, float)), np.log(np.asarray(ws, float)), 1)[0])


def scaling_study(template: PathSpec, Ns, eps: float) -> ScalingTable:
    """Delay quantiles of homogeneous paths of each length in ``Ns``.

    For Weibull paths the upper slope is also reported after dividing the
    quantiles by ``(log N)^(1/beta)`` (only rows with N >= 2 enter that fit).
    """
    Ns = sorted(int(n) for n in Ns)
    if not Ns:
        raise ValueError("Ns must be nonempty")
    rows = []
    beta_w = None
    no_cross = all(n.cross is None for n in template.nodes[:1])
    for N in Ns:
        pb = path_bound(template.replicate(N))
        w_up = delay_quantile(pb.delay, eps)
        w_lo = None
        if template.pareto is not None and no_cross:
            p = template.pareto
            w_lo = lower_bound_quantile_pareto(N, p.b, p.alpha, p.lambda_packets, eps,
                                               C=template.nodes[0].C)
        t = pb.per_node.tail
        if isinstance(t, TailBound) and t.kind is TailKind.WEIBULL:
            beta_w = t.alpha
        rows.append(ScalingRow(N, w_up, w_lo))
    slope_up = slope_lo = slope_norm = None
    if len(rows) > 1:
        slope_up = fit_slope([r.N for r in rows], [r.w_upper for r in rows])
        if all(r.w_lower is not None for r in rows):
            slope_lo = fit_slope([r.N for r in rows], [r.w_lower for r in rows])
        if beta_w is not None:
            sub = [r for r in rows if r.N >= 2]
            if len(sub) > 1:
                slope_norm = fit_slope([r.N for r in sub],
                                       [r.w_upper / math.log(r.N) ** (1.0 / beta_w) for r in sub])
    return ScalingTable(tuple(rows), eps, slope_up, slope_lo, slope_norm, beta_w)
