"""Heavy-tailed service curves ``S(t; s) = [R t - s]_+`` with a tail bound."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .envelopes import (GaussEnvelope, HtssEnvelope, envelope_from_json,
                        gauss_sample_path_params, k_tilde, pareto_mean)
from .powerlaw_algebra import (TailBound, TailKind, ZeroTail, lower_power,
                               minimize_sum, power_law, weibull)

# relaxation presets, as fractions of the residual capacity C - r_cross - r_through
MU_HALF = 0.5
MU_THIRD = 1.0 / 3.0


class InstabilityError(ValueError):
    """Arrival rate at or above the available service rate."""


@dataclass(frozen=True)
class HtServiceCurve:
    R: float
    tail: TailBound | ZeroTail

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"service rate must be positive, got {self.R}")


@dataclass(frozen=True)
class PacketizerSpec:
    """Packet-size tail ``P(X > s) <= L_p s^-alpha_p`` of the through flow."""

    alpha_p: float
    L_p: float
    mean_packet: float
    rho: float

    def __post_init__(self):
        if not self.alpha_p > 1:
            raise ValueError("alpha_p must exceed 1 (lifetime integral diverges)")
        if not self.mean_packet > 0:
            raise ValueError("mean packet size must be positive")
        if not 0 < self.rho <= 1:
            raise ValueError("rho must lie in (0, 1]")

    @classmethod
    def pareto(cls, b: float, alpha: float, rho: float) -> "PacketizerSpec":
        """Pareto(b, alpha) sizes: ``L_p = b^alpha``, ``E[X] = b alpha/(alpha-1)``."""
        return cls(alpha, b**alpha, pareto_mean(b, alpha), rho)


@dataclass(frozen=True)
class LinkSpec:
    C: float
    cross: HtssEnvelope | GaussEnvelope | None = None
    packetizer: PacketizerSpec | None = None

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("capacity must be positive")
        if self.cross is not None and not self.cross.r < self.C:
            raise InstabilityError(f"cross-traffic rate {self.cross.r} >= capacity {self.C}")

    @property
    def cross_rate(self) -> float:
        return 0.0 if self.cross is None else self.cross.r

    def to_dict(self) -> dict:
        d: dict = {"C_bps": self.C}
        if self.cross is not None:
            d["cross"] = json.loads(self.cross.to_json())
        if self.packetizer is not None:
            p = self.packetizer
            d["packetizer"] = {"alpha_p": p.alpha_p, "L_p": p.L_p,
                               "mean_packet_bits": p.mean_packet, "rho": p.rho}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LinkSpec":
        cross = envelope_from_json(d["cross"]) if d.get("cross") else None
        pk = d.get("packetizer")
        packetizer = None
        if pk:
            if "b_bytes" in pk:
                packetizer = PacketizerSpec.pareto(8.0 * pk["b_bytes"], pk["alpha_p"],
                                                   pk.get("rho", 1.0))
            else:
                packetizer = PacketizerSpec(pk["alpha_p"], pk["L_p"],
                                            pk["mean_packet_bits"], pk.get("rho", 1.0))
        return cls(float(d["C_bps"]), cross, packetizer)


def packetizer_tail(p: PacketizerSpec) -> TailBound:
    k = p.rho * p.L_p / ((p.alpha_p - 1.0) * p.mean_packet)
    return power_law(k, p.alpha_p - 1.0)


def packetizer_curve(C: float, alpha_p: float, L_p: float, mean_packet: float,
                     rho: float) -> HtServiceCurve:
    """Constant-rate link seen by a packetized flow.

    The tail is the stationary lifetime bound of the packet in transmission;
    it presumes the first arrival after an empty start is randomized.
    """
    return HtServiceCurve(C, packetizer_tail(PacketizerSpec(alpha_p, L_p, mean_packet, rho)))


def leftover_tail(link: LinkSpec, mu: float) -> TailBound:
    if link.cross is None:
        raise ValueError("leftover service needs a cross-traffic envelope")
    if not mu > 0:
        raise ValueError("mu must be positive")
    if isinstance(link.cross, GaussEnvelope):
        L, c, beta = gauss_sample_path_params(link.cross, mu)
        return weibull(L, c, beta)
    env = link.cross
    return power_law(k_tilde(env, mu), env.alpha * (1.0 - env.H))


def _leftover_rate(link: LinkSpec, mu: float) -> float:
    R = link.C - link.cross_rate - mu
    if not R > 0:
        raise InstabilityError(f"leftover rate C - r_c - mu = {R} is not positive")
    return R


def leftover_curve(link: LinkSpec, mu: float) -> HtServiceCurve:
    """Service left to a lowest-priority flow: rate ``C - r_c - mu``."""
    R = _leftover_rate(link, mu)
    return HtServiceCurve(R, leftover_tail(link, mu))


def combine_power_laws(a: TailBound, b: TailBound) -> TailBound:
    """Single power law bounding ``inf_{s1+s2=s} a(s1) + b(s2)``.

    The larger exponent is first lowered to the smaller one, then the sum
    is minimized in closed form.
    """
    beta = min(a.alpha, b.alpha)
    terms = [t if t.alpha == beta else lower_power(t, beta) for t in (a, b)]
    return minimize_sum(terms)


def leftover_with_packetizer(link: LinkSpec, mu: float) -> HtServiceCurve:
    """Leftover service for a packetized through flow (both tails combined)."""
    if link.packetizer is None:
        return leftover_curve(link, mu)
    R = _leftover_rate(link, mu)
    cross = leftover_tail(link, mu)
    if cross.kind is not TailKind.POWER_LAW:
        raise TypeError("packetizer combination needs power-law cross traffic")
    return HtServiceCurve(R, combine_power_laws(cross, packetizer_tail(link.packetizer)))


def node_curve(link: LinkSpec, mu: float) -> HtServiceCurve:
    """Per-node curve for whatever the link carries besides the through flow."""
    if link.cross is not None:
        return leftover_with_packetizer(link, mu)
    if link.packetizer is not None:
        return HtServiceCurve(link.C, packetizer_tail(link.packetizer))
    return HtServiceCurve(link.C, ZeroTail())


def mu_preset(link: LinkSpec, r_through: float, fraction: float) -> float:
    """``fraction`` of the residual capacity ``C - r_c - r_through``."""
    resid = link.C - link.cross_rate - r_through
    if not resid > 0:
        raise InstabilityError(f"unstable link: r_through + r_c >= C (residual {resid})")
    return fraction * resid
