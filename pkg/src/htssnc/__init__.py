"""Stochastic network calculus for heavy-tailed self-similar traffic."""

from .bounds import (BacklogBound, DelayBound, backlog_bound, delay_bound, delay_quantile,
                     lower_bound_quantile_pareto)
from .envelopes import (GaussEnvelope, HtssEnvelope, SamplePathEnvelope, envelope_from_fbm,
                        envelope_from_pareto, envelope_from_stable,
                        envelope_from_stable_quantiles, k_tilde, sample_path_envelope)
from .network import (NetworkServiceCurve, PathSpec, concat_two, concat_two_weibull,
                      end_to_end_delay, network_service_curve, network_service_curve_weibull,
                      scaling_study)
from .powerlaw_algebra import (TailBound, TailKind, evaluate, lower_power, minimize_sum,
                               power_law, power_law_log, remove_log, remove_shift, weibull)
from .service import (HtServiceCurve, InstabilityError, LinkSpec, PacketizerSpec,
                      leftover_curve, leftover_with_packetizer, packetizer_curve)
from .sim import TandemConfig, ccdf, run_tandem

__version__ = "0.1.0"
