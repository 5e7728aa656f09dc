"""Artificial-noise power allocation and secrecy outage for wiretap channels
with transmit-antenna correlation."""

__version__ = "0.1.0"

from .allocation import PowerAllocation, cpa, custom, mean_interference, opa_search, upa
from .analytics import (OutageParams, SecrecyScenario, asymptotic_outage, cpa_outage, exact_outage, gamma_b,
                        outage_params)
from .beamformer import BeamformingBasis, build_basis, effective_gains
from .channel import ChannelRealization, RandomSource, correlate, fixed_main_channel, sample_whitened
from .correlation import (ArrayGeometry, CorrelationMatrix, build_exponential_correlation, from_explicit,
                          from_spectrum)
from .montecarlo import MonteCarloConfig, OutageResult, estimate_average_outage, estimate_outage
from .optimizer import AlphaSearch, alpha_lower_bound, optimize_alpha
from .special import SeriesControl

__all__ = [
    "AlphaSearch", "ArrayGeometry", "BeamformingBasis", "ChannelRealization", "CorrelationMatrix",
    "MonteCarloConfig", "OutageParams", "OutageResult", "PowerAllocation", "RandomSource", "SecrecyScenario",
    "SeriesControl", "alpha_lower_bound", "asymptotic_outage", "build_basis", "build_exponential_correlation",
    "correlate", "cpa", "cpa_outage", "custom", "effective_gains", "estimate_average_outage", "estimate_outage",
    "exact_outage", "fixed_main_channel", "from_explicit", "from_spectrum", "gamma_b", "mean_interference",
    "opa_search", "optimize_alpha", "outage_params", "sample_whitened", "upa",
]
