"""Convergence of the outer series on a strongly correlated link.

The closed form sums an infinite series in the gain correlation rho.
When rho approaches 1 a fixed cutoff of 15 terms is visibly short, while
the adaptive cutoff agrees with direct numerical integration.

    python3 demos/series_truncation.py
"""
import numpy as np

from anlab.analytics import SecrecyScenario, cpa_outage, outage_params
from anlab.beamformer import build_basis
from anlab.correlation import build_exponential_correlation
from anlab.special import SeriesControl

h_s = np.array([0.3 + 0.1j, 1.2 - 0.4j, -0.2 + 0.9j])
print(" rho_r    rho     K=15          K=30          adaptive      quadrature")
for rho_r in (0.3, 0.6, 0.9, 0.97):
    corr = build_exponential_correlation(3, 0.5, rho_r)
    h = h_s @ corr.sqrt_factor
    b = build_basis(h, corr)
    sc = SecrecyScenario(corr, 1.0, 10.0, 10 ** 0.5, h=h, alpha=0.6)
    rho = outage_params(sc, b).rho
    vals = [cpa_outage(sc, b, SeriesControl(k), "stable") for k in (15, 30)]
    vals += [cpa_outage(sc, b, SeriesControl(adaptive=True), "stable"), cpa_outage(sc, b, method="quadrature")]
    print(f"  {rho_r:.2f}   {rho:.3f}   " + "  ".join(f"{v:.10f}" for v in vals))
