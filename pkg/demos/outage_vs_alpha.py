"""Outage against the information-power fraction on one fixed link.

Closed-form CPA outage next to Monte Carlo estimates for CPA and UPA, in
both Eve regimes, followed by the outage-minimizing alpha.

    python3 demos/outage_vs_alpha.py
"""
import math

import numpy as np

from anlab.acceptance import FIG2_MU_B, FIG2_MU_E, FIG2_RATE, fig2_setup
from anlab.allocation import cpa, upa
from anlab.analytics import SecrecyScenario, cpa_outage
from anlab.montecarlo import MonteCarloConfig, draw_eve_sample
from anlab.optimizer import alpha_lower_bound, optimize_alpha
from anlab.special import SeriesControl

corr, h, basis = fig2_setup()
sample = draw_eve_sample(basis, MonteCarloConfig(200_000, seed=1))
ctrl = SeriesControl(adaptive=True)

for mu_e, label in ((math.inf, "noiseless Eve"), (FIG2_MU_E, "mu_E = 5 dB")):
    base = SecrecyScenario(corr, FIG2_RATE, FIG2_MU_B, mu_e, h=h)
    print(f"\n{label}  (alpha must exceed {alpha_lower_bound(base):.3f})")
    print(" alpha   CPA exact   CPA MC     UPA MC")
    for a in np.arange(0.40, 1.0001, 0.1):
        sc = base.with_alpha(float(a))
        exact = cpa_outage(sc, basis, ctrl, "stable")
        mc_c = sample.result(sc, cpa(basis))
        mc_u = sample.result(sc, upa(basis.n_antennas))
        print(f"  {a:.2f}   {exact:.5f}    {mc_c.estimate:.5f}    {mc_u.estimate:.5f}")
    a_star, res = optimize_alpha(base, basis, "cpa", "analytic", ctrl=ctrl, method="stable")
    print(f"  best alpha for CPA: {a_star:.4f} -> outage {res.estimate:.5f}")
