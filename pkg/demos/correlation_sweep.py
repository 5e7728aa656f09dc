"""How transmit correlation changes the value of concentrating the noise.

For a four-antenna array the correlation coefficient is swept.  For each
value the mean AN power leaking to Eve is computed under CPA and UPA, and
so is the CPA outage at its best alpha.

    python3 demos/correlation_sweep.py
"""
import numpy as np

from anlab.allocation import cpa, mean_interference, upa
from anlab.analytics import SecrecyScenario
from anlab.beamformer import build_basis
from anlab.channel import fixed_main_channel
from anlab.correlation import build_exponential_correlation
from anlab.optimizer import optimize_alpha
from anlab.special import SeriesControl

N = 4
h_s = np.array([0.9 + 0.2j, -0.3 + 0.7j, 0.5 - 0.4j, 0.1 + 0.8j])
ctrl = SeriesControl(adaptive=True)

print(" rho_r   E[I] CPA   E[I] UPA   best alpha   CPA outage")
for rho_r in (0.0, 0.3, 0.6, 0.9):
    corr = build_exponential_correlation(N, 0.5, rho_r)
    h = fixed_main_channel(h_s, corr).h
    b = build_basis(h, corr)
    sc = SecrecyScenario(corr, 1.0, 10.0, 10 ** 0.5, h=h)
    a, res = optimize_alpha(sc, b, "cpa", "analytic", ctrl=ctrl, method="stable")
    print(f"  {rho_r:.1f}    {mean_interference(cpa(b), b):7.3f}    {mean_interference(upa(N), b):7.3f}"
          f"     {a:.4f}      {res.estimate:.5f}")
