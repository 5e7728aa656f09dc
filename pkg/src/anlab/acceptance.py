"""Acceptance checks, shared by ``anlab verify`` and ``tests/test_acceptance.py``.

Every check returns a :class:`CheckResult` and prints one PASS/FAIL line.
``quick=True`` shrinks the Monte Carlo budgets of the slow checks and
widens their tolerances as documented in each function.
"""
from __future__ import annotations

import math
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy import integrate, stats

from . import allocation, analytics, montecarlo, optimizer
from .analytics import SecrecyScenario
from .beamformer import build_basis
from .channel import RandomSource, correlate, fixed_main_channel, sample_whitened
from .correlation import build_exponential_correlation, from_explicit, from_spectrum
from .montecarlo import MonteCarloConfig
from .special import SeriesControl, f_antiderivative

FIG2_LAMBDA = (2.8, 0.7, 0.3, 0.2)
FIG2_HS = (0.1104 - 0.6619j, -0.6677 + 1.2432j, 0.7588 + 0.9201j, 1.0196 + 0.4098j)
FIG2_RATE = 2.0
FIG2_MU_B = 10 ** 0.5
FIG2_MU_E = 10 ** 0.5
SEED = 20170501


@dataclass(frozen=True)
class CheckResult:
    cid: str
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.cid:>3} {self.title}: {self.detail} ({self.seconds:.1f}s)"


def _report(cid, title, passed, detail, t0):
    res = CheckResult(cid, title, bool(passed), detail, time.perf_counter() - t0)
    print(res.line(), flush=True)
    return res


def fig2_setup():
    corr = from_spectrum(FIG2_LAMBDA)
    h = fixed_main_channel(np.array(FIG2_HS), corr).h
    return corr, h, build_basis(h, corr)


def random_correlation(rng: np.random.Generator, n: int):
    """Unit-diagonal correlation from a normalized complex Wishart draw."""
    x = (rng.standard_normal((n, n + 2)) + 1j * rng.standard_normal((n, n + 2))) / math.sqrt(2)
    a = x @ x.conj().T
    d = 1.0 / np.sqrt(np.real(np.diag(a)))
    t = a * d[:, None] * d[None, :]
    np.fill_diagonal(t, 1.0)
    return from_explicit(0.5 * (t + t.conj().T))


def random_link(rng: np.random.Generator, n: int):
    corr = random_correlation(rng, n)
    h = correlate(sample_whitened(rng, n), corr)
    return corr, h, build_basis(h, corr)


# ------------------------------------------------------------------ checks


def c1_analytic_vs_mc(quick: bool = False) -> CheckResult:
    """The fig2 scenario, 10 alphas, both regimes, |analytic - MC| < 3 SE."""
    t0 = time.perf_counter()
    corr, h, basis = fig2_setup()
    trials = 200_000 if quick else 1_000_000
    sample = montecarlo.draw_eve_sample(basis, MonteCarloConfig(trials, seed=SEED))
    cpa = allocation.cpa(basis)
    worst = 0.0
    fails = 0
    for a in np.linspace(0.30, 0.95, 10):
        for mu_e in (math.inf, FIG2_MU_E):
            sc = SecrecyScenario(corr, FIG2_RATE, FIG2_MU_B, mu_e, h=h, alpha=float(a))
            p = analytics.cpa_outage(sc, basis, method="series")
            r = sample.result(sc, cpa)
            z = abs(p - r.estimate) / r.standard_error
            worst = max(worst, z)
            fails += z >= 3.0
    return _report("1", "analytic vs MC (fig2, 10 alphas x 2 regimes)", fails == 0,
                   f"max |diff|/SE = {worst:.2f} over 20 points, trials={trials}", t0)


def c2_interference_identities(quick: bool = False) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 2)
    trials = 200_000 if quick else 1_000_000
    worst = 0.0
    fails = 0
    for i in range(10):
        n = int(rng.integers(2, 9))
        corr, h, basis = random_link(rng, n)
        mc = MonteCarloConfig(trials, seed=SEED + 2)
        sample = montecarlo.draw_eve_sample(basis, mc, (montecarlo.AUX_STREAM, i))
        for alloc, target in ((allocation.cpa(basis), (n - 1) * basis.theta[0]),
                              (allocation.upa(n), basis.theta.sum())):
            s = sample.interference(alloc.phi)
            se = s.std(ddof=1) / math.sqrt(s.size)
            z = abs(s.mean() - target) / se
            worst = max(worst, z)
            fails += z >= 3.0
    return _report("2", "mean interference (N_t-1)theta_1 and sum(theta)", fails == 0,
                   f"max |diff|/SE = {worst:.2f} over 20 comparisons", t0)


def c3_cpa_dominance(quick: bool = False) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 3)
    _, _, basis = fig2_setup()
    m = basis.theta.size
    best = allocation.mean_interference(allocation.cpa(basis), basis)
    phis = rng.dirichlet(np.ones(m), size=1000) * m
    vals = np.array([allocation.mean_interference(allocation.custom(p), basis) for p in phis])
    return _report("3", "CPA maximizes mean interference over the simplex", bool(np.all(best >= vals)),
                   f"CPA {best:.6f} vs max random {vals.max():.6f} (1000 draws)", t0)


def c4_interference_equivalence(quick: bool = False) -> CheckResult:
    """KS test between ``g V_N Omega V_N^H g^H`` and its spectrum-matched diagonal counterpart.

    Correlated ``T`` is used, as everywhere else in the model.  The
    diagonal counterpart is ``W diag(eig(Omega)) W^H`` with eigenvalues
    sorted to follow ``theta``.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 4)
    trials = 20_000 if quick else 100_000
    pvals = []
    for i in range(20):
        n = int(rng.integers(3, 7))
        corr, h, basis = random_link(rng, n)
        m = n - 1
        y = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / math.sqrt(2)
        omega = y @ y.conj().T
        omega *= m / np.real(np.trace(omega))
        phi = np.sort(np.linalg.eigvalsh(omega))[::-1]
        omega_diag = (basis.eigvecs * phi) @ basis.eigvecs.conj().T
        src = RandomSource(SEED + 4, (montecarlo.AUX_STREAM, i))
        x = montecarlo.sample_quadratic_form(basis, omega, src.child(0), trials)
        d = montecarlo.sample_quadratic_form(basis, omega_diag, src.child(1), trials)
        pvals.append(stats.ks_2samp(x, d).pvalue)
    pvals = np.array(pvals)
    ok = int(np.sum(pvals >= 0.01))
    return _report("4", "Omega vs spectrum-matched diagonal Phi, KS at 1%", ok == 20,
                   f"{ok}/20 cases pass, min p = {pvals.min():.3g}, trials={trials}", t0)


def c5_special_contract(quick: bool = False) -> CheckResult:
    t0 = time.perf_counter()
    worst = 0.0
    cases = [(n, p, a, b) for n in range(-6, 7) for p in (0.1, 1.0, 10.0) for a, b in ((0.1, 1.0), (1.0, 5.0))]
    cases.append((2, 1.0, 0.5, 3.0))
    for n, p, a, b in cases:
        ref, _ = integrate.quad(lambda y: y ** (-n - 1) * math.exp(-p * y), a, b, epsabs=0.0, epsrel=1e-13,
                                limit=200)
        got = f_antiderivative(n, p, b) - f_antiderivative(n, p, a)
        worst = max(worst, abs(got - ref) / abs(ref))
    return _report("5", "F(n,p,b) - F(n,p,a) equals the integral", worst < 1e-8,
                   f"max relative error {worst:.2e} over {len(cases)} cases", t0)


def c6_alpha_one(quick: bool = False) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 6)
    trials = 200_000 if quick else 1_000_000
    worst = 0.0
    fails = 0
    for i in range(5):
        n = int(rng.integers(2, 7))
        corr, h, basis = random_link(rng, n)
        rate = float(rng.uniform(0.5, 2.0))
        gain = float(np.vdot(h, h).real)
        mu_b = float(rng.uniform(2.0, 6.0)) * (2 ** rate - 1) / gain
        mu_e = 10 ** float(rng.uniform(0.0, 1.5))
        sc = SecrecyScenario(corr, rate, mu_b, mu_e, h=h, alpha=1.0)
        p = analytics.exact_outage(sc, basis)
        r = montecarlo.estimate_outage(sc, basis, allocation.cpa(basis), MonteCarloConfig(trials, seed=SEED + 6),
                                       (montecarlo.EVE_STREAM, i))
        z = abs(p - r.estimate) / max(r.standard_error, 1e-300)
        worst = max(worst, z)
        fails += z >= 3.0
    return _report("6", "alpha = 1 closed form vs MC", fails == 0, f"max |diff|/SE = {worst:.2f} over 5 scenarios", t0)


def _truncation_points(sc_file):
    """(scenario, basis, alphas) triples at which a bundled file evaluates the closed forms."""
    from .experiments.runner import correlation_for, secrecy_template

    out = []
    for pt in sc_file.points():
        corr = correlation_for(sc_file, pt.n_antennas, pt.rho_r)
        if sc_file.kind == "conditioned":
            bases = [build_basis(fixed_main_channel(sc_file.h_s, corr).h, corr)]
        else:
            mc = MonteCarloConfig(1000, sc_file.h_realizations, sc_file.seed)
            bases = [montecarlo.draw_main_basis(corr, mc, i) for i in range(3)]
        for b in bases:
            tmpl = secrecy_template(sc_file, pt, corr, b.h)
            if sc_file.sweep_variable == "alpha":
                alphas = [pt.sweep_value]
            else:
                a_l = optimizer.alpha_lower_bound(tmpl)
                alphas = [] if a_l >= 1 else list(optimizer.alpha_grid(a_l, 12, False))
            out.append((tmpl, b, [a for a in alphas if a < 1.0]))
    return out


def c7_truncation(quick: bool = False) -> CheckResult:
    from .experiments import bundled_scenarios, load_scenario

    t0 = time.perf_counter()
    k15, k30 = SeriesControl(15), SeriesControl(30)
    worst = 0.0
    where = ""
    count = 0
    for path in bundled_scenarios():
        sc_file = load_scenario(path)
        if "cpa" not in sc_file.allocations:
            continue
        for tmpl, b, alphas in _truncation_points(sc_file):
            for a in alphas:
                s = tmpl.with_alpha(a)
                d = abs(analytics.cpa_outage(s, b, k15, "stable") - analytics.cpa_outage(s, b, k30, "stable"))
                count += 1
                if d > worst:
                    worst = d
                    where = f"{sc_file.name}, N_t={b.n_antennas}, rho={analytics.outage_params(s, b).rho:.3f}, alpha={a:.3f}"
    return _report("7", "|P(K=15) - P(K=30)| < 1e-6 on bundled scenarios", worst < 1e-6,
                   f"max {worst:.2e} over {count} evaluations (worst at {where})", t0)


def c8a_exact_to_asymptotic(quick: bool = False) -> CheckResult:
    from .experiments import load_scenario, run_scenario

    t0 = time.perf_counter()
    sc = load_scenario("fig3")
    sc = sc.with_overrides(sweep_values=tuple(v for v in sc.sweep_values if v >= 20.0))
    table = run_scenario(sc, None, plot=False)
    by = {(r.rho_r, r.mu_E_dB, r.regime): r.outage for r in table.rows}
    diffs = [abs(p - by[(rho, mue, "asymptotic")]) for (rho, mue, reg), p in by.items() if reg == "exact"]
    worst = max(diffs)
    return _report("8a", "min exact outage within 0.01 of asymptotic for mu_E >= 20 dB", worst < 0.01,
                   f"max |P* - P*_inf| = {worst:.4f} over {len(diffs)} points", t0)


def c8b_cpa_vs_opa(quick: bool = False) -> CheckResult:
    t0 = time.perf_counter()
    corr, h, basis = fig2_setup()
    trials = 50_000 if quick else 200_000
    mc = MonteCarloConfig(trials, seed=SEED + 8)
    sample = montecarlo.draw_eve_sample(basis, mc)
    cpa = allocation.cpa(basis)
    worst = 0.0
    ok = True
    for a in (0.4, 0.5, 0.6, 0.7, 0.8):
        for mu_e in (math.inf, FIG2_MU_E):
            sc = SecrecyScenario(corr, FIG2_RATE, FIG2_MU_B, mu_e, h=h, alpha=a)
            rc = sample.result(sc, cpa)
            _, ro = allocation.opa_search(basis, sc, mc, sample=sample)
            d = abs(rc.estimate - ro.estimate)
            tol = max(0.01, 4 * max(rc.standard_error, ro.standard_error))
            worst = max(worst, d)
            ok &= d < tol
    return _report("8b", "CPA close to OPA on fig2 (5 alphas x 2 regimes)", ok, f"max |P_CPA - P_OPA| = {worst:.4f}", t0)


def _average_pair(template, mc, search):
    # adaptive truncation: K = 15 is not converged when rho is close to 1
    _, cpa = montecarlo.estimate_average_outage(template, mc, "cpa", search=search, return_samples=True,
                                                min_realizations=1, ctrl=SeriesControl(adaptive=True))
    _, upa = montecarlo.estimate_average_outage(template, mc, "upa", search=search, return_samples=True,
                                                min_realizations=1)
    return cpa, upa


def c8c_averaged_ordering(quick: bool = False) -> CheckResult:
    """The fig5 setting at mu_B = 10 dB: paired CPA - UPA differences over main channels.

    Full: mean difference beyond 2 SE in the stated direction.  Quick:
    the sign of the mean difference only.
    """
    t0 = time.perf_counter()
    h_draws, trials = (50, 10_000) if quick else (200, 100_000)
    mc = MonteCarloConfig(trials, h_draws, SEED + 80)
    search = optimizer.AlphaSearch(grid=100, refine=1)
    parts = []
    ok = True
    for rho_r, sign in ((0.0, 1.0), (0.9, -1.0)):
        corr = build_exponential_correlation(3, 0.5, rho_r)
        tmpl = SecrecyScenario(corr, 1.0, 10.0, 10 ** 0.5)
        cpa, upa = _average_pair(tmpl, mc, search)
        d = cpa - upa
        mean, se = d.mean(), d.std(ddof=1) / math.sqrt(d.size)
        passed = sign * mean > (0.0 if quick else 2.0 * se)
        ok &= passed
        parts.append(f"rho_r={rho_r}: CPA {cpa.mean():.4f} UPA {upa.mean():.4f} diff {mean:+.4f} (SE {se:.4f})")
    return _report("8c", "averaged CPA >= UPA at rho_r=0, <= at rho_r=0.9", ok, "; ".join(parts), t0)


def c8d_nt_trend(quick: bool = False) -> CheckResult:
    """The fig6 setting, rho_r = 0.05, noiseless Eve: UPA saturates, CPA keeps falling.

    Full: UPA(30) within 2 SE of UPA(20); CPA(20) - CPA(30) above 2 SE.
    Quick: saturation within 3 SE, CPA decrease by sign only.
    """
    t0 = time.perf_counter()
    h_draws, trials = (50, 10_000) if quick else (200, 100_000)
    mc = MonteCarloConfig(trials, h_draws, SEED + 81)
    search = optimizer.AlphaSearch(grid=100, refine=1)
    res = {}
    for n in (20, 30):
        corr = build_exponential_correlation(n, 0.5, 0.05)
        tmpl = SecrecyScenario(corr, 1.0, 10.0, math.inf)
        res[n] = _average_pair(tmpl, mc, search)

    def mse(v):
        return v.mean(), v.std(ddof=1) / math.sqrt(v.size)

    (c20, sc20), (c30, sc30) = mse(res[20][0]), mse(res[30][0])
    (u20, su20), (u30, su30) = mse(res[20][1]), mse(res[30][1])
    se_u = math.hypot(su20, su30)
    se_c = math.hypot(sc20, sc30)
    sat = abs(u30 - u20) < (3.0 if quick else 2.0) * se_u
    dec = (c20 - c30) > (0.0 if quick else 2.0 * se_c)
    detail = (f"UPA {u20:.4f} -> {u30:.4f} (|diff| {abs(u30 - u20):.4f}, SE {se_u:.4f}); "
              f"CPA {c20:.4f} -> {c30:.4f} (drop {c20 - c30:.4f}, SE {se_c:.4f})")
    return _report("8d", "N_t 20 -> 30: UPA saturates, CPA decreases", sat and dec, detail, t0)


def c9_cdf_and_rho(quick: bool = False) -> CheckResult:
    t0 = time.perf_counter()
    corr, h, basis = fig2_setup()
    notes = []
    ok = True
    z = np.geomspace(1e-3, 1e3, 100)
    for mu_e, fn in ((math.inf, analytics.asymptotic_eve_cdf), (FIG2_MU_E, analytics.exact_eve_cdf)):
        p = analytics.outage_params(SecrecyScenario(corr, FIG2_RATE, FIG2_MU_B, mu_e, h=h, alpha=0.5), basis)
        vals = np.array([fn(float(x), p, method="series") for x in z])
        mono = bool(np.all(np.diff(vals) >= -1e-12))
        top = fn(1e6, p, SeriesControl(adaptive=True), method="series")
        ok &= mono and abs(top - 1.0) < 1e-6
        notes.append(f"{'asym' if math.isinf(mu_e) else 'exact'}: monotone={mono}, F(1e6)=1-{1 - top:.1e}")
    rhos = [analytics.outage_params(SecrecyScenario(corr, FIG2_RATE, FIG2_MU_B, math.inf, h=h, alpha=a), basis).rho
            for a in (0.1, 0.3, 0.5, 0.7, 0.9)]
    spread = max(rhos) - min(rhos)
    ok &= spread < 1e-12
    eye = from_spectrum(np.ones(4))
    rho_i = analytics.outage_params(SecrecyScenario(eye, 1.0, 1.0, math.inf, h=h, alpha=0.5), build_basis(h, eye)).rho
    ok &= rho_i == 0.0 or abs(rho_i) < 1e-15
    trials = 200_000 if quick else 1_000_000
    est, se = montecarlo.estimate_gain_correlation(basis, MonteCarloConfig(trials, seed=SEED + 9))
    zr = abs(est - rhos[0]) / se
    ok &= zr < 3.0
    notes.append(f"rho spread over alpha {spread:.1e}; rho(T=I)={rho_i:.1e}; "
                 f"rho={rhos[0]:.5f} vs MC {est:.5f} ({zr:.2f} SE)")
    return _report("9", "cdf validity and rho properties", ok, "; ".join(notes), t0)


def c10_reproducible_cli(quick: bool = False) -> CheckResult:
    t0 = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        outs = []
        for i, workers in enumerate((1, 1, 3)):
            out = Path(tmp) / f"run{i}"
            cmd = [sys.executable, "-m", "anlab.cli", "run", "fig2.toml", "--seed", "7", "--out", str(out),
                   "--workers", str(workers), "--no-plot"]
            if quick:
                cmd += ["--trials", "20000"]
            subprocess.run(cmd, check=True, capture_output=True, text=True)
            outs.append((out / "fig2.csv").read_bytes())
    same = outs[0] == outs[1] == outs[2]
    return _report("10", "fig2 --seed 7 byte-identical across runs and worker counts", same,
                   f"{len(outs[0])} bytes, workers 1/1/3", t0)


CHECKS: Dict[str, Callable[[bool], CheckResult]] = {
    "1": c1_analytic_vs_mc,
    "2": c2_interference_identities,
    "3": c3_cpa_dominance,
    "4": c4_interference_equivalence,
    "5": c5_special_contract,
    "6": c6_alpha_one,
    "7": c7_truncation,
    "8a": c8a_exact_to_asymptotic,
    "8b": c8b_cpa_vs_opa,
    "8c": c8c_averaged_ordering,
    "8d": c8d_nt_trend,
    "9": c9_cdf_and_rho,
    "10": c10_reproducible_cli,
}


def run_all(quick: bool = False, only: Optional[List[str]] = None) -> List[CheckResult]:
    results = []
    for cid, fn in CHECKS.items():
        if only and cid not in only:
            continue
        results.append(fn(quick))
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} checks passed", flush=True)
    return results
