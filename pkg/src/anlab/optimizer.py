"""Choice of the information power fraction ``alpha``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import allocation as alloc_mod
from . import analytics
from .allocation import PowerAllocation
from .beamformer import BeamformingBasis
from .errors import DomainError
from .montecarlo import EVE_STREAM, MonteCarloConfig, OutageResult, draw_eve_sample, scenario_fingerprint
from .special import DEFAULT_SERIES, SeriesControl

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class AlphaSearch:
    """Grid scan over the feasible ``alpha`` range, then golden-section refinement.

    Each refinement pass runs ``golden_iterations`` golden-section steps on
    the bracket around the incumbent.  The first bracket is one grid cell
    on either side; later passes reuse the width of the previous pass's
    final bracket times ``regrow``.  OPA is costly, so it scans the coarser
    ``opa_grid`` instead.
    """

    grid: int = 400
    refine: int = 2
    golden_iterations: int = 20
    regrow: float = 8.0
    opa_grid: int = 24

    def __post_init__(self):
        if self.grid < 2:
            raise DomainError("alpha grid needs at least 2 points")
        if self.refine < 0:
            raise DomainError("refine must be >= 0")


def alpha_lower_bound(scenario) -> float:
    """``(2^R_s - 1) / (mu_B ||h||^2)``; at or above 1 no alpha is feasible."""
    gain = scenario.main_gain
    if not gain > 0:
        raise DomainError("main channel gain must be positive")
    return (2.0 ** scenario.rate - 1.0) / (scenario.mu_b * gain)


def alpha_grid(alpha_l: float, n: int, include_one: bool) -> np.ndarray:
    """Points strictly above ``alpha_l``; ``1`` is the last point only if ``include_one``."""
    lo = max(alpha_l, 0.0)
    i = np.arange(1, n + 1, dtype=float)
    if include_one:
        out = lo + (1.0 - lo) * i / n
        out[-1] = 1.0
        return np.minimum(out, 1.0)
    return np.minimum(lo + (1.0 - lo) * i / (n + 1), np.nextafter(1.0, 0.0))


def _golden(f, lo: float, hi: float, iterations: int, record):
    a0, b0 = lo, hi

    def probe(x):
        # rounding must never step outside the starting bracket
        x = min(max(x, a0), b0)
        return x, record(x, f(x))

    c, fc = probe(hi - INV_PHI * (hi - lo))
    d, fd = probe(lo + INV_PHI * (hi - lo))
    for _ in range(iterations):
        if fc <= fd:
            hi, d, fd = d, c, fc
            c, fc = probe(hi - INV_PHI * (hi - lo))
        else:
            lo, c, fc = c, d, fd
            d, fd = probe(lo + INV_PHI * (hi - lo))
    return hi - lo


def _resolve_alloc(alloc, basis) -> Union[PowerAllocation, str]:
    if isinstance(alloc, PowerAllocation):
        return alloc
    if alloc == "cpa":
        return alloc_mod.cpa(basis)
    if alloc == "upa":
        return alloc_mod.upa(basis.n_antennas)
    if alloc == "opa":
        return "opa"
    raise DomainError(f"unknown allocation {alloc!r}")


def optimize_alpha(scenario, basis: BeamformingBasis, alloc, evaluator: str = "analytic",
                   search: AlphaSearch = AlphaSearch(), *, mc: Optional[MonteCarloConfig] = None,
                   sample=None, stream: Sequence[int] = (EVE_STREAM,), ctrl: SeriesControl = DEFAULT_SERIES,
                   method: str = "stable"):
    """Minimize outage over ``alpha`` in ``(alpha_l, 1)`` (noiseless Eve) or ``(alpha_l, 1]``.

    ``evaluator="analytic"`` is available for CPA only.  ``"mc"`` scores
    every ``alpha`` on one frozen Eve sample.  There, among evaluated points
    within one standard error of the minimum, the largest ``alpha`` is
    returned.  The result's ``estimate`` is the outage at the returned
    ``alpha``; ``min_outage`` is the smallest value seen.

    Returns ``(alpha_star, OutageResult)``; ``alpha_star`` is ``None`` when
    no ``alpha`` is feasible.
    """
    a_l = alpha_lower_bound(scenario)
    include_one = not scenario.asymptotic
    resolved = _resolve_alloc(alloc, basis)
    label = resolved if isinstance(resolved, str) else resolved.kind
    fp = scenario_fingerprint(scenario, resolved if not isinstance(resolved, str) else None, mc, stream)
    ev = "analytic" if evaluator == "analytic" else "mc"
    if a_l >= 1.0:
        return None, OutageResult(1.0, 0.0, 0, fp, None, 1.0, ev, label, infeasible=True)

    if evaluator == "analytic":
        if label != "cpa":
            raise DomainError("closed-form outage exists for CPA only; use evaluator='mc'")

        def objective(a):
            return analytics.cpa_outage(scenario.with_alpha(a), basis, ctrl, method)

        trials, se_of = 0, (lambda p: 0.0)
    elif evaluator == "mc":
        if sample is None:
            if mc is None:
                raise DomainError("Monte Carlo evaluation needs a MonteCarloConfig")
            sample = draw_eve_sample(basis, mc, stream)
        trials = sample.trials
        m = basis.n_antennas - 1
        if label == "opa" and m == 1:
            # the simplex is a single point
            resolved = PowerAllocation("opa", np.ones(1))
        if isinstance(resolved, PowerAllocation):
            phi = resolved.phi
            s_vec = sample.interference(phi)

            def objective(a):
                return sample.outage(scenario.with_alpha(a), phi, s_vec)
        else:
            starts = [alloc_mod.cpa(basis).phi, alloc_mod.upa(basis.n_antennas).phi]

            def objective(a):
                s = scenario.with_alpha(a)
                _, val, _ = alloc_mod.compass_search(lambda p: sample.outage(s, p), starts, float(m))
                return val

        def se_of(p):
            return math.sqrt(max(p * (1.0 - p), 0.0) / trials)
    else:
        raise DomainError(f"unknown evaluator {evaluator!r}")

    n = search.opa_grid if not isinstance(resolved, PowerAllocation) else search.grid
    grid = alpha_grid(a_l, n, include_one)
    seen = {}

    def record(a, v):
        seen[float(a)] = float(v)
        return v

    for a in grid:
        record(a, objective(float(a)))

    lo_dom = max(a_l, 0.0)
    step = grid[1] - grid[0] if grid.size > 1 else (1.0 - lo_dom) / 2
    width = step
    for _ in range(search.refine):
        best = min(seen, key=lambda a: (seen[a], -a))
        lo = max(best - width, lo_dom + 1e-12 * (1.0 - lo_dom))
        hi = min(best + width, 1.0 if include_one else 1.0 - 1e-12)
        if not hi > lo:
            break
        final = _golden(objective, lo, hi, search.golden_iterations, record)
        width = max(final * search.regrow, 1e-12)

    alphas = np.array(sorted(seen))
    vals = np.array([seen[a] for a in alphas])
    assert np.all(alphas > a_l) and np.all(alphas <= 1.0)
    if not include_one:
        assert np.all(alphas < 1.0)
    p_min = float(vals.min())
    tol = se_of(p_min)
    if ev == "mc":
        near = alphas[vals <= p_min + tol]
        a_star = float(near.max())
    else:
        a_star = float(alphas[int(np.argmin(vals))])
    p_star = seen[a_star]
    return a_star, OutageResult(p_star, se_of(p_star), trials, fp, a_star, p_min, ev, label)
