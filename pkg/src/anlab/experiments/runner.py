"""Execute a scenario and collect its rows."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import platform
import time
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .. import __version__, allocation, analytics, montecarlo, optimizer
from ..analytics import SecrecyScenario, db_to_linear
from ..beamformer import build_basis
from ..channel import fixed_main_channel
from ..correlation import build_exponential_correlation, from_explicit, from_spectrum
from ..special import SeriesControl
from .scenario import ScenarioFile, SeriesPoint, load_scenario

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResultRow:
    fingerprint: str
    sweep_var: str
    sweep_value: Optional[float]
    N_t: int
    rho_r: Optional[float]
    mu_B_dB: float
    mu_E_dB: float
    regime: str
    allocation: str
    evaluator: str
    mode: str
    alpha: Optional[float]
    outage: float
    se: float
    trials: int
    alpha_star: Optional[float]
    infeasible: bool


COLUMNS = tuple(f.name for f in fields(ResultRow))
_INT = {"N_t", "trials"}
_BOOL = {"infeasible"}
_STR = {"fingerprint", "sweep_var", "regime", "allocation", "evaluator", "mode"}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def _parse(name: str, s: str):
    if name in _STR:
        return s
    if s == "":
        return None
    if name in _BOOL:
        return s == "true"
    if name in _INT:
        return int(s)
    return float(s)


@dataclass
class ResultTable:
    rows: List[ResultRow]
    meta: Dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, meta: Optional[Dict] = None) -> "ResultTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if tuple(header) != COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        rows = [ResultRow(**{c: _parse(c, v) for c, v in zip(COLUMNS, rec)}) for rec in reader if rec]
        return cls(rows, dict(meta or {}))

    def write(self, out_dir, stem: str) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{stem}.csv"
        path.write_bytes(self.to_csv().encode("utf-8"))
        (out / f"{stem}.meta.json").write_text(json.dumps(self.meta, indent=2, sort_keys=True, default=str) + "\n",
                                               encoding="utf-8")
        return path


# ------------------------------------------------------------------- points


def correlation_for(sc: ScenarioFile, n_antennas: int, rho_r: Optional[float]):
    model = sc.correlation["model"]
    if model == "exponential":
        return build_exponential_correlation(n_antennas, sc.correlation["L"], rho_r)
    if model == "spectrum":
        return from_spectrum(sc.correlation["lambda"])
    return from_explicit(np.array(sc.correlation["rows"], dtype=complex))


def _regime(pt: SeriesPoint) -> str:
    if pt.regime != "auto":
        return pt.regime
    return "asymptotic" if math.isinf(pt.mu_e_db) else "exact"


def secrecy_template(sc: ScenarioFile, pt: SeriesPoint, corr, h=None, alpha: float = 1.0) -> SecrecyScenario:
    mu_e = math.inf if _regime(pt) == "asymptotic" else db_to_linear(pt.mu_e_db)
    return SecrecyScenario(corr, sc.system["R_s"], db_to_linear(pt.mu_b_db), mu_e, h=h, alpha=alpha)


class _Runner:
    def __init__(self, sc: ScenarioFile):
        self.sc = sc
        self.search = optimizer.AlphaSearch(grid=max(sc.grid, 2), refine=sc.refine)
        self.ctrl = SeriesControl(truncation=sc.truncation, adaptive=sc.adaptive)
        self.mc = montecarlo.MonteCarloConfig(sc.trials, 1, sc.seed, sc.workers) if sc.kind == "conditioned" else None
        self.samples: Dict[tuple, montecarlo.EveSample] = {}
        self.bases: Dict[tuple, object] = {}
        self.scenario_hash = sc.scenario_hash()
        # single evaluations can afford the literal series; optimizer loops use the scenario's method
        self.fixed_method = "series" if sc.method == "stable" and not sc.adaptive else sc.method

    def basis(self, pt: SeriesPoint):
        key = (pt.n_antennas, pt.rho_r)
        if key not in self.bases:
            corr = correlation_for(self.sc, pt.n_antennas, pt.rho_r)
            h = fixed_main_channel(self.sc.h_s, corr).h
            self.bases[key] = build_basis(h, corr)
        return self.bases[key]

    def sample(self, pt: SeriesPoint):
        key = (pt.n_antennas, pt.rho_r)
        if key not in self.samples:
            stream = (montecarlo.EVE_STREAM, len(self.samples))
            self.samples[key] = montecarlo.draw_eve_sample(self.basis(pt), self.mc, stream)
        return self.samples[key]

    def alloc(self, name: str, basis):
        if name == "cpa":
            return allocation.cpa(basis)
        if name == "upa":
            return allocation.upa(basis.n_antennas)
        if name == "custom":
            return allocation.custom(self.sc.phi)
        return None

    def row(self, pt, alloc, evaluator, mode, alpha, outage, se, trials, alpha_star, infeasible, fp_extra=()):
        fp = montecarlo.fingerprint(self.scenario_hash, pt.n_antennas, pt.rho_r, pt.mu_b_db, _fmt(pt.mu_e_db),
                                    pt.regime, pt.sweep_value, alloc, evaluator, mode, *fp_extra)
        sweep_value = None if mode == "optimized" and self.sc.sweep_variable == "alpha" else pt.sweep_value
        return ResultRow(fp, self.sc.sweep_variable, sweep_value, pt.n_antennas, pt.rho_r, pt.mu_b_db, pt.mu_e_db,
                         _regime(pt), alloc, evaluator, mode, alpha, float(outage), float(se), int(trials),
                         alpha_star, bool(infeasible))

    # conditioned ---------------------------------------------------------

    def fixed_alpha_rows(self, pt):
        b = self.basis(pt)
        a = pt.sweep_value
        scen = secrecy_template(self.sc, pt, b.corr, b.h, a)
        infeasible = scen.threshold() <= 0
        rows = []
        for name in self.sc.allocations:
            for ev in self.sc.evaluators:
                if ev == "analytic":
                    if name != "cpa":
                        continue
                    p = analytics.cpa_outage(scen, b, self.ctrl, method=self.fixed_method)
                    rows.append(self.row(pt, name, ev, "fixed", a, p, 0.0, 0, None, infeasible))
                    continue
                smp = self.sample(pt)
                if name == "opa":
                    if infeasible:
                        res = montecarlo.OutageResult(1.0, 0.0, smp.trials, "", allocation="opa")
                    else:
                        _, res = allocation.opa_search(b, scen, self.mc, sample=smp)
                else:
                    res = smp.result(scen, self.alloc(name, b))
                rows.append(self.row(pt, name, ev, "fixed", a, res.estimate, res.standard_error, res.trials,
                                     None, infeasible))
        return rows

    def optimized_rows(self, pt):
        b = self.basis(pt)
        scen = secrecy_template(self.sc, pt, b.corr, b.h)
        rows = []
        for name in self.sc.allocations:
            for ev in self.sc.evaluators:
                if ev == "analytic" and name != "cpa":
                    continue
                target = self.alloc(name, b) or name
                kw = {"sample": self.sample(pt)} if ev == "mc" else {}
                a_star, res = optimizer.optimize_alpha(scen, b, target, ev, self.search, ctrl=self.ctrl,
                                                      method=self.sc.method, **kw)
                rows.append(self.row(pt, name, ev, "optimized", a_star, res.estimate, res.standard_error,
                                     res.trials, a_star, res.infeasible))
        return rows

    # averaged ------------------------------------------------------------

    def averaged_rows(self, pt):
        corr = correlation_for(self.sc, pt.n_antennas, pt.rho_r)
        tmpl = secrecy_template(self.sc, pt, corr)
        mc = montecarlo.MonteCarloConfig(self.sc.trials, self.sc.h_realizations, self.sc.seed, self.sc.workers)
        rows = []
        for name in self.sc.allocations:
            res = montecarlo.estimate_average_outage(tmpl, mc, name, search=self.search, regime=_regime(pt),
                                                     min_realizations=1, ctrl=self.ctrl, method=self.sc.method)
            rows.append(self.row(pt, name, res.evaluator, "averaged", None, res.estimate, res.standard_error,
                                 res.trials, None, False))
        return rows


def run_scenario(source, out_dir=None, *, plot: bool = True, **overrides) -> ResultTable:
    """Run a scenario file (path, bundled name, or parsed :class:`ScenarioFile`).

    Keyword overrides replace fields of the parsed scenario (``seed``,
    ``workers``, ``allocations``, ``regimes``, ...).  With ``out_dir`` the
    CSV, a ``.meta.json`` sidecar and, with ``plot``, an SVG are written.
    """
    sc = source if isinstance(source, ScenarioFile) else load_scenario(source)
    sc = sc.with_overrides(**overrides) if overrides else sc
    t0 = time.perf_counter()
    runner = _Runner(sc)
    rows: List[ResultRow] = []
    pts = sc.points()
    for pt in pts:
        if sc.kind == "averaged":
            rows.extend(runner.averaged_rows(pt))
        elif sc.sweep_variable == "alpha":
            rows.extend(runner.fixed_alpha_rows(pt))
        else:
            rows.extend(runner.optimized_rows(pt))
    if sc.kind == "conditioned" and sc.sweep_variable == "alpha" and sc.optimize_alpha:
        done = set()
        for pt in pts:
            key = (pt.n_antennas, pt.rho_r, pt.mu_b_db, pt.mu_e_db, pt.regime)
            if key not in done:
                done.add(key)
                rows.extend(runner.optimized_rows(pt))
    meta = {
        "scenario": sc.name,
        "scenario_hash": runner.scenario_hash,
        "seed": sc.seed,
        "workers": sc.workers,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_time_s": round(time.perf_counter() - t0, 3),
        "rows": len(rows),
    }
    table = ResultTable(rows, meta)
    checks = evaluate_checks(sc, table)
    if checks:
        meta["checks"] = checks
    if out_dir is not None:
        path = table.write(out_dir, sc.name)
        meta["csv"] = str(path)
        if plot and rows:
            from .plotting import emit_plot

            meta["plot"] = str(emit_plot(table, Path(out_dir) / f"{sc.name}.svg", title=sc.description or sc.name))
        table.write(out_dir, sc.name)
    return table


def evaluate_checks(sc: ScenarioFile, table: ResultTable) -> Dict:
    """Scenario-declared sanity checks on the produced rows."""
    out = {}
    cfg = sc.checks.get("exact_to_asymptotic")
    if cfg:
        above = float(cfg.get("above_dB", 20.0))
        tol = float(cfg.get("tol", 0.01))
        worst = 0.0
        by_key = {}
        for r in table.rows:
            by_key[(r.N_t, r.rho_r, r.mu_B_dB, r.mu_E_dB, r.allocation, r.evaluator, r.regime)] = r.outage
        for (n, rho, mub, mue, al, ev, reg), p in by_key.items():
            if reg == "exact" and mue >= above:
                q = by_key.get((n, rho, mub, mue, al, ev, "asymptotic"))
                if q is not None:
                    worst = max(worst, abs(p - q))
        out["exact_to_asymptotic"] = {"above_dB": above, "tol": tol, "max_abs_diff": worst, "passed": worst < tol}
    return out
