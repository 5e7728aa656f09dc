"""Scenario files: TOML documents describing one figure-style sweep.

A scenario has a sweep axis, optional series axes (any list-valued system
or correlation field), the allocations and evaluators to compare, and the
Monte Carlo budget.  Values are validated here, dB fields are converted to
linear ratios once, and errors point at the offending line.
"""
from __future__ import annotations

import copy
import hashlib
import itertools
import json
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

import numpy as np

from ..errors import ScenarioError

SWEEP_VARIABLES = ("alpha", "mu_E_dB", "rho_r", "mu_B_dB", "N_t")
SERIES_FIELDS = ("rho_r", "mu_E_dB", "mu_B_dB", "N_t")
ALLOCATIONS = ("cpa", "upa", "opa", "custom")
EVALUATORS = ("analytic", "mc")
REGIMES = ("auto", "asymptotic", "exact")
KINDS = ("conditioned", "averaged")
SCENARIO_DIR = Path(__file__).with_name("scenarios")


def _locate(text: str, section: Optional[str], key: str) -> Optional[int]:
    current = None
    sec_re = re.compile(r"^\s*\[([^\]]+)\]\s*(#.*)?$")
    key_re = re.compile(r"^\s*" + re.escape(key) + r"\s*=") if key else None
    for i, line in enumerate(text.splitlines(), start=1):
        m = sec_re.match(line)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return i
            continue
        if key_re is not None and current == section and key_re.match(line):
            return i
    return None


@dataclass(frozen=True)
class SeriesPoint:
    """One fully specified parameter set: series values plus the sweep value."""

    n_antennas: int
    rho_r: Optional[float]
    mu_b_db: float
    mu_e_db: float
    regime: str
    sweep_value: float


@dataclass
class ScenarioFile:
    name: str
    description: str
    kind: str
    sweep_variable: str
    sweep_values: Tuple[float, ...]
    system: Dict[str, Any]
    correlation: Dict[str, Any]
    h_s: Optional[np.ndarray]
    allocations: Tuple[str, ...]
    evaluators: Tuple[str, ...]
    regimes: Tuple[str, ...]
    phi: Optional[Tuple[float, ...]]
    trials: int
    h_realizations: int
    seed: int
    workers: int
    grid: int
    refine: int
    optimize_alpha: bool
    truncation: int
    adaptive: bool = False
    method: str = "stable"
    checks: Dict[str, Any] = field(default_factory=dict)
    path: Optional[str] = None

    # ------------------------------------------------------------ derived

    def series_axes(self) -> Dict[str, List]:
        axes = {}
        for key in SERIES_FIELDS:
            src = self.correlation if key == "rho_r" else self.system
            if key in src and isinstance(src[key], list):
                axes[key] = list(src[key])
        return axes

    def _scalar(self, key):
        src = self.correlation if key == "rho_r" else self.system
        v = src.get(key)
        return None if isinstance(v, list) else v

    def points(self) -> List[SeriesPoint]:
        """Every (series combination, regime, sweep value), series-major."""
        axes = self.series_axes()
        names = list(axes)
        out = []
        for combo in itertools.product(*(axes[n] for n in names)):
            vals = {k: self._scalar(k) for k in SERIES_FIELDS}
            vals.update(dict(zip(names, combo)))
            for regime in self.regimes:
                for x in self.sweep_values:
                    v = dict(vals)
                    if self.sweep_variable != "alpha":
                        v[self.sweep_variable] = x
                    out.append(SeriesPoint(int(v["N_t"]), None if v["rho_r"] is None else float(v["rho_r"]),
                                           float(v["mu_B_dB"]), float(v["mu_E_dB"]), regime, float(x)))
        return out

    def canonical(self) -> Dict[str, Any]:
        """Semantically relevant content; the hash ignores formatting and worker count."""
        d = {
            "name": self.name, "kind": self.kind,
            "sweep": [self.sweep_variable, [repr(float(x)) for x in self.sweep_values]],
            "system": {k: _canon(v) for k, v in sorted(self.system.items())},
            "correlation": {k: _canon(v) for k, v in sorted(self.correlation.items())},
            "h_s": None if self.h_s is None else [[repr(float(z.real)), repr(float(z.imag))] for z in self.h_s],
            "allocations": list(self.allocations), "evaluators": list(self.evaluators),
            "regimes": list(self.regimes), "phi": None if self.phi is None else [repr(p) for p in self.phi],
            "mc": [self.trials, self.h_realizations, self.seed],
            "search": [self.grid, self.refine, self.optimize_alpha], "truncation": [self.truncation, self.adaptive, self.method],
            "checks": {k: _canon(v) for k, v in sorted(self.checks.items())},
        }
        return d

    def scenario_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_overrides(self, **kw) -> "ScenarioFile":
        new = copy.deepcopy(self)
        for k, v in kw.items():
            if v is None:
                continue
            if not hasattr(new, k):
                raise ScenarioError(f"unknown override {k!r}", path=self.path)
            setattr(new, k, v)
        _validate_semantics(new, None)
        return new


def _canon(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return [_canon(x) for x in v]
    return v


# ------------------------------------------------------------------ parsing


def _err(msg, text, path, section=None, key=None):
    line = _locate(text, section, key) if text is not None else None
    return ScenarioError(msg, line=line, path=path)


def _db_field(value, *, allow_inf: bool, what: str):
    if isinstance(value, str):
        if allow_inf and value.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        raise ValueError(f"{what} must be a number" + (" or \"inf\"" if allow_inf else ""))
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{what} must be a number")
    if not math.isfinite(value):
        if allow_inf and value > 0:
            return math.inf
        raise ValueError(f"{what} must be finite")
    return float(value)


def _sweep_values(sweep: dict) -> Tuple[float, ...]:
    if "values" in sweep:
        vals = sweep["values"]
        if not isinstance(vals, list):
            raise ValueError("sweep.values must be a list")
        return tuple(float(v) for v in vals)
    try:
        start, stop, step = float(sweep["start"]), float(sweep["stop"]), float(sweep["step"])
    except KeyError as exc:
        raise ValueError(f"sweep needs 'values' or start/stop/step (missing {exc.args[0]})") from None
    if not step > 0:
        raise ValueError("sweep.step must be positive")
    if stop < start:
        return ()
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 12) for i in range(n))


def parse_scenario(text: str, path: Optional[str] = None) -> ScenarioFile:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        if line is None:
            m = re.search(r"line (\d+)", str(exc))
            line = int(m.group(1)) if m else None
        raise ScenarioError(f"TOML syntax error: {exc}", line=line, path=path) from None

    def need(section, key, conv, *, default=..., table=None):
        tbl = doc if section is None else doc.get(section, {})
        if key not in tbl:
            if default is ...:
                raise _err(f"missing required field {key!r}" + (f" in [{section}]" if section else ""),
                           text, path, section, None)
            return default
        try:
            return conv(tbl[key])
        except (TypeError, ValueError) as exc:
            raise _err(f"{section + '.' if section else ''}{key}: {exc}", text, path, section, key) from None

    def as_str_list(choices):
        def conv(v):
            items = [v] if isinstance(v, str) else v
            if not isinstance(items, list) or not items:
                raise ValueError("must be a nonempty list")
            for it in items:
                if it not in choices:
                    raise ValueError(f"{it!r} is not one of {', '.join(choices)}")
            return tuple(items)
        return conv

    def choice(choices):
        def conv(v):
            if v not in choices:
                raise ValueError(f"{v!r} is not one of {', '.join(choices)}")
            return v
        return conv

    def pos_int(v):
        if isinstance(v, bool) or int(v) != v or v < 1:
            raise ValueError("must be a positive integer")
        return int(v)

    def flag(v):
        if not isinstance(v, bool):
            raise ValueError("must be true or false")
        return v

    def nonneg_int(v):
        if isinstance(v, bool) or int(v) != v or v < 0:
            raise ValueError("must be a nonnegative integer")
        return int(v)

    name = need(None, "name", str)
    description = need(None, "description", str, default="")
    kind = need(None, "kind", choice(KINDS), default="conditioned")

    sweep_var = need("sweep", "variable", choice(SWEEP_VARIABLES))
    try:
        sweep_vals = _sweep_values(doc.get("sweep", {}))
    except (TypeError, ValueError) as exc:
        raise _err(f"sweep: {exc}", text, path, "sweep", "values" if "values" in doc.get("sweep", {}) else "start") from None
    if not sweep_vals:
        raise _err("sweep range is empty", text, path, "sweep",
                   "values" if "values" in doc.get("sweep", {}) else "stop")

    sys_tbl = doc.get("system", {})
    system: Dict[str, Any] = {}
    for key, allow_inf in (("mu_B_dB", False), ("mu_E_dB", True)):
        if key not in sys_tbl:
            if sweep_var == key:
                system[key] = None
                continue
            raise _err(f"missing required field {key!r} in [system]", text, path, "system", None)
        raw = sys_tbl[key]
        try:
            if isinstance(raw, list):
                if not raw:
                    raise ValueError("series list is empty")
                for v in raw:
                    _db_field(v, allow_inf=allow_inf, what=key)
                system[key] = [("inf" if isinstance(v, str) else float(v)) for v in raw]
            else:
                _db_field(raw, allow_inf=allow_inf, what=key)
                system[key] = "inf" if isinstance(raw, str) else float(raw)
        except ValueError as exc:
            raise _err(f"system.{key}: {exc}", text, path, "system", key) from None
    system["R_s"] = need("system", "R_s", float)
    if not system["R_s"] > 0:
        raise _err("system.R_s must be positive", text, path, "system", "R_s")
    if "N_t" in sys_tbl:
        raw = sys_tbl["N_t"]
        try:
            system["N_t"] = [pos_int(v) for v in raw] if isinstance(raw, list) else pos_int(raw)
        except (TypeError, ValueError) as exc:
            raise _err(f"system.N_t: {exc}", text, path, "system", "N_t") from None
    elif sweep_var == "N_t":
        system["N_t"] = None
    else:
        raise _err("missing required field 'N_t' in [system]", text, path, "system", None)

    corr_tbl = doc.get("correlation", {})
    model = need("correlation", "model", choice(("exponential", "spectrum", "explicit")))
    correlation: Dict[str, Any] = {"model": model}
    if model == "exponential":
        correlation["L"] = need("correlation", "L", float)
        if "rho_r" in corr_tbl:
            raw = corr_tbl["rho_r"]
            try:
                correlation["rho_r"] = [float(v) for v in raw] if isinstance(raw, list) else float(raw)
            except (TypeError, ValueError) as exc:
                raise _err(f"correlation.rho_r: {exc}", text, path, "correlation", "rho_r") from None
        elif sweep_var == "rho_r":
            correlation["rho_r"] = None
        else:
            raise _err("missing required field 'rho_r' in [correlation]", text, path, "correlation", None)
    elif model == "spectrum":
        correlation["lambda"] = need("correlation", "lambda", lambda v: [float(x) for x in v])
        correlation["rho_r"] = None
    else:
        def rows(v):
            return [[complex(*e) if isinstance(e, list) else complex(e) for e in row] for row in v]
        correlation["rows"] = need("correlation", "rows", rows)
        correlation["rho_r"] = None

    h_s = None
    if "channel" in doc and "h_s" in doc["channel"]:
        def conv(v):
            out = []
            for e in v:
                if not (isinstance(e, list) and len(e) == 2):
                    raise ValueError("entries must be [re, im] pairs")
                out.append(complex(float(e[0]), float(e[1])))
            return np.array(out)
        h_s = need("channel", "h_s", conv)

    allocations = need("compare", "allocations", as_str_list(ALLOCATIONS), default=("cpa",))
    evaluators = need("compare", "evaluators", as_str_list(EVALUATORS), default=("analytic",))
    regimes = need("compare", "regimes", as_str_list(REGIMES), default=("auto",))
    phi = need("compare", "phi", lambda v: tuple(float(x) for x in v), default=None)

    trials = need("montecarlo", "trials", pos_int, default=100_000)
    h_real = need("montecarlo", "h_realizations", pos_int, default=1)
    seed = need("montecarlo", "seed", nonneg_int, default=0)
    workers = need("montecarlo", "workers", pos_int, default=1)
    grid = need("search", "grid", pos_int, default=400)
    refine = need("search", "refine", nonneg_int, default=2)
    optimize = need("search", "optimize_alpha", flag, default=sweep_var != "alpha")
    truncation = need("series", "truncation", pos_int, default=15)
    adaptive = need("series", "adaptive", flag, default=False)
    method = need("series", "method", choice(("stable", "series", "quadrature")), default="stable")
    checks = dict(doc.get("checks", {}))

    sc = ScenarioFile(name, description, kind, sweep_var, sweep_vals, system, correlation, h_s,
                      allocations, evaluators, regimes, phi, trials, h_real, seed, workers, grid, refine,
                      optimize, truncation, adaptive, method, checks, path)
    _validate_semantics(sc, text)
    return sc


def _validate_semantics(sc: ScenarioFile, text: Optional[str]):
    path = sc.path

    def fail(msg, section=None, key=None):
        raise _err(msg, text, path, section, key)

    if sc.sweep_variable == "alpha":
        if any(not 0.0 < a <= 1.0 for a in sc.sweep_values):
            fail("alpha sweep values must lie in (0, 1]", "sweep", "values" if text and "values =" in text else "start")
    if sc.sweep_variable == "rho_r":
        if sc.correlation["model"] != "exponential":
            fail("a rho_r sweep needs the exponential correlation model", "correlation", "model")
        if any(not 0.0 <= r <= 1.0 for r in sc.sweep_values):
            fail("rho_r sweep values must lie in [0, 1]", "sweep", "stop")
    if sc.sweep_variable == "N_t" and any(int(v) != v or v < 2 for v in sc.sweep_values):
        fail("N_t sweep values must be integers >= 2", "sweep", "values")
    if sc.sweep_variable == "mu_B_dB" and any(not math.isfinite(v) for v in sc.sweep_values):
        fail("mu_B_dB must be finite", "sweep", "values")
    if sc.sweep_variable in sc.series_axes():
        fail(f"{sc.sweep_variable} cannot be both the sweep variable and a series axis", "sweep", "variable")

    n_vals = sc.system["N_t"] if isinstance(sc.system["N_t"], list) else [sc.system["N_t"]]
    if sc.sweep_variable == "N_t":
        n_vals = [int(v) for v in sc.sweep_values]
    if sc.correlation["model"] == "spectrum":
        if any(n != len(sc.correlation["lambda"]) for n in n_vals):
            fail("correlation.lambda length must equal N_t", "correlation", "lambda")
    if sc.correlation["model"] == "explicit":
        if any(n != len(sc.correlation["rows"]) for n in n_vals):
            fail("correlation.rows must be N_t x N_t", "correlation", "rows")
    if sc.kind == "conditioned":
        if sc.h_s is None:
            fail("conditioned scenarios need channel.h_s", "channel", None)
        if any(n != sc.h_s.size for n in n_vals):
            fail(f"channel.h_s has {sc.h_s.size} entries but N_t = {n_vals[0]}", "channel", "h_s")
        if sc.h_realizations != 1:
            fail("conditioned scenarios use a single main channel (h_realizations = 1)", "montecarlo", "h_realizations")
    else:
        if sc.sweep_variable == "alpha":
            fail("averaged scenarios optimize alpha per channel; sweep another variable", "sweep", "variable")
        if "opa" in sc.allocations or "custom" in sc.allocations:
            fail("averaged scenarios support cpa and upa only", "compare", "allocations")
    if "custom" in sc.allocations:
        if sc.phi is None:
            fail("custom allocation needs compare.phi", "compare", "allocations")
        if any(len(sc.phi) != n - 1 for n in n_vals):
            fail("compare.phi must have N_t - 1 entries", "compare", "phi")
    if "mc" in sc.evaluators and sc.trials < 1000:
        fail("montecarlo.trials must be at least 1000", "montecarlo", "trials")
    if "opa" in sc.allocations and sc.trials < 10_000:
        fail("OPA needs montecarlo.trials >= 10000", "montecarlo", "trials")
    rhos = sc.correlation.get("rho_r")
    for r in (rhos if isinstance(rhos, list) else [rhos]):
        if r is not None and not 0.0 <= r <= 1.0:
            fail("rho_r must lie in [0, 1]", "correlation", "rho_r")
    mu_e = sc.system["mu_E_dB"]
    for v in (mu_e if isinstance(mu_e, list) else [mu_e]):
        if v == "inf" and "exact" in sc.regimes:
            fail("the exact regime needs a finite mu_E_dB", "compare", "regimes")


def load_scenario(path) -> ScenarioFile:
    p = resolve_scenario_path(path)
    return parse_scenario(p.read_text(encoding="utf-8"), str(p))


def resolve_scenario_path(path) -> Path:
    """A file path, or the name of a bundled scenario (``fig2`` or ``fig2.toml``)."""
    p = Path(path)
    if p.is_file():
        return p
    stem = p.name[:-5] if p.name.endswith(".toml") else p.name
    bundled = SCENARIO_DIR / f"{stem}.toml"
    if bundled.is_file():
        return bundled
    raise ScenarioError(f"no such scenario file or bundled figure: {path}", path=str(path))


def bundled_scenarios() -> List[Path]:
    return sorted(SCENARIO_DIR.glob("*.toml"))
