import math

import numpy as np
import pytest

from anlab.errors import ScenarioError
from anlab.experiments import (ResultRow, ResultTable, bundled_scenarios, emit_plot, load_scenario, parse_scenario,
                               resolve_scenario_path, run_scenario)
from anlab.experiments.runner import evaluate_checks

SMALL = """\
name = "small"
kind = "conditioned"

[system]
N_t = 3
R_s = 1.0
mu_B_dB = 10.0
mu_E_dB = ["inf", 5.0]

[correlation]
model = "exponential"
L = 0.5
rho_r = 0.5

[channel]
h_s = [[0.8, 0.3], [-0.4, 0.9], [0.2, -0.5]]

[sweep]
variable = "alpha"
start = 0.5
stop = 0.9
step = 0.2

[compare]
allocations = ["cpa", "upa"]
evaluators = ["analytic", "mc"]

[montecarlo]
trials = 5000
seed = 7
"""


def _line_of(text, needle):
    return next(i for i, ln in enumerate(text.splitlines(), 1) if needle in ln)


def _with(text, old, new):
    assert old in text
    return text.replace(old, new)


def test_parse_small():
    sc = parse_scenario(SMALL)
    assert sc.sweep_values == pytest.approx((0.5, 0.7, 0.9))
    assert sc.system["mu_E_dB"] == ["inf", 5.0]
    assert len(sc.points()) == 2 * 3
    assert not sc.adaptive and sc.method == "stable"


def test_syntax_error_has_line():
    with pytest.raises(ScenarioError) as info:
        parse_scenario(_with(SMALL, "R_s = 1.0", "R_s = = 1.0"))
    assert info.value.line == _line_of(SMALL, "R_s")


def test_bad_value_points_at_key():
    with pytest.raises(ScenarioError) as info:
        parse_scenario(_with(SMALL, "rho_r = 0.5", "rho_r = 1.5"))
    assert info.value.line == _line_of(SMALL, "rho_r")
    assert str(info.value.line) in str(info.value)


def test_empty_sweep_rejected():
    with pytest.raises(ScenarioError, match="empty"):
        parse_scenario(_with(SMALL, "stop = 0.9", "stop = 0.1"))


def test_inf_only_for_eve():
    with pytest.raises(ScenarioError) as info:
        parse_scenario(_with(SMALL, "mu_B_dB = 10.0", 'mu_B_dB = "inf"'))
    assert info.value.line == _line_of(SMALL, "mu_B_dB")


def test_exact_regime_needs_finite_eve_snr():
    text = _with(SMALL, "evaluators", 'regimes = ["exact"]\nevaluators')
    with pytest.raises(ScenarioError, match="finite"):
        parse_scenario(text)


def test_adaptive_flag_parses_and_rejects_non_bool():
    sc = parse_scenario(SMALL + "\n[series]\nadaptive = true\nmethod = \"quadrature\"\n")
    assert sc.adaptive and sc.method == "quadrature"
    with pytest.raises(ScenarioError, match="true or false"):
        parse_scenario(SMALL + "\n[series]\nadaptive = 1\n")
    with pytest.raises(ScenarioError):
        parse_scenario(SMALL + "\n[series]\nmethod = \"guess\"\n")


def test_hash_ignores_formatting_and_workers():
    base = parse_scenario(SMALL).scenario_hash()
    noisy = "# leading comment\n" + SMALL.replace("N_t = 3", "N_t   =   3   # antennas")
    assert parse_scenario(noisy).scenario_hash() == base
    assert parse_scenario(SMALL.replace("seed = 7", "seed = 7\nworkers = 4")).scenario_hash() == base


@pytest.mark.parametrize("old,new", [("seed = 7", "seed = 8"), ("trials = 5000", "trials = 6000"),
                                     ("L = 0.5", "L = 0.25"), ("step = 0.2", "step = 0.1")])
def test_hash_tracks_semantic_fields(old, new):
    assert parse_scenario(_with(SMALL, old, new)).scenario_hash() != parse_scenario(SMALL).scenario_hash()


def test_hash_tracks_series_settings():
    base = parse_scenario(SMALL).scenario_hash()
    assert parse_scenario(SMALL + "\n[series]\nadaptive = true\n").scenario_hash() != base


def test_bundled_scenarios_parse():
    names = {p.stem for p in bundled_scenarios()}
    assert {"fig2", "fig3", "fig4a", "fig4b", "fig5", "fig6"} <= names
    for p in bundled_scenarios():
        load_scenario(p)
    assert resolve_scenario_path("fig2").name == "fig2.toml"
    assert resolve_scenario_path("fig2.toml") == resolve_scenario_path("fig2")
    with pytest.raises(ScenarioError):
        resolve_scenario_path("nope")


def test_overrides_are_validated():
    sc = parse_scenario(SMALL)
    assert sc.with_overrides(seed=3, workers=None).seed == 3
    with pytest.raises(ScenarioError):
        sc.with_overrides(colour="red")
    with pytest.raises(ScenarioError):
        sc.with_overrides(trials=10)


@pytest.fixture(scope="module")
def small_table():
    return run_scenario(parse_scenario(SMALL))


def test_run_rows(small_table):
    rows = small_table.rows
    # 2 regimes x 3 alphas x (cpa analytic, cpa mc, upa mc)
    assert len(rows) == 18
    assert all(0.0 <= r.outage <= 1.0 for r in rows)
    for r in rows:
        if r.evaluator == "mc":
            assert r.trials == 5000 and r.se >= 0
        else:
            assert r.se == 0.0
    cpa = {(r.regime, r.alpha): r.outage for r in rows if r.allocation == "cpa" and r.evaluator == "analytic"}
    mc = {(r.regime, r.alpha, r.allocation): r for r in rows if r.evaluator == "mc"}
    for (regime, a), p in cpa.items():
        m = mc[(regime, a, "cpa")]
        assert abs(m.outage - p) < 4 * max(m.se, 1e-3)


def test_csv_roundtrip(small_table):
    text = small_table.to_csv()
    back = ResultTable.from_csv(text)
    assert back.rows == small_table.rows
    assert back.to_csv() == text


def test_csv_byte_identical_on_rerun(tmp_path, small_table):
    sc = parse_scenario(SMALL)
    p1 = run_scenario(sc, tmp_path / "a", plot=True).meta
    p2 = run_scenario(sc, tmp_path / "b", plot=True, workers=3).meta
    assert (tmp_path / "a/small.csv").read_bytes() == (tmp_path / "b/small.csv").read_bytes()
    assert (tmp_path / "a/small.svg").read_bytes() == (tmp_path / "b/small.svg").read_bytes()
    assert p1["scenario_hash"] == p2["scenario_hash"]
    assert (tmp_path / "a/small.meta.json").is_file()


def test_infeasible_rows_flagged():
    text = _with(SMALL, "R_s = 1.0", "R_s = 12.0")
    text = _with(text, 'variable = "alpha"\nstart = 0.5\nstop = 0.9\nstep = 0.2',
                 'variable = "mu_B_dB"\nvalues = [0.0, 60.0]')
    text = _with(text, 'evaluators = ["analytic", "mc"]', 'evaluators = ["analytic"]')
    text = _with(text, 'allocations = ["cpa", "upa"]', 'allocations = ["cpa"]')
    rows = run_scenario(parse_scenario(text)).rows
    low = [r for r in rows if r.sweep_value == 0.0]
    high = [r for r in rows if r.sweep_value == 60.0]
    assert low and all(r.infeasible and r.outage == 1.0 and r.alpha_star is None for r in low)
    assert high and not any(r.infeasible for r in high)


def _row(**kw):
    base = dict(fingerprint="f", sweep_var="alpha", sweep_value=0.5, N_t=3, rho_r=None, mu_B_dB=10.0,
                mu_E_dB=math.inf, regime="asymptotic", allocation="cpa", evaluator="mc", mode="fixed", alpha=0.5,
                outage=0.1, se=0.0, trials=1000, alpha_star=None, infeasible=False)
    base.update(kw)
    return ResultRow(**base)


def test_plot_single_row_zero_se(tmp_path):
    table = ResultTable([_row()], {})
    p1 = emit_plot(table, tmp_path / "one.svg")
    p2 = emit_plot(table, tmp_path / "two.svg")
    assert p1.read_bytes() == p2.read_bytes()
    assert b"<svg" in p1.read_bytes()


def test_plot_zero_outage_is_floored(tmp_path):
    table = ResultTable([_row(outage=0.0), _row(sweep_value=0.6, alpha=0.6, outage=0.01, se=0.001)], {})
    assert emit_plot(table, tmp_path / "z.svg").stat().st_size > 0


def test_fig2_plot_has_six_series(tmp_path, monkeypatch):
    import matplotlib.pyplot as plt

    sc = load_scenario("fig2").with_overrides(trials=10_000, sweep_values=(0.5, 0.8))
    table = run_scenario(sc)
    captured = {}
    orig = plt.Figure.savefig

    def spy(fig, *a, **k):
        captured["labels"] = fig.axes[0].get_legend_handles_labels()[1]
        return orig(fig, *a, **k)

    monkeypatch.setattr(plt.Figure, "savefig", spy)
    emit_plot(table, tmp_path / "fig2.svg")
    # three allocations in two Eve regimes; CPA's analytic line and MC markers share one entry
    assert len(captured["labels"]) == 6
    assert len(set(captured["labels"])) == 6


def test_checks_evaluated():
    text = _with(SMALL, 'mu_E_dB = ["inf", 5.0]', 'mu_E_dB = 40.0')
    text = _with(text, 'evaluators = ["analytic", "mc"]', 'evaluators = ["analytic"]\nregimes = ["asymptotic", "exact"]')
    text = _with(text, 'allocations = ["cpa", "upa"]', 'allocations = ["cpa"]')
    text += "\n[checks.exact_to_asymptotic]\nabove_dB = 30.0\ntol = 0.01\n"
    sc = parse_scenario(text)
    table = run_scenario(sc)
    chk = table.meta["checks"]["exact_to_asymptotic"]
    assert chk["passed"] and chk["max_abs_diff"] < 0.01
    assert evaluate_checks(sc, table) == table.meta["checks"]
    assert evaluate_checks(parse_scenario(SMALL), table) == {}


def test_points_series_major():
    text = _with(SMALL, "N_t = 3", "N_t = [2, 3]")
    text = _with(text, "h_s = [[0.8, 0.3], [-0.4, 0.9], [0.2, -0.5]]", "")
    with pytest.raises(ScenarioError, match="h_s"):
        parse_scenario(text)


def test_alpha_sweep_bounds():
    with pytest.raises(ScenarioError, match="alpha"):
        parse_scenario(_with(SMALL, "stop = 0.9", "stop = 1.3"))


def test_channel_length_mismatch():
    with pytest.raises(ScenarioError, match="h_s"):
        parse_scenario(_with(SMALL, "N_t = 3", "N_t = 4"))


def test_averaged_rejects_alpha_sweep():
    text = _with(SMALL, 'kind = "conditioned"', 'kind = "averaged"')
    text = _with(text, "h_s = [[0.8, 0.3], [-0.4, 0.9], [0.2, -0.5]]", "")
    text = _with(text, "seed = 7", "seed = 7\nh_realizations = 100")
    with pytest.raises(ScenarioError, match="averaged"):
        parse_scenario(text)


def test_table_write_is_deterministic(tmp_path, small_table):
    a = small_table.write(tmp_path, "x").read_bytes()
    b = ResultTable.from_csv(a.decode()).write(tmp_path / "y", "x").read_bytes()
    assert a == b and a.count(b"\r\n") == len(small_table.rows) + 1
    assert np.isfinite([r.outage for r in small_table.rows]).all()


def test_correlation_panels_shapes():
    # one channel gains from weak correlation before losing, the other only loses
    def curve(name):
        sc = load_scenario(name).with_overrides(allocations=("cpa",), evaluators=("analytic",),
                                                sweep_values=(0.0, 0.05, 0.1, 0.5, 0.9))
        return [r.outage for r in run_scenario(sc).rows]

    a = curve("fig4a")
    assert a[1] < a[0] and a[2] < a[0] and a[0] < a[3] < a[4]
    b = curve("fig4b")
    assert np.all(np.diff(b) > 0)
