import csv
import subprocess
import sys

import pytest

from anlab.cli import build_parser, main

from test_experiments import SMALL


@pytest.fixture
def scenario_file(tmp_path):
    p = tmp_path / "small.toml"
    p.write_text(SMALL, encoding="utf-8")
    return p


def _csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_run_writes_csv(scenario_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", str(scenario_file), "--out", str(out), "--no-plot", "--trials", "2000"]) == 0
    rows = _csv(out / "small.csv")
    assert len(rows) == 18 and {r["trials"] for r in rows if r["evaluator"] == "mc"} == {"2000"}
    assert not (out / "small.svg").exists()
    assert "18 rows" in capsys.readouterr().out


def test_run_with_plot(scenario_file, tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(scenario_file), "--out", str(out), "--alloc", "cpa"]) == 0
    assert (out / "small.svg").is_file()
    assert {r["allocation"] for r in _csv(out / "small.csv")} == {"cpa"}


def test_seed_precedence(scenario_file, tmp_path, monkeypatch):
    def run(tag, *extra):
        out = tmp_path / tag
        assert main(["run", str(scenario_file), "--out", str(out), "--no-plot", *extra]) == 0
        return [r["outage"] for r in _csv(out / "small.csv") if r["evaluator"] == "mc"]

    base = run("base")
    monkeypatch.setenv("ANLAB_SEED", "99")
    env = run("env")
    assert env != base
    assert run("flag", "--seed", "99") == env
    assert run("flag7", "--seed", "7") == base


def test_workers_do_not_change_output(scenario_file, tmp_path):
    for w in ("1", "3"):
        assert main(["run", str(scenario_file), "--out", str(tmp_path / w), "--no-plot", "--workers", w]) == 0
    assert (tmp_path / "1/small.csv").read_bytes() == (tmp_path / "3/small.csv").read_bytes()


def test_missing_scenario_exit_code(tmp_path, capsys):
    assert main(["run", str(tmp_path / "absent.toml"), "--out", str(tmp_path)]) == 2
    assert "anlab: error" in capsys.readouterr().err


def test_invalid_scenario_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text(SMALL.replace("rho_r = 0.5", "rho_r = 2.0"), encoding="utf-8")
    assert main(["run", str(p), "--out", str(tmp_path)]) == 2
    assert "bad.toml" in capsys.readouterr().err


def test_budget_error_exit_code(scenario_file, tmp_path):
    assert main(["run", str(scenario_file), "--out", str(tmp_path), "--trials", "10"]) == 2


def test_failed_check_exit_code(tmp_path):
    text = SMALL.replace('mu_E_dB = ["inf", 5.0]', "mu_E_dB = 5.0")
    text = text.replace('evaluators = ["analytic", "mc"]', 'evaluators = ["analytic"]\nregimes = ["asymptotic", "exact"]')
    text += "\n[checks.exact_to_asymptotic]\nabove_dB = 0.0\ntol = 1e-9\n"
    p = tmp_path / "chk.toml"
    p.write_text(text, encoding="utf-8")
    assert main(["run", str(p), "--out", str(tmp_path), "--no-plot"]) == 3


def test_list_figures(capsys):
    assert main(["list-figures"]) == 0
    out = capsys.readouterr().out
    for name in ("fig2", "fig3", "fig4a", "fig4b", "fig5", "fig6"):
        assert name in out


def test_phi_argument():
    args = build_parser().parse_args(["run", "x", "--alloc", "custom", "--phi", "2,0.5,0.5"])
    assert args.phi == (2.0, 0.5, 0.5)
    with pytest.raises(SystemExit):
        build_parser().parse_args(["run", "x", "--phi", "a,b"])


def test_verify_only(capsys):
    assert main(["verify", "--quick", "--only", "3"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and out.count("\n") >= 1


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "anlab", "list-figures"], capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "fig2" in res.stdout
