from .runner import ResultRow, ResultTable, run_scenario
from .scenario import ScenarioFile, bundled_scenarios, load_scenario, parse_scenario, resolve_scenario_path


def emit_plot(table, path, style="semilogy", title=""):
    from .plotting import emit_plot as _emit

    return _emit(table, path, style, title)


__all__ = [
    "ResultRow", "ResultTable", "ScenarioFile", "bundled_scenarios", "emit_plot", "load_scenario",
    "parse_scenario", "resolve_scenario_path", "run_scenario",
]
