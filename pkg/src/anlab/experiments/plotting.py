"""Deterministic SVG rendering of a result table."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_MARKERS = {"cpa": "o", "upa": "s", "opa": "^", "custom": "D"}
_FLOOR = 1e-6


def _label(key, evaluators, varying):
    n, rho, mub, mue, regime, alloc = key
    parts = [alloc.upper(), " + ".join("MC" if e == "mc" else e for e in evaluators)]
    if "regime" in varying:
        parts.append(regime)
    if "rho_r" in varying:
        parts.append(f"rho_r={rho:g}")
    if "N_t" in varying:
        parts.append(f"N_t={n}")
    if "mu_B_dB" in varying:
        parts.append(f"mu_B={mub:g} dB")
    if "mu_E_dB" in varying and regime != "asymptotic":
        parts.append(f"mu_E={mue:g} dB")
    return ", ".join(parts)


def emit_plot(table, path, style: str = "semilogy", title: str = "") -> Path:
    """One SVG per table, one legend entry per (allocation, parameter set).

    Analytic rows are drawn as a line and MC rows as markers with error bars
    in the same colour.

    Rows without a sweep value (optimum summaries of an alpha sweep) are
    left out.  The SVG carries no timestamp and a fixed id salt, so equal
    tables give byte-identical files.
    """
    path = Path(path)
    rows = [r for r in table.rows if r.sweep_value is not None]
    if not rows:
        rows = list(table.rows)
    sweep_var = rows[0].sweep_var if rows else ""
    series = {}
    for r in rows:
        key = (r.N_t, r.rho_r, r.mu_B_dB, r.mu_E_dB, r.regime, r.allocation)
        if sweep_var in ("N_t",):
            key = (None,) + key[1:]
        elif sweep_var == "rho_r":
            key = key[:1] + (None,) + key[2:]
        elif sweep_var == "mu_B_dB":
            key = key[:2] + (None,) + key[3:]
        elif sweep_var == "mu_E_dB":
            key = key[:3] + (None,) + key[4:]
        series.setdefault(key, []).append(r)
    names = ("N_t", "rho_r", "mu_B_dB", "mu_E_dB", "regime")
    varying = {names[i] for i in range(5) if len({k[i] for k in series}) > 1}

    with plt.rc_context({"svg.hashsalt": "anlab", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.5))
        for i, (key, rs) in enumerate(series.items()):
            colour = f"C{i % 10}"
            by_ev = {}
            for r in rs:
                by_ev.setdefault(r.evaluator, []).append(r)
            label = _label(key, sorted(by_ev), varying)
            marker = _MARKERS.get(key[5], "x")
            for ev, pts in sorted(by_ev.items()):
                x = [r.sweep_value if r.sweep_value is not None else (r.alpha or 0.0) for r in pts]
                y = [max(r.outage, _FLOOR) if style == "semilogy" else r.outage for r in pts]
                if ev == "analytic":
                    ax.plot(x, y, "-", color=colour, label=label)
                    label = "_nolegend_"
                    continue
                err = [r.se for r in pts]
                if any(e > 0 for e in err):
                    ax.errorbar(x, y, yerr=err, fmt=marker, color=colour, ms=4, capsize=2, label=label)
                else:
                    ax.plot(x, y, marker, color=colour, ms=4, label=label)
                label = "_nolegend_"
        if style == "semilogy":
            ax.set_yscale("log")
        ax.set_xlabel(sweep_var)
        ax.set_ylabel("secrecy outage probability")
        if title:
            ax.set_title(title, fontsize=9)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=7)
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
