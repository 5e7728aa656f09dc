"""Command line entry point: ``anlab run | list-figures | verify``."""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import AnlabError


def _phi(text):
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--phi expects comma-separated reals, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="anlab", description="Secrecy outage experiments for AN-aided transmission "
                                                           "over correlated wiretap channels.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario file or bundled figure")
    r.add_argument("scenario", help="path to a .toml scenario, or a bundled name such as fig2")
    r.add_argument("--out", default="results", help="output directory (default: results)")
    r.add_argument("--seed", type=int, help="master seed; overrides the file and ANLAB_SEED")
    r.add_argument("--workers", type=int, help="worker threads for Monte Carlo chunks")
    r.add_argument("--trials", type=int, help="Eve draws per estimate")
    r.add_argument("--h-realizations", type=int, help="main-channel draws for averaged scenarios")
    r.add_argument("--no-plot", action="store_true", help="skip the SVG")
    r.add_argument("--alloc", choices=("cpa", "upa", "opa", "custom"), action="append",
                   help="allocation(s) to evaluate; repeat to compare several")
    r.add_argument("--phi", type=_phi, help="AN spectrum for --alloc custom")
    r.add_argument("--regime", choices=("auto", "asymptotic", "exact"), action="append",
                   help="noiseless-Eve (asymptotic) or finite mu_E (exact)")
    r.add_argument("--optimize-alpha", action="store_true", help="also report the outage-minimizing alpha")
    r.add_argument("--grid", type=int, help="alpha grid points")
    r.add_argument("--refine", type=int, help="golden-section refinement passes")

    sub.add_parser("list-figures", help="list bundled scenarios")

    v = sub.add_parser("verify", help="run the acceptance checks")
    v.add_argument("--quick", action="store_true", help="reduced budgets with widened tolerances")
    v.add_argument("--only", action="append", help="criterion ids to run, comma separated or repeated")
    return p


def _cmd_run(args) -> int:
    from .experiments import load_scenario, run_scenario

    sc = load_scenario(args.scenario)
    seed = args.seed
    if seed is None and os.environ.get("ANLAB_SEED"):
        seed = int(os.environ["ANLAB_SEED"])
    overrides = dict(seed=seed, workers=args.workers, trials=args.trials, h_realizations=args.h_realizations,
                     grid=args.grid, refine=args.refine, phi=args.phi)
    if args.alloc:
        overrides["allocations"] = tuple(args.alloc)
    if args.regime:
        overrides["regimes"] = tuple(args.regime)
    if args.optimize_alpha:
        overrides["optimize_alpha"] = True
    table = run_scenario(sc, args.out, plot=not args.no_plot, **overrides)
    meta = table.meta
    print(f"{meta['scenario']}: {meta['rows']} rows -> {meta.get('csv')}")
    if "plot" in meta:
        print(f"plot: {meta['plot']}")
    status = 0
    for name, chk in meta.get("checks", {}).items():
        print(f"check {name}: {'PASS' if chk['passed'] else 'FAIL'} ({chk})")
        status = status or (0 if chk["passed"] else 3)
    return status


def _cmd_list() -> int:
    from .experiments import bundled_scenarios, load_scenario

    for path in bundled_scenarios():
        sc = load_scenario(path)
        print(f"{sc.name:7s} {sc.kind:12s} sweep={sc.sweep_variable:8s} {sc.description}")
    return 0


def _cmd_verify(args) -> int:
    from . import acceptance

    only = [c.strip() for item in args.only for c in item.split(",") if c.strip()] if args.only else None
    results = acceptance.run_all(quick=args.quick, only=only)
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-figures":
            return _cmd_list()
        return _cmd_verify(args)
    except AnlabError as exc:
        print(f"anlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
