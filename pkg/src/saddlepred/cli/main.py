"""Command line entry point.

Exit codes: 0 clean, 2 config or input error, 3 acceptance failure,
4 run completed but at least one seed collapsed.
"""
from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load, replace
from .csvio import CsvFormatError
from .svg import KINDS, emit_plot

EXIT_OK, EXIT_CONFIG, EXIT_ACCEPT, EXIT_COLLAPSE = 0, 2, 3, 4


def _seeds(text):
    try:
        seeds = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("seed list is empty")
    return seeds


def build_parser():
    p = argparse.ArgumentParser(prog="saddlepred",
                                description="Saddle-point experiments with a prediction step.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment config")
    r.add_argument("config")
    r.add_argument("--seed-override", type=_seeds, metavar="S1,S2,...",
                   help="replace the config's seed list")
    r.add_argument("--out-dir", help="replace the config's output_dir")

    pl = sub.add_parser("plot", help="render a CSV as SVG")
    pl.add_argument("csv")
    pl.add_argument("--kind", choices=KINDS, default="line")
    pl.add_argument("--out", required=True)
    pl.add_argument("--logx", action="store_true")
    pl.add_argument("--logy", action="store_true")

    a = sub.add_parser("accept", help="run the acceptance suite")
    a.add_argument("--only", nargs="+", metavar="NAME", help="criteria to run")
    a.add_argument("--out-dir", default="acceptance_runs")
    return p


def _run(args):
    from .experiments import run_experiment

    try:
        cfg = load(args.config)
        changes = {}
        if args.seed_override:
            changes["seeds"] = args.seed_override
        if args.out_dir:
            changes["output_dir"] = args.out_dir
        if changes:
            cfg = replace(cfg, **changes)
    except OSError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as err:
        print(f"config error: {args.config}: {err}", file=sys.stderr)
        return EXIT_CONFIG
    manifest = run_experiment(cfg)
    for path in manifest.files():
        print(path)
    if manifest.collapsed:
        bad = [(r["method"], r["seed"]) for r in manifest.runs if r["collapsed"]]
        print(f"collapse detected in {bad}", file=sys.stderr)
        return EXIT_COLLAPSE
    return EXIT_OK


def _plot(args):
    try:
        emit_plot(args.csv, args.kind, args.out, logx=args.logx, logy=args.logy)
    except (OSError, CsvFormatError) as err:
        print(f"plot error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    print(args.out)
    return EXIT_OK


def _accept(args):
    from ..acceptance import CRITERIA, all_passed, run_suite

    if args.only:
        unknown = [n for n in args.only if n not in CRITERIA]
        if unknown:
            print(f"unknown criteria {unknown}; available: {', '.join(CRITERIA)}",
                  file=sys.stderr)
            return EXIT_CONFIG
    rows = run_suite(args.only, out_dir=args.out_dir)
    n_fail = sum(not (r.passed and r.in_time) for r in rows)
    print(f"{len(rows) - n_fail}/{len(rows)} checks passed")
    return EXIT_OK if all_passed(rows) else EXIT_ACCEPT


def main(argv=None):
    args = build_parser().parse_args(argv)
    return {"run": _run, "plot": _plot, "accept": _accept}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
