"""Command line entry point: ``wfltd {sweep,contour,summarize,selftest}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..core import LowerBound, UpperBound
from .config import load_configs, pendulum_configs, parse_seeds
from .contour import DEFAULT_LAMBDAS, emit_contours
from .curves import aggregate
from .selftest import run_selftest
from .summarize import format_table, summarize, write_metrics_csv
from .svg import learning_curves_svg
from .sweep import load_sweep, run_sweep


def _configs(args):
    configs = load_configs(args.config) if args.config else pendulum_configs()
    kw = {}
    if args.seeds:
        kw["seeds"] = tuple(parse_seeds(args.seeds))
    if args.episodes:
        kw["episodes"] = args.episodes
    return [c.with_overrides(**kw) for c in configs] if kw else configs


def cmd_sweep(args) -> int:
    configs = _configs(args)
    manifest = run_sweep(configs, args.out, jobs=args.jobs, resume=args.resume)
    curves = load_sweep(args.out)
    if curves:
        aggs = {name: aggregate(cs) for name, cs in curves.items() if cs}
        (Path(args.out) / "comparison.svg").write_text(learning_curves_svg(aggs, "all configs"))
    failed = [(n, s) for n, e in manifest["configs"].items() for s, i in e["seeds"].items()
              if i["status"] != "ok"]
    for name, seed in failed:
        print(f"failed: {name} seed {seed}", file=sys.stderr)
    return 1 if failed else 0


def cmd_contour(args) -> int:
    bound = UpperBound(args.bound_value) if args.bound == "upper" else LowerBound(args.bound_value)
    lambdas = [float(x) for x in args.lambdas.split(",")]
    for path in emit_contours(args.out, lambdas, bound, args.resolution, args.lo, args.hi):
        print(path)
    return 0


def cmd_summarize(args) -> int:
    curves = load_sweep(args.out)
    rows = summarize(curves, window=args.window, threshold=args.threshold)
    write_metrics_csv(Path(args.out) / "metrics.csv", rows)
    sys.stdout.write(format_table(rows))
    return 0


def cmd_selftest(args) -> int:
    return 0 if run_selftest() else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wfltd", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", help="train every configuration over its seeds")
    s.add_argument("--config", help="INI file, one section per configuration (default: built-in pendulum sweep)")
    s.add_argument("--seeds", help="override seeds, e.g. 0-9 or 1,4,7")
    s.add_argument("--episodes", type=int, help="override episode count")
    s.add_argument("--out", default="runs", help="output directory")
    s.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    s.add_argument("--resume", action="store_true", help="keep finished seed files with a matching config hash")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("contour", help="write update-weight fields over a (V, Q) grid")
    c.add_argument("--lambdas", default=",".join(str(x) for x in DEFAULT_LAMBDAS))
    c.add_argument("--bound", choices=("upper", "lower"), default="upper")
    c.add_argument("--bound-value", type=float, default=None,
                   help="bound location (default: 1 for upper, -1 for lower)")
    c.add_argument("--resolution", type=int, default=200)
    c.add_argument("--lo", type=float, default=-1.0)
    c.add_argument("--hi", type=float, default=1.0)
    c.add_argument("--out", default="contours")
    c.set_defaults(func=cmd_contour)

    m = sub.add_parser("summarize", help="metrics table for a finished sweep")
    m.add_argument("--out", default="runs", help="sweep output directory")
    m.add_argument("--window", type=int, default=20)
    m.add_argument("--threshold", type=float, default=1.2, help="r_plus threshold for episodes-to-threshold")
    m.set_defaults(func=cmd_summarize)

    t = sub.add_parser("selftest", help="run the built-in oracle checks")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "contour" and args.bound_value is None:
        args.bound_value = 1.0 if args.bound == "upper" else -1.0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
