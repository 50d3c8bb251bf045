"""Command line entry point: ``relqrf run <scenario> [--out DIR] [--format ...]``.

Exit status is 0 when every check in the scenario passes, 1 when any check
fails, and 2 for unreadable or invalid scenarios and run errors. The default
output directory comes from ``RELQRF_OUT`` and falls back to ``./results``.
"""
from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .runner import FORMATS, RunError, emit, run
from .scenario import ScenarioError, load_scenario

OUT_ENV = "RELQRF_OUT"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relqrf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"relqrf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario file and write its results")
    r.add_argument("scenario", help="YAML scenario, or an emitted summary JSON to rerun")
    r.add_argument("--out", default=None,
                   help=f"output directory (default: ${OUT_ENV} or ./results)")
    r.add_argument("--format", choices=FORMATS, default="both")
    r.add_argument("--runtime", action="store_true",
                   help="record wall-clock runtime in the summary (breaks byte-identical reruns)")
    r.add_argument("-q", "--quiet", action="store_true", help="only print failures")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out or os.environ.get(OUT_ENV) or "results"
    try:
        scenario = load_scenario(args.scenario)
        bundle = run(scenario)
    except (ScenarioError, RunError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        paths = emit(bundle, args.format, out, include_runtime=args.runtime)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for c in bundle.checks:
        if args.quiet and c.passed:
            continue
        flag = "PASS" if c.passed else "FAIL"
        print(f"{flag}  {c.name:<36} residual={c.residual:.3e}  tol={c.tolerance:.1e}")
    if not args.quiet:
        for p in paths:
            print(f"wrote {p}")
    print(f"{bundle.name}: {'all checks passed' if bundle.passed else 'FAILED'} "
          f"({sum(c.passed for c in bundle.checks)}/{len(bundle.checks)}, {bundle.runtime_s:.2f} s)")
    return 0 if bundle.passed else 1


if __name__ == "__main__":
    sys.exit(main())
