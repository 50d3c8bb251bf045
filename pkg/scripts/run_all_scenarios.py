"""Run every shipped scenario and print a one-line verdict for each.

    python3 scripts/run_all_scenarios.py [--out DIR] [--format both]
"""
import argparse
import sys
from pathlib import Path

from relqrf.runner import FORMATS, emit, run
from relqrf.scenario import load_scenario

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(ROOT / "results"))
    ap.add_argument("--format", choices=FORMATS, default="both")
    args = ap.parse_args()
    failed = 0
    for path in sorted((ROOT / "scenarios").glob("*.yaml")):
        bundle = run(load_scenario(path))
        emit(bundle, args.format, args.out)
        worst = max(bundle.checks, key=lambda c: c.residual / c.tolerance if c.tolerance else c.residual)
        status = "ok  " if bundle.passed else "FAIL"
        print(f"{status} {path.name:<34} {len(bundle.checks):>2} checks  "
              f"tightest {worst.name} ({worst.residual:.1e} / {worst.tolerance:.0e})  {bundle.runtime_s:.2f} s")
        failed += not bundle.passed
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
