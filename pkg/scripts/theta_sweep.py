"""Fine sweep of the preparation angle at several kick strengths.

Prints p_plus against cos^2(theta) and writes one CSV per kick, showing how
the packet-projector probabilities approach the two-outcome law as the
kicked packets separate.

    python3 scripts/theta_sweep.py --count 25 --kicks 0.5 1 2 5
"""
import argparse
import math
from pathlib import Path

from relqrf.runner import emit, run
from relqrf.scenario import validate_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=25)
    ap.add_argument("--kicks", type=float, nargs="+", default=[0.5, 1.0, 2.0, 5.0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "results" / "sweeps"))
    args = ap.parse_args()
    for kick in args.kicks:
        scenario = validate_scenario({
            "kind": "sterngerlach", "name": f"sweep_kick{kick:g}", "alpha": 1.0, "s_z": 1.0,
            "kick": kick, "theta": {"start": 0, "stop": "pi/2", "count": args.count},
        })
        bundle = run(scenario)
        emit(bundle, "series-csv", args.out)
        rows = bundle.series["theta_sweep"]
        dev = max(abs(p - math.cos(t) ** 2) for t, p, _, _ in rows)
        print(f"kick {kick:>4g}: overlap {rows[0][3]:.3e}, max |p_plus - cos^2| = {dev:.3e}")


if __name__ == "__main__":
    main()
