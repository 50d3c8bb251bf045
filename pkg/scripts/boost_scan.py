"""Scan the lab momentum and report how the lab spin observables move.

For a rest spin along +x, prints <Sigma_x> and <Sigma^0> in the lab
(both grow with gamma) next to <Xi_x>, which stays at 1.

    python3 scripts/boost_scan.py
"""
import numpy as np

from relqrf.spinops import expectation, pauli_lubanski, xi_field
from relqrf.statekit import MomentumGrid1D, sharp_state


def main():
    print(f"{'p/mc':>6} {'gamma':>8} {'<Sigma^0>':>10} {'<Sigma_x>':>10} {'<Xi_x>':>8}")
    for p in np.linspace(0.0, 4.0, 9):
        grid = MomentumGrid1D.single(p, 1.0)
        state = sharp_state(grid, 0, [1, 1])
        sig = pauli_lubanski(grid)
        gamma = np.sqrt(1 + p * p)
        print(f"{p:6.2f} {gamma:8.4f} {expectation(sig[0], state):10.4f} "
              f"{expectation(sig[1], state):10.4f} {expectation(xi_field(grid, axis='x'), state):8.4f}")


if __name__ == "__main__":
    main()
