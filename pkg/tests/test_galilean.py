import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from relqrf.galilean import (
    ClippingError, GalileanTwoParticleState, entanglement_entropy, galilean_inverse,
    galilean_matrix, galilean_transform, lattice, sharp_superposition,
)
from relqrf.qrf import probability_conservation_report

DX = 0.5
GRID = lattice(-12, 12, DX)


def demo_state(x1=-2.0, x2=3.0, x0=1.0):
    return sharp_superposition([x1, x2], x0, GRID, GRID, DX)


def test_entropy_pair():
    s = demo_state()
    out = galilean_transform(s)
    assert entanglement_entropy(s) == pytest.approx(0.0, abs=1e-10)
    assert entanglement_entropy(out) == pytest.approx(math.log(2), abs=1e-10)
    assert out.frame == "A" and out.parties == ("B", "C")


def test_transformed_support():
    # |x1>|x0> + |x2>|x0>  ->  |x0 - x1>|-x1> + |x0 - x2>|-x2>
    out = galilean_transform(demo_state())
    rows, cols = np.nonzero(np.abs(out.amplitudes) > 0)
    pairs = sorted(zip(out.x1[rows], out.x2[cols]))
    assert pairs == [(-2.0, -3.0), (3.0, 2.0)]
    np.testing.assert_allclose(np.abs(out.amplitudes[rows, cols]), 1 / (math.sqrt(2) * DX))


def test_roundtrip_restores_product():
    s = demo_state()
    back = galilean_inverse(galilean_transform(s), GRID, GRID)
    np.testing.assert_array_equal(back.amplitudes, s.amplitudes)
    assert entanglement_entropy(back) == pytest.approx(0.0, abs=1e-12)


def test_equal_positions_stay_product():
    s = sharp_superposition([1.0], -1.0, GRID, GRID, DX)
    assert entanglement_entropy(galilean_transform(s)) == pytest.approx(0.0, abs=1e-12)


def test_clipping_reported():
    s = demo_state()
    with pytest.raises(ClippingError):
        galilean_transform(s, lattice(-2, 2, DX), lattice(-2, 2, DX))


def test_off_lattice_rejected():
    with pytest.raises(ValueError):
        GalileanTwoParticleState(np.array([0.0, 0.3]), GRID, np.zeros((2, GRID.size)), DX)
    with pytest.raises(ValueError):
        galilean_inverse(demo_state())


def test_matrix_is_isometry():
    s = GalileanTwoParticleState(lattice(-3, 3, DX), lattice(-2, 4, DX), np.zeros((7, 7)), DX)
    U = galilean_matrix(s)
    np.testing.assert_array_equal(U.T @ U, np.eye(49))


@given(seed=st.integers(0, 2 ** 16))
def test_probability_conserved_for_random_states(seed):
    r = np.random.default_rng(seed)
    g = lattice(-4, 4, DX)
    amp = r.normal(size=(9, 9)) + 1j * r.normal(size=(9, 9))
    s = GalileanTwoParticleState(g, g, amp, DX)
    s = GalileanTwoParticleState(g, g, amp / s.norm(), DX)
    out = galilean_transform(s)
    assert out.norm() == pytest.approx(1.0, abs=1e-12)
    P = np.diag((r.random(81) > 0.5).astype(float))
    assert probability_conservation_report(s, P, "C->A").residual < 1e-12
    back = galilean_inverse(out, g, g)
    np.testing.assert_allclose(back.amplitudes, s.amplitudes, atol=1e-15)
