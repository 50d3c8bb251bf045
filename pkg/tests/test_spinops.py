import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.linalg import expm

from relqrf import spinops
from relqrf.spinops import (
    SIGMA, NotHermitianError, OperatorField, classify_subspace, constraint_residual,
    expectation, pauli, pauli_lubanski, pauli_lubanski_from_boost, pauli_lubanski_matrices,
    spin_half, su2_residual, xi_along, xi_field, xi_matrices_covariant, xi_matrices_from_boost,
)
from relqrf.statekit import MomentumGrid1D, SpinorField, UnitSystem, sharp_state

vec3 = arrays(np.float64, 3, elements=st.floats(-8, 8))
masses = st.floats(0.2, 5.0)
R2 = math.sqrt(2)


def sigma_by_generator(p, mass):
    """Oracle: boost the spin four-vector (0, sigma) with exp(+rapidity K.n)."""
    p = np.asarray(p, dtype=float)
    size = np.linalg.norm(p)
    K = np.zeros((4, 4))
    if size:
        n = p / size
        K[0, 1:] = n
        K[1:, 0] = n
    L = expm(math.asinh(size / mass) * K)
    s4 = np.concatenate([np.zeros((1, 2, 2)), SIGMA])
    return np.einsum("ab,bjk->ajk", L, s4)


def test_pauli_lubanski_at_p_equal_mc():
    S = pauli_lubanski_matrices(np.array([[1.0, 0, 0]]), 1.0)[0]
    np.testing.assert_allclose(S[0], SIGMA[0], atol=1e-15)
    np.testing.assert_allclose(S[1], R2 * SIGMA[0], atol=1e-15)
    np.testing.assert_allclose(S[2], SIGMA[1], atol=1e-15)
    np.testing.assert_allclose(S[3], SIGMA[2], atol=1e-15)


def test_sigma_expectation_on_sharp_state():
    grid = MomentumGrid1D.single(1.0, 1.0)
    state = sharp_state(grid, 0, [1, 1])
    sig = pauli_lubanski(grid)
    assert expectation(sig[1], state) == pytest.approx(R2, abs=1e-14)
    assert expectation(sig[0], state) == pytest.approx(1.0, abs=1e-14)
    assert expectation(xi_field(grid, axis="x"), state) == pytest.approx(1.0, abs=1e-14)


def test_pauli_lubanski_matches_generator_oracle(rng):
    p = rng.normal(size=(30, 3)) * 2.5
    closed = pauli_lubanski_matrices(p, 1.3)
    for k in range(30):
        np.testing.assert_allclose(closed[k], sigma_by_generator(p[k], 1.3), atol=1e-11)
    np.testing.assert_allclose(pauli_lubanski_from_boost(p, 1.3), closed, atol=1e-12)


@given(p=vec3, m=masses)
def test_xi_collapses_to_sigma(p, m):
    xi = xi_matrices_covariant(p[None], m)[0]
    gamma = math.sqrt(1 + np.dot(p, p) / m ** 2)
    np.testing.assert_allclose(xi, SIGMA, atol=1e-13 * gamma ** 2)
    np.testing.assert_allclose(xi_matrices_from_boost(p[None], m)[0], SIGMA, atol=1e-12 * gamma ** 2)


@given(p=vec3, m=masses)
def test_covariant_constraint(p, m):
    gamma = math.sqrt(1 + np.dot(p, p) / m ** 2)
    assert constraint_residual(p[None], m) < 1e-13 * gamma ** 3 * max(1.0, m)


@given(p=vec3, m=masses)
def test_sigma_squared_invariant(p, m):
    # Sigma_mu Sigma^mu = -3 for spin 1/2 in Pauli normalization
    S = pauli_lubanski_matrices(p[None], m)[0]
    sq = S[0] @ S[0] - sum(S[i] @ S[i] for i in (1, 2, 3))
    gamma = math.sqrt(1 + np.dot(p, p) / m ** 2)
    np.testing.assert_allclose(sq, -3 * np.eye(2), atol=1e-12 * gamma ** 4)


def test_su2_on_grid():
    grid = MomentumGrid1D.linspace(-6, 6, 121, 0.7)
    assert su2_residual([xi_field(grid, axis=a) for a in "xyz"]) < 1e-12
    assert su2_residual([pauli(a, grid) for a in "xyz"]) < 1e-15
    for a in "xyz":
        np.testing.assert_allclose(xi_field(grid, axis=a).eigenvalues(),
                                   np.tile([-1.0, 1.0], (121, 1)), atol=1e-12)


def test_sigma_components_do_not_close_su2():
    grid = MomentumGrid1D.linspace(0.5, 2, 4, 1.0)
    sig = pauli_lubanski(grid)
    assert su2_residual(sig[1:]) > 0.1


def test_spin_half_normalization():
    u = UnitSystem(hbar=0.5, c=1.0)
    grid = MomentumGrid1D.linspace(-1, 1, 3, 1.0, u)
    S = [spin_half(xi_field(grid, axis=a), u).matrices for a in "xyz"]
    np.testing.assert_allclose(S[0] @ S[1] - S[1] @ S[0], 1j * u.hbar * S[2], atol=1e-15)


def test_nonrelativistic_limit():
    S = pauli_lubanski_matrices(np.array([[1e-4, 0, 0]]), 1.0)[0]
    assert np.max(np.abs(S[1:] - SIGMA)) < 1e-7
    assert np.max(np.abs(S[0])) < 1.1e-4


def test_sigma0_relation(rng):
    p = rng.normal(size=(20, 3))
    S = pauli_lubanski_matrices(p, 1.0)
    g = np.sqrt(1 + np.sum(p * p, axis=1))
    beta = p / g[:, None]
    lhs = np.einsum("nijk,ni->njk", S[:, 1:], beta)
    np.testing.assert_allclose(lhs, S[:, 0], atol=1e-13)


def test_operator_field_rejects_non_hermitian():
    grid = MomentumGrid1D.linspace(-1, 1, 3, 1.0)
    with pytest.raises(NotHermitianError):
        OperatorField(grid, np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        OperatorField(grid, np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        pauli("w", grid)


def test_xi_along_direction():
    grid = MomentumGrid1D.linspace(-2, 2, 5, 1.0)
    xi = xi_along(grid, [0, 3, 4])
    np.testing.assert_allclose(xi.matrices[2], 0.6 * SIGMA[1] + 0.8 * SIGMA[2], atol=1e-14)


def test_expectation_requires_normalized_state():
    grid = MomentumGrid1D.single(0.0, 1.0)
    with pytest.raises(ValueError):
        expectation(pauli("z", grid), SpinorField(grid, [[2.0, 0.0]]))


def test_classifier_cases():
    grid = MomentumGrid1D.linspace(-3, 3, 61, 1.0)
    up = sharp_state(grid, 10, [1, 0])
    down = sharp_state(grid, 40, [0, 1])
    mix = sharp_state(grid, 20, [1, 1])
    assert classify_subspace(up) == "H0"
    assert classify_subspace(down) == "H1"
    assert classify_subspace(mix) == "neither"
    # spin-momentum correlated but every point an eigenstate of Xi_z: still H0
    amp = np.zeros((61, 2), dtype=complex)
    amp[:, 0] = np.exp(-grid.points ** 2)
    s = SpinorField(grid, amp)
    s = s * (1 / math.sqrt(np.sum(grid.weights * np.abs(amp[:, 0]) ** 2)))
    assert classify_subspace(s) == "H0"
    with pytest.raises(ValueError):
        classify_subspace(up * 2)
