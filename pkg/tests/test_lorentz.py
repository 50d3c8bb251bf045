import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.linalg import expm

from relqrf import lorentz
from relqrf.lorentz import (
    EMField, KinematicsError, boost_matrix, faraday, fields_of, four_momentum, gamma_beta,
    kinematics, lab_fields, metric_residual, rest_fields, transform_electric, transform_field,
    transform_tensor, velocity,
)
from relqrf.statekit import UnitSystem

vec3 = arrays(np.float64, 3, elements=st.floats(-5, 5))
masses = st.floats(0.1, 10.0)


def boost_by_rapidity(p, mass, c=1.0):
    """Oracle: exponential of the boost generator along -p."""
    p = np.asarray(p, dtype=float)
    size = np.linalg.norm(p)
    if size == 0:
        return np.eye(4)
    n = p / size
    K = np.zeros((4, 4))
    K[0, 1:] = n
    K[1:, 0] = n
    return expm(-math.asinh(size / (mass * c)) * K)


def test_boost_at_p_equal_mc():
    L = boost_matrix([1.0, 0, 0], 1.0)
    r2 = math.sqrt(2)
    expected = np.array([[r2, -1, 0, 0], [-1, r2, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    np.testing.assert_allclose(L, expected, atol=1e-15)
    g, b = gamma_beta([1.0, 0, 0], 1.0)
    assert g == pytest.approx(r2)
    np.testing.assert_allclose(b, [1 / r2, 0, 0])


def test_boost_sends_momentum_to_rest():
    p = np.array([0.3, -1.2, 2.0])
    L = boost_matrix(p, 1.7)
    np.testing.assert_allclose(L @ four_momentum(p, 1.7), [1.7, 0, 0, 0], atol=1e-13)


def test_boost_matches_generator_exponential(rng):
    for p in rng.normal(size=(20, 3)) * 3:
        np.testing.assert_allclose(boost_matrix(p, 1.4), boost_by_rapidity(p, 1.4), atol=1e-12)


def test_boost_with_units():
    u = UnitSystem(hbar=1.0, c=2.0)
    p = np.array([2.0, 1.0, 0.0])
    np.testing.assert_allclose(boost_matrix(p, 0.5, u), boost_by_rapidity(p, 0.5, 2.0), atol=1e-12)
    # only p / (m c) matters
    np.testing.assert_allclose(boost_matrix(p, 0.5, u), boost_matrix(p, 1.0), atol=1e-15)


def test_velocity_below_c():
    v = velocity([1e6, 0, 0], 1.0)
    assert 0.999 < v[0] < 1.0
    assert velocity([1.0, 0, 0], 1.0)[0] == pytest.approx(1 / math.sqrt(2))


def test_bad_mass():
    with pytest.raises(KinematicsError):
        boost_matrix([1, 0, 0], 0.0)
    with pytest.raises(KinematicsError):
        gamma_beta([1, 0, 0], -1.0)


def test_stacked_boosts(rng):
    p = rng.normal(size=(7, 3))
    L = boost_matrix(p, 1.0)
    assert L.shape == (7, 4, 4)
    for k in range(7):
        np.testing.assert_allclose(L[k], boost_matrix(p[k], 1.0))


@given(p=vec3, m=masses)
def test_boost_group_properties(p, m):
    L = boost_matrix(p, m)
    assert metric_residual(L) < 1e-9 * max(1.0, np.max(np.abs(L)) ** 2)
    assert np.linalg.det(L) == pytest.approx(1.0, rel=1e-8)
    np.testing.assert_allclose(boost_matrix(-p, m) @ L, np.eye(4), atol=1e-9 * np.max(np.abs(L)) ** 2)


@given(p=vec3, m=masses, scale=st.floats(0.1, 10))
def test_boost_depends_on_p_over_m(p, m, scale):
    np.testing.assert_allclose(boost_matrix(p, m), boost_matrix(scale * p, scale * m), atol=1e-10)


def test_rest_field_frozen_values():
    # gamma = sqrt 2, beta = x / sqrt 2
    S = transform_field([0, 0, 0], [0, 0, 1], kinematics([1, 0, 0], 1.0))
    np.testing.assert_allclose(S, [0, 0, math.sqrt(2)], atol=1e-15)
    S = transform_field([0, 1, 0], [0, 0, 0], kinematics([1, 0, 0], 1.0))
    np.testing.assert_allclose(S, [0, 0, 1], atol=1e-15)
    # field along the boost is unchanged
    S = transform_field([0, 0, 0], [1, 0, 0], kinematics([1, 0, 0], 1.0))
    np.testing.assert_allclose(S, [1, 0, 0], atol=1e-15)


def test_faraday_layout():
    F = faraday([1, 2, 3], [4, 5, 6])
    assert F[0, 1] == -1 and F[1, 0] == 1
    assert F[1, 2] == 6 and F[2, 3] == 4 and F[3, 1] == 5
    np.testing.assert_array_equal(F, -F.T)
    with pytest.raises(ValueError):
        faraday([0, 0, 0], [0, 0, 0], convention="other")


@given(E=vec3, B=vec3, p=vec3, m=masses)
def test_tensor_transform_matches_vector_formulas(E, B, p, m):
    L = boost_matrix(p, m)
    E2, B2 = fields_of(transform_tensor(faraday(E, B), L))
    kin = kinematics(p, m)
    scale = max(1.0, np.max(np.abs(L)) ** 2) * max(1.0, np.max(np.abs(E)), np.max(np.abs(B)))
    np.testing.assert_allclose(B2, transform_field(E, B, kin), atol=1e-11 * scale)
    np.testing.assert_allclose(E2, transform_electric(E, B, kin), atol=1e-11 * scale)


@given(E=vec3, B=vec3, p=vec3, m=masses)
def test_field_invariants_and_inverse(E, B, p, m):
    kin = kinematics(p, m)
    E2, B2 = rest_fields(E, B, kin)
    scale = kin.gamma ** 2 * (1 + np.sum(E * E) + np.sum(B * B))
    assert np.dot(E2, E2) - np.dot(B2, B2) == pytest.approx(np.dot(E, E) - np.dot(B, B), abs=1e-9 * scale)
    assert np.dot(E2, B2) == pytest.approx(np.dot(E, B), abs=1e-9 * scale)
    E3, B3 = lab_fields(E2, B2, kin)
    np.testing.assert_allclose(E3, E, atol=1e-9 * scale)
    np.testing.assert_allclose(B3, B, atol=1e-9 * scale)


def test_gradient_field_profile():
    f = EMField.gradient(2.0, 0.5, (0, 3, 4))
    E, B = f.at([0, 3, 4])
    np.testing.assert_allclose(B, (2.0 - 0.5 * 5) * np.array([0, 0.6, 0.8]))
    np.testing.assert_array_equal(E, 0)
    with pytest.raises(ValueError):
        EMField.gradient(1.0, -1.0)


def test_levi_civita():
    assert lorentz.EPS4[0, 1, 2, 3] == 1
    assert lorentz.EPS4[1, 0, 2, 3] == -1
    assert lorentz.EPS3[2, 1, 0] == -1
    assert np.sum(np.abs(lorentz.EPS4)) == 24
