"""Relativistic kinematics, pure boosts and electromagnetic field transforms.

Fields use Gaussian-style units (E and B share dimensions), so the field
transformation carries bare beta factors.

Faraday tensor convention (frozen)::

    F^{0i} = -E_i,    F^{i0} = E_i,    F^{ij} = +eps_{ijk} B_k

With this choice two independent requirements hold at once:

* L_p F L_p^T has magnetic part equal to :func:`transform_field`, where L_p is
  the pure boost of :func:`boost_matrix`;
* (1/2) eta^{0 rho} eps_{rho mu nu lam} Sigma^mu F^{nu lam} = +Sigma . B.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .statekit import NATURAL, UnitSystem

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])
FARADAY_CONVENTION = "E-neg-B-pos"


def levi_civita(n: int) -> np.ndarray:
    """Totally antisymmetric symbol in ``n`` dimensions, eps[0, 1, ..., n-1] = +1."""
    eps = np.zeros((n,) * n)
    for perm in _permutations(n):
        eps[perm] = _parity(perm)
    return eps


def _permutations(n):
    from itertools import permutations
    return permutations(range(n))


def _parity(perm) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


EPS3 = levi_civita(3)
# lower-index eps_{rho mu nu lam}, eps_{0123} = +1
EPS4 = levi_civita(4)


class KinematicsError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Kinematics:
    momentum: np.ndarray
    mass: float
    gamma: float
    beta: np.ndarray

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.beta))


def _as_vec3(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim == 0:
        return np.array([float(p), 0.0, 0.0])
    if p.shape[-1] != 3:
        raise ValueError(f"expected 3-vector(s), got shape {p.shape}")
    return p


def gamma_beta(p, mass: float, units: UnitSystem = NATURAL):
    """Vectorized gamma (..., ) and beta (..., 3) for 3-momenta p (..., 3)."""
    if not mass > 0:
        raise KinematicsError(f"mass must be positive, got {mass}")
    p = _as_vec3(p)
    mc = mass * units.c
    p2 = np.sum(p * p, axis=-1)
    p0 = np.sqrt(mc * mc + p2)
    gamma = p0 / mc
    beta = p / p0[..., None]
    return gamma, beta


def kinematics(p_vec, mass: float, units: UnitSystem = NATURAL) -> Kinematics:
    p = _as_vec3(p_vec)
    g, b = gamma_beta(p, mass, units)
    return Kinematics(p, float(mass), float(g), b)


def velocity(p_vec, mass: float, units: UnitSystem = NATURAL) -> np.ndarray:
    """v_i = (p_i / m) (1 + |p|^2 / m^2 c^2)^(-1/2)."""
    p = _as_vec3(p_vec)
    g, _ = gamma_beta(p, mass, units)
    return p / mass / g[..., None]


def boost_matrix(p_vec, mass: float, units: UnitSystem = NATURAL) -> np.ndarray:
    """Pure boost L_p: maps the four-momentum (p0, p) to the rest vector (mc, 0).

    Accepts a single 3-momentum or a stack (..., 3); returns (..., 4, 4).
    """
    if not mass > 0:
        raise KinematicsError(f"mass must be positive, got {mass}")
    p = _as_vec3(p_vec)
    mc = mass * units.c
    p0 = np.sqrt(mc * mc + np.sum(p * p, axis=-1))
    L = np.zeros(p.shape[:-1] + (4, 4))
    L[..., 0, 0] = p0 / mc
    L[..., 0, 1:] = -p / mc
    L[..., 1:, 0] = -p / mc
    L[..., 1:, 1:] = np.eye(3) + (p[..., :, None] * p[..., None, :]) / (mc * (p0 + mc))[..., None, None]
    return L


def four_momentum(p_vec, mass: float, units: UnitSystem = NATURAL) -> np.ndarray:
    p = _as_vec3(p_vec)
    mc = mass * units.c
    p0 = np.sqrt(mc * mc + np.sum(p * p, axis=-1))
    return np.concatenate([p0[..., None], p], axis=-1)


def metric_residual(L: np.ndarray) -> float:
    """max |L^T eta L - eta| over a stack of 4x4 matrices."""
    res = np.einsum("...ji,jk,...kl->...il", L, METRIC, L) - METRIC
    return float(np.max(np.abs(res)))


def transform_field(E_lab, B_lab, kin) -> np.ndarray:
    """Magnetic field seen in the particle's rest frame, from lab fields.

        S = gamma [B - gamma/(gamma+1) (beta.B) beta + beta x E]

    ``kin`` is a :class:`Kinematics` or a (gamma, beta) pair of arrays, which
    lets the formula run over a whole momentum grid at once.
    """
    gamma, beta = (kin.gamma, kin.beta) if isinstance(kin, Kinematics) else kin
    gamma = np.asarray(gamma, dtype=float)
    E = np.asarray(E_lab, dtype=float)
    B = np.asarray(B_lab, dtype=float)
    bB = np.sum(beta * B, axis=-1)
    g = gamma[..., None]
    return g * (B - (g / (g + 1)) * bB[..., None] * beta + np.cross(beta, E))


def transform_electric(E_lab, B_lab, kin) -> np.ndarray:
    """Electric companion of :func:`transform_field` under the same boost."""
    gamma, beta = (kin.gamma, kin.beta) if isinstance(kin, Kinematics) else kin
    gamma = np.asarray(gamma, dtype=float)
    E = np.asarray(E_lab, dtype=float)
    B = np.asarray(B_lab, dtype=float)
    bE = np.sum(beta * E, axis=-1)
    g = gamma[..., None]
    return g * (E - (g / (g + 1)) * bE[..., None] * beta - np.cross(beta, B))


def rest_fields(E_lab, B_lab, kin):
    """(E, B) in the rest frame of the particle with kinematics ``kin``."""
    return transform_electric(E_lab, B_lab, kin), transform_field(E_lab, B_lab, kin)


def lab_fields(E_rest, B_rest, kin):
    """Inverse of :func:`rest_fields`: lab (E, B) producing the given rest fields."""
    gamma, beta = (kin.gamma, kin.beta) if isinstance(kin, Kinematics) else kin
    return rest_fields(E_rest, B_rest, (gamma, -np.asarray(beta)))


def faraday(E, B, convention: str = FARADAY_CONVENTION) -> np.ndarray:
    """Antisymmetric F^{nu lam} from (E, B); supports stacks (..., 3)."""
    if convention != FARADAY_CONVENTION:
        raise ValueError(f"unknown Faraday convention {convention!r}")
    E = np.asarray(E, dtype=float)
    B = np.asarray(B, dtype=float)
    F = np.zeros(np.broadcast_shapes(E.shape, B.shape)[:-1] + (4, 4))
    F[..., 0, 1:] = -E
    F[..., 1:, 0] = E
    F[..., 1:, 1:] = np.einsum("ijk,...k->...ij", EPS3, B)
    return F


def fields_of(F, convention: str = FARADAY_CONVENTION):
    if convention != FARADAY_CONVENTION:
        raise ValueError(f"unknown Faraday convention {convention!r}")
    F = np.asarray(F, dtype=float)
    E = F[..., 1:, 0].copy()
    B = np.stack([F[..., 2, 3], F[..., 3, 1], F[..., 1, 2]], axis=-1)
    return E, B


def transform_tensor(F, L) -> np.ndarray:
    """F' = L F L^T (both indices upper)."""
    return np.einsum("...ab,...bc,...dc->...ad", L, F, L)


@dataclass(frozen=True, eq=False)
class EMField:
    """Field values in one frame, with an optional linear profile along ``n``.

    With the gradient profile the magnetic field at transverse position r is
    B(r) = (B0 - alpha r.n) n.
    """

    E: np.ndarray
    B: np.ndarray
    frame: str = "C"
    B0: Optional[float] = None
    alpha: Optional[float] = None
    n_hat: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "E", np.asarray(self.E, dtype=float))
        object.__setattr__(self, "B", np.asarray(self.B, dtype=float))
        if self.alpha is not None:
            if not self.alpha > 0:
                raise ValueError("gradient alpha must be positive")
            n = np.asarray(self.n_hat, dtype=float)
            object.__setattr__(self, "n_hat", n / np.linalg.norm(n))

    @classmethod
    def gradient(cls, B0: float, alpha: float, n_hat=(0, 0, 1), frame: str = "C"):
        n = np.asarray(n_hat, dtype=float)
        n = n / np.linalg.norm(n)
        return cls(np.zeros(3), B0 * n, frame, B0, alpha, n)

    def at(self, r) -> tuple:
        """(E, B) at transverse position r."""
        if self.alpha is None:
            return self.E, self.B
        r = np.asarray(r, dtype=float)
        return self.E, (self.B0 - self.alpha * (r @ self.n_hat)) * self.n_hat

    def tensor(self) -> np.ndarray:
        return faraday(self.E, self.B)
