"""Momentum-dependent spin operator fields.

Every field is a stack of Hermitian 2x2 matrices, one per grid momentum,
acting on amplitudes stored in the rest-spin (Wigner) basis. In that basis
the relativistic spin Xi acts as the bare Pauli matrices while the
Pauli-Lubanski components

    Sigma^0 = gamma beta.sigma
    Sigma   = sigma + gamma^2/(gamma+1) (beta.sigma) beta

depend on momentum. The Xi field is built from Sigma by

    Xi = Sigma - gamma/(gamma+1) (Sigma.beta) beta

and checked against the basis-action construction Xi = sigma.

Pauli normalization is used throughout, so the algebra reads
[Xi_i, Xi_j] = 2i eps_ijk Xi_k. Multiply by hbar/2 (see :func:`spin_half`)
for the spin-1/2 normalization [S_i, S_j] = i hbar eps_ijk S_k.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lorentz
from .statekit import NATURAL, MomentumGrid1D, SpinorField, UnitSystem, is_normalized

HERMITIAN_TOL = 1e-13
EIGENSTATE_TOL = 1e-10

SIGMA = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)
AXES = {"x": 0, "y": 1, "z": 2}
# sigma^nu with a zero time component
SIGMA4 = np.concatenate([np.zeros((1, 2, 2), dtype=complex), SIGMA])


class NotHermitianError(ValueError):
    pass


def _axis_index(axis) -> int:
    if isinstance(axis, str):
        if axis not in AXES:
            raise ValueError(f"axis must be one of x, y, z; got {axis!r}")
        return AXES[axis]
    if axis in (0, 1, 2):
        return int(axis)
    raise ValueError(f"bad axis {axis!r}")


def hermitize(mats: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Symmetrize a matrix stack, refusing if the anti-Hermitian part is not tiny."""
    mats = np.asarray(mats, dtype=complex)
    herm = (mats + np.conj(np.swapaxes(mats, -1, -2))) / 2
    scale = max(1.0, float(np.max(np.abs(mats), initial=0.0)))
    resid = float(np.max(np.abs(mats - herm), initial=0.0))
    if resid > tol * scale:
        raise NotHermitianError(f"anti-Hermitian residual {resid:.3e} exceeds {tol:.1e}")
    return herm


@dataclass(frozen=True, eq=False)
class OperatorField:
    grid: MomentumGrid1D
    matrices: np.ndarray
    label: str = ""

    def __post_init__(self):
        mats = np.asarray(self.matrices, dtype=complex)
        if mats.shape == (2, 2):
            mats = np.broadcast_to(mats, (len(self.grid), 2, 2))
        if mats.shape != (len(self.grid), 2, 2):
            raise ValueError(f"expected ({len(self.grid)}, 2, 2) matrices, got {mats.shape}")
        mats = hermitize(mats)
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    def __matmul__(self, other: "OperatorField") -> np.ndarray:
        """Pointwise product (not necessarily Hermitian, so a raw stack)."""
        return self.matrices @ other.matrices

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrices)

    def scaled(self, factor: float, label: str = "") -> "OperatorField":
        return OperatorField(self.grid, self.matrices * factor, label or self.label)


def pauli(axis, grid: MomentumGrid1D) -> OperatorField:
    i = _axis_index(axis)
    return OperatorField(grid, SIGMA[i], f"sigma_{'xyz'[i]}")


def spin_half(op: OperatorField, units: UnitSystem = NATURAL) -> OperatorField:
    return op.scaled(units.hbar / 2, f"S[{op.label}]")


def pauli_lubanski_matrices(p, mass: float, units: UnitSystem = NATURAL) -> np.ndarray:
    """Sigma^mu for momenta p (N, 3) as an (N, 4, 2, 2) stack, from the closed form."""
    gamma, beta = lorentz.gamma_beta(p, mass, units)
    bs = np.einsum("ni,ijk->njk", beta, SIGMA)
    g = gamma[:, None, None]
    out = np.empty((beta.shape[0], 4, 2, 2), dtype=complex)
    out[:, 0] = g * bs
    coef = (gamma ** 2 / (gamma + 1))[:, None, None]
    for i in range(3):
        out[:, i + 1] = SIGMA[i] + coef * bs * beta[:, i, None, None]
    return out


def pauli_lubanski_from_boost(p, mass: float, units: UnitSystem = NATURAL) -> np.ndarray:
    """Sigma^mu = (L_{-p})^mu_nu sigma^nu, computed from the boost matrix."""
    L = lorentz.boost_matrix(-np.asarray(p, dtype=float), mass, units)
    return np.einsum("nab,bjk->najk", L, SIGMA4)


def pauli_lubanski(grid: MomentumGrid1D, mass: float = None) -> tuple:
    """Four OperatorFields (Sigma^0, Sigma_x, Sigma_y, Sigma_z) on the grid."""
    mass = grid.mass if mass is None else mass
    mats = pauli_lubanski_matrices(grid.p_vectors(), mass, grid.units)
    labels = ("Sigma^0", "Sigma_x", "Sigma_y", "Sigma_z")
    return tuple(OperatorField(grid, mats[:, mu], labels[mu]) for mu in range(4))


def xi_matrices_covariant(p, mass: float, units: UnitSystem = NATURAL) -> np.ndarray:
    """Xi_i = Sigma_i - gamma/(gamma+1) (Sigma.beta) beta_i; returns (N, 3, 2, 2)."""
    gamma, beta = lorentz.gamma_beta(p, mass, units)
    sig = pauli_lubanski_matrices(p, mass, units)[:, 1:]
    s_dot_b = np.einsum("nijk,ni->njk", sig, beta)
    coef = (gamma / (gamma + 1))[:, None, None, None]
    return sig - coef * s_dot_b[:, None] * beta[:, :, None, None]


def xi_matrices_from_boost(p, mass: float, units: UnitSystem = NATURAL) -> np.ndarray:
    """Xi^i = (L_p)^i_mu Sigma^mu, composing the boost with Sigma."""
    L = lorentz.boost_matrix(p, mass, units)
    sig = pauli_lubanski_matrices(p, mass, units)
    return np.einsum("nab,nbjk->najk", L, sig)[:, 1:]


def xi_field(grid: MomentumGrid1D, mass: float = None, axis="z",
             method: str = "covariant", tol: float = 1e-12) -> OperatorField:
    """Relativistic spin component Xi_axis on the grid.

    ``method="covariant"`` evaluates the Pauli-Lubanski formula and asserts it
    agrees with the basis action (bare sigma) to ``tol``; ``method="basis"``
    returns the basis action directly.
    """
    i = _axis_index(axis)
    mass = grid.mass if mass is None else mass
    basis = np.broadcast_to(SIGMA[i], (len(grid), 2, 2))
    if method == "basis":
        return OperatorField(grid, basis, f"Xi_{'xyz'[i]}")
    if method != "covariant":
        raise ValueError(f"unknown method {method!r}")
    cov = xi_matrices_covariant(grid.p_vectors(), mass, grid.units)[:, i]
    resid = float(np.max(np.abs(cov - basis)))
    if resid > tol:
        raise AssertionError(f"covariant Xi_{'xyz'[i]} departs from the basis action by {resid:.3e}")
    return OperatorField(grid, cov, f"Xi_{'xyz'[i]}")


def xi_along(grid: MomentumGrid1D, n_hat, method: str = "covariant") -> OperatorField:
    n = np.asarray(n_hat, dtype=float)
    n = n / np.linalg.norm(n)
    mats = sum(n[i] * xi_field(grid, axis=i, method=method).matrices for i in range(3))
    return OperatorField(grid, mats, "Xi_n")


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def su2_residual(ops) -> float:
    """max over points and cyclic pairs of |[O_i, O_j] - 2i eps_ijk O_k|.

    ``ops`` is a sequence of three (N, 2, 2) stacks or OperatorFields.
    """
    mats = [getattr(o, "matrices", o) for o in ops]
    worst = 0.0
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        r = commutator(mats[i], mats[j]) - 2j * mats[k]
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def constraint_residual(p, mass: float, units: UnitSystem = NATURAL) -> float:
    """max |p_mu Sigma^mu| = |p^0 Sigma^0 - p.Sigma| over the momenta."""
    sig = pauli_lubanski_matrices(p, mass, units)
    pmu = lorentz.four_momentum(p, mass, units)
    contracted = np.einsum("na,ab,nbjk->njk", pmu, lorentz.METRIC, sig)
    return float(np.max(np.abs(contracted)))


def apply(op: OperatorField, state: SpinorField) -> SpinorField:
    if not op.grid.same_as(state.grid):
        raise ValueError("operator and state live on different grids")
    return state.with_amplitudes(np.einsum("njk,nk->nj", op.matrices, state.amplitudes))


def expectation(op: OperatorField, state: SpinorField) -> float:
    if not op.grid.same_as(state.grid):
        raise ValueError("operator and state live on different grids")
    if not is_normalized(state, 1e-10):
        raise ValueError("expectation needs a normalized state")
    c = state.amplitudes
    val = np.sum(state.grid.weights * np.einsum("nj,njk,nk->n", np.conj(c), op.matrices, c))
    return float(val.real)


def eigenstate_residuals(state: SpinorField, axis="z") -> tuple:
    """(|Xi psi - psi|, |Xi psi + psi|) for a normalized lab state."""
    from .statekit import norm
    xi = xi_field(state.grid, axis=axis)
    moved = apply(xi, state)
    return norm(moved - state), norm(moved + state)


def classify_subspace(lab_state: SpinorField, tol: float = EIGENSTATE_TOL) -> str:
    """'H0' / 'H1' for Xi_z eigenstates with eigenvalue +1 / -1, else 'neither'."""
    if not is_normalized(lab_state, 1e-10):
        raise ValueError("classify_subspace needs a normalized state")
    up, down = eigenstate_residuals(lab_state, "z")
    if up < tol:
        return "H0"
    if down < tol:
        return "H1"
    return "neither"
