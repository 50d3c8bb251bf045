"""Superposition of Lorentz boosts between a particle's rest frame and the lab.

The rest-frame description (A's perspective) is a state of the spin and of
the laboratory C, stored as a :class:`SpinorField` on C's momentum grid with
frame tag ``"A"``. The lab description (C's perspective) is a state of the
particle's momentum and spin on A's grid, frame tag ``"C"``, with spin
amplitudes in the rest-spin basis |p; Sigma_p(lambda)>.

On a basis element the transformation acts as

    S_L |sigma>|pi>_C = |-(m_A/m_C) pi; Sigma_pi>

so amplitudes are transported by the argument map
c_lab(p_A) = N psi(-(m_C/m_A) p_A) chi. The covariant measure is invariant
under that rescaling (dmu_A(p_A) = dmu_C(pi) exactly), so on the mapped grid
the transformation is a permutation of orthonormal coordinates and N = 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import lorentz
from .spinops import OperatorField, xi_along, SIGMA
from .statekit import (
    GaussianDescriptor,
    MomentumGrid1D,
    SpinorField,
    TransverseWavepacket,
    measure_density,
    norm,
    scalar_norm,
)

COVERAGE_TOL = 1e-6
PROJECTOR_TOL = 1e-10


class CoverageError(ValueError):
    pass


class NotFactorizableError(ValueError):
    """Raised by :func:`apply_S_L_inverse` for lab states outside the product image.

    Carries the pulled-back rest field, the best product approximation and its
    residual so callers can inspect the diagnostic.
    """

    def __init__(self, residual, best_product, field):
        super().__init__(f"pulled-back state is not a product (residual {residual:.3e})")
        self.residual = residual
        self.best_product = best_product
        self.field = field


@dataclass(frozen=True, eq=False)
class RestFrameState:
    """Spin times laboratory wavefunction, as seen from the particle's rest frame."""

    spin: np.ndarray
    grid: MomentumGrid1D
    psi: np.ndarray
    zpart: Optional[TransverseWavepacket] = None
    descriptor: Optional[GaussianDescriptor] = None

    def __post_init__(self):
        spin = np.asarray(self.spin, dtype=complex)
        psi = np.asarray(self.psi, dtype=complex)
        if spin.shape != (2,) or psi.shape != (len(self.grid),):
            raise ValueError("spin must be a 2-vector and psi must match the grid")
        object.__setattr__(self, "spin", spin / np.linalg.norm(spin))
        object.__setattr__(self, "psi", psi / scalar_norm(self.grid, psi))

    @classmethod
    def gaussian(cls, spin, grid: MomentumGrid1D, center: float, std: float, zpart=None):
        desc = GaussianDescriptor(center, std)
        return cls(spin, grid, desc(grid.points), zpart, desc)

    def to_field(self) -> SpinorField:
        return SpinorField.product(self.grid, self.psi, self.spin, frame="A", zpart=self.zpart)


def mapped_grid(grid_C: MomentumGrid1D, m_A: float, m_C: float) -> MomentumGrid1D:
    """A's grid p_A = -(m_A/m_C) pi, reordered to increase."""
    pts = -(m_A / m_C) * grid_C.points[::-1]
    return MomentumGrid1D(pts, m_A, grid_C.units, label="A")


def unmapped_grid(grid_A: MomentumGrid1D, m_A: float, m_C: float) -> MomentumGrid1D:
    pts = -(m_C / m_A) * grid_A.points[::-1]
    return MomentumGrid1D(pts, m_C, grid_A.units, label="C")


def measure_jacobian(p_A, m_A: float, m_C: float, units=None) -> np.ndarray:
    """(dmu_C/dpi)|dpi/dp_A| / (dmu_A/dp_A) along the argument map; identically 1."""
    from .statekit import NATURAL
    units = units or NATURAL
    p_A = np.asarray(p_A, dtype=float)
    pi = -(m_C / m_A) * p_A
    return measure_density(pi, m_C, units) * (m_C / m_A) / measure_density(p_A, m_A, units)


def _as_rest_field(rest_state) -> SpinorField:
    if isinstance(rest_state, RestFrameState):
        return rest_state.to_field()
    if rest_state.frame != "A":
        raise ValueError(f"expected a rest-frame (A) state, got frame {rest_state.frame!r}")
    return rest_state


def s_l_matrix(grid_C: MomentumGrid1D, m_A: float, m_C: float) -> np.ndarray:
    """S_L in orthonormal coordinates, from C's grid to the mapped A grid.

    Entry ((j, lam), (i, mu)) is delta_{j, N-1-i} delta_{lam mu} sqrt(w_A[j] / w_C[i]).
    """
    grid_A = mapped_grid(grid_C, m_A, m_C)
    n = len(grid_C)
    U = np.zeros((2 * n, 2 * n))
    for i in range(n):
        j = n - 1 - i
        ratio = np.sqrt(grid_A.weights[j] / grid_C.weights[i])
        for lam in range(2):
            U[2 * j + lam, 2 * i + lam] = ratio
    return U


def apply_S_L(rest_state, m_A: float, m_C: float, target_grid: MomentumGrid1D = None,
              return_info: bool = False):
    """Transform a rest-frame state to the lab frame.

    With no ``target_grid`` the output lives on :func:`mapped_grid` and the
    argument map is exact. On any other grid the wavefunction is resampled,
    analytically when a gaussian descriptor is known and by linear
    interpolation otherwise; the resulting norm deficit is reported in the
    info dict and fixed by the normalization constant.
    """
    field = _as_rest_field(rest_state)
    grid_C = field.grid
    if abs(grid_C.mass - m_C) > 1e-15 * m_C:
        raise ValueError("rest-state grid mass does not match m_C")
    zpart = getattr(rest_state, "zpart", None) or field.zpart
    info = {"method": "exact"}

    if target_grid is None:
        grid_A = mapped_grid(grid_C, m_A, m_C)
        amp = field.amplitudes[::-1] * np.sqrt(grid_C.weights[::-1] / grid_A.weights)[:, None]
        out = SpinorField(grid_A, amp, frame="C", zpart=zpart)
        info["norm_before"] = norm(out)
        info["jacobian_residual"] = float(np.max(np.abs(
            measure_jacobian(grid_A.points, m_A, m_C, grid_A.units) - 1.0)))
    else:
        grid_A = target_grid
        pi_of_pA = -(m_C / m_A) * grid_A.points
        desc = getattr(rest_state, "descriptor", None)
        lo, hi = -(m_A / m_C) * grid_C.points[-1], -(m_A / m_C) * grid_C.points[0]
        outside = (grid_C.points < -(m_C / m_A) * grid_A.points[-1]) | (
            grid_C.points > -(m_C / m_A) * grid_A.points[0])
        lost = float(np.sum(grid_C.weights[outside, None] * np.abs(field.amplitudes[outside]) ** 2))
        if lost > COVERAGE_TOL:
            raise CoverageError(f"target grid misses {lost:.3e} of the norm; needs [{lo:.4g}, {hi:.4g}]")
        if desc is not None:
            psi = desc(pi_of_pA) / scalar_norm(grid_C, desc(grid_C.points))
            amp = np.outer(psi, rest_state.spin)
            info["method"] = "analytic"
        else:
            amp = np.empty((len(grid_A), 2), dtype=complex)
            for lam in range(2):
                col = field.amplitudes[:, lam]
                amp[:, lam] = (np.interp(pi_of_pA, grid_C.points, col.real, left=0.0, right=0.0)
                               + 1j * np.interp(pi_of_pA, grid_C.points, col.imag, left=0.0, right=0.0))
            info["method"] = "interpolated"
        raw = SpinorField(grid_A, amp, frame="C", zpart=zpart)
        info["norm_before"] = norm(raw)
        out = raw * (1.0 / info["norm_before"])
    info["interpolation_residual"] = abs(1.0 - info["norm_before"])
    if return_info:
        return out, info
    return out


def pullback(lab_state: SpinorField, m_A: float, m_C: float) -> SpinorField:
    """S_L^dagger on a lab state living on a mapped grid; returns the rest field."""
    if lab_state.frame != "C":
        raise ValueError(f"expected a lab-frame (C) state, got frame {lab_state.frame!r}")
    grid_A = lab_state.grid
    grid_C = unmapped_grid(grid_A, m_A, m_C)
    amp = lab_state.amplitudes[::-1] * np.sqrt(grid_A.weights[::-1] / grid_C.weights)[:, None]
    return SpinorField(grid_C, amp, frame="A", zpart=lab_state.zpart)


def factorize(field: SpinorField) -> tuple:
    """Best product approximation of a normalized field via the Schmidt decomposition.

    Returns (RestFrameState, residual) where residual = |field - product| is
    the second Schmidt coefficient.
    """
    M = field.orthonormal().reshape(len(field.grid), 2)
    U, s, Vh = np.linalg.svd(M, full_matrices=False)
    spin = Vh[0]
    k = int(np.argmax(np.abs(spin)))
    phase = spin[k] / abs(spin[k])
    spin = spin / phase
    psi = s[0] * U[:, 0] * phase / np.sqrt(field.grid.weights)
    residual = float(s[1]) if s.size > 1 else 0.0
    return RestFrameState(spin, field.grid, psi, field.zpart), residual


def apply_S_L_inverse(lab_state: SpinorField, m_A: float, m_C: float,
                      tol: float = 1e-10) -> RestFrameState:
    field = pullback(lab_state, m_A, m_C)
    product, residual = factorize(field)
    if residual > tol:
        raise NotFactorizableError(residual, product, field)
    return product


def pullback_class(lab_state: SpinorField, m_A: float, m_C: float, tol: float = 1e-10) -> str:
    """Subspace label from the pullback: 'H0'/'H1' if it factorizes with spin |0>/|1>."""
    try:
        product = apply_S_L_inverse(lab_state, m_A, m_C, tol)
    except NotFactorizableError:
        return "neither"
    if abs(abs(product.spin[0]) - 1) < tol:
        return "H0"
    if abs(abs(product.spin[1]) - 1) < tol:
        return "H1"
    return "neither"


# --- tripartite form ----------------------------------------------------------

@dataclass(frozen=True)
class TripartiteTerm:
    """amplitude * |k_A; spin>_{A spin} |P_C>_C with explicit four-momenta."""

    amplitude: complex
    p_A: np.ndarray
    spin: np.ndarray
    p_C: np.ndarray


def rest_basis_terms(pis, spins, amplitudes, m_A: float, m_C: float, units=None):
    """Rest-frame tripartite terms |k_A; spin>|pi>_C for sharp lab momenta."""
    from .statekit import NATURAL
    units = units or NATURAL
    kA = lorentz.four_momentum(np.zeros(3), m_A, units)
    return [
        TripartiteTerm(complex(a), kA, np.asarray(s, dtype=complex),
                       lorentz.four_momentum([pi, 0.0, 0.0], m_C, units))
        for pi, s, a in zip(pis, spins, amplitudes)
    ]


def apply_S_ext(terms, m_A: float, m_C: float, units=None, tol: float = 1e-12):
    """Apply the tripartite transformation term by term.

    First A is boosted from rest to -(m_A/m_C) pi (controlled on C), then C is
    boosted to rest (controlled on A). Both four-vector actions are the pure
    boost with C's velocity, which is asserted. The spin label is untouched
    because a pure boost from rest carries |k; lambda> to |p; Sigma_p(lambda)>.
    """
    from .statekit import NATURAL
    units = units or NATURAL
    kA = lorentz.four_momentum(np.zeros(3), m_A, units)
    out = []
    for t in terms:
        if np.max(np.abs(t.p_A - kA)) > tol * max(1.0, kA[0]):
            raise ValueError("tripartite input must have A at rest")
        pi3 = t.p_C[1:]
        target = -(m_A / m_C) * pi3
        # boost of A: carries k_A to `target`
        lam_A = lorentz.boost_matrix(-target, m_A, units)
        p_A = lam_A @ t.p_A
        # boost of C by A's momentum rescaled to C's mass
        lam_C = lorentz.boost_matrix(-(m_C / m_A) * p_A[1:], m_C, units)
        p_C = lam_C @ t.p_C
        if np.max(np.abs(lam_A - lam_C)) > tol * max(1.0, float(np.max(np.abs(lam_A)))):
            raise AssertionError("controlled boosts on A and C disagree")
        out.append(TripartiteTerm(t.amplitude, p_A, t.spin, p_C))
    return out


def drop_frame_register(terms, grid_A: MomentumGrid1D, tol: float = 1e-12) -> SpinorField:
    """Discard C's rest register and place sharp terms on A's grid."""
    from .statekit import sharp_state
    mc_C = None
    amp = np.zeros((len(grid_A), 2), dtype=complex)
    for t in terms:
        mc_C = t.p_C[0]
        if np.max(np.abs(t.p_C[1:])) > tol * max(1.0, mc_C):
            raise AssertionError("laboratory register did not come to rest")
        idx = int(np.argmin(np.abs(grid_A.points - t.p_A[1])))
        if abs(grid_A.points[idx] - t.p_A[1]) > tol * max(1.0, abs(t.p_A[1])):
            raise ValueError(f"momentum {t.p_A[1]} is not on the A grid")
        amp += t.amplitude * sharp_state(grid_A, idx, t.spin, frame="C").amplitudes * np.linalg.norm(t.spin)
    return SpinorField(grid_A, amp, frame="C")


# --- probability bookkeeping -------------------------------------------------

def check_projector(P: np.ndarray, tol: float = PROJECTOR_TOL):
    herm = float(np.max(np.abs(P - P.conj().T)))
    idem = float(np.max(np.abs(P @ P - P)))
    if herm > tol or idem > tol:
        raise ValueError(f"not a projector (hermiticity {herm:.2e}, idempotence {idem:.2e})")


def field_to_matrix(op) -> np.ndarray:
    """Block-diagonal matrix of a pointwise operator field (orthonormal coordinates)."""
    mats = op.matrices if isinstance(op, OperatorField) else np.asarray(op)
    n = mats.shape[0]
    M = np.zeros((2 * n, 2 * n), dtype=complex)
    for i in range(n):
        M[2 * i:2 * i + 2, 2 * i:2 * i + 2] = mats[i]
    return M


@dataclass(frozen=True)
class ProbabilityReport:
    p_before: float
    p_after: float

    @property
    def residual(self) -> float:
        return abs(self.p_before - self.p_after)


def probability_conservation_report(state, projector, frame_pair: str = "A->C", m_A=None,
                                    m_C=None, tol: float = PROJECTOR_TOL) -> ProbabilityReport:
    """p = <psi|P|psi> before and after transforming both state and projector.

    ``frame_pair`` is ``"A->C"`` (rest to lab via S_L; needs masses) or
    ``"C->A"`` (Galilean S_x on a :class:`~relqrf.galilean.GalileanTwoParticleState`).
    ``projector`` is an OperatorField, a (N, 2, 2) stack, or a full matrix in
    orthonormal coordinates.
    """
    if frame_pair == "A->C":
        field = _as_rest_field(state)
        v = field.orthonormal()
        P = projector
        if isinstance(P, OperatorField) or np.ndim(P) == 3:
            P = field_to_matrix(P)
        U = s_l_matrix(field.grid, m_A, m_C)
    elif frame_pair == "C->A":
        from .galilean import galilean_matrix
        v = state.orthonormal()
        P = np.asarray(projector)
        U = galilean_matrix(state)
    else:
        raise ValueError(f"unknown frame pair {frame_pair!r}")
    check_projector(P, tol)
    before = float(np.real(np.vdot(v, P @ v)))
    v2 = U @ v
    P2 = U @ P @ U.conj().T
    after = float(np.real(np.vdot(v2, P2 @ v2)))
    return ProbabilityReport(before, after)


def spin_projector(n_hat, sign: int = +1) -> np.ndarray:
    """(1 + sign n.sigma)/2 as a single 2x2 matrix."""
    n = np.asarray(n_hat, dtype=float)
    n = n / np.linalg.norm(n)
    return (np.eye(2) + sign * np.einsum("i,ijk->jk", n, SIGMA)) / 2


def lab_spin_probability(lab_state: SpinorField, n_hat, sign: int = +1) -> float:
    """<(1 + sign Xi_n)/2> in the lab, with Xi from the covariant formula."""
    xi = xi_along(lab_state.grid, n_hat)
    proj = (np.eye(2) + sign * xi.matrices) / 2
    c = lab_state.amplitudes
    return float(np.real(np.sum(lab_state.grid.weights * np.einsum("nj,njk,nk->n", np.conj(c), proj, c))))
