"""Relativistic Stern-Gerlach measurement in the rest frame and in the lab.

Rest frame:  H_A = mu B.sigma.
Lab frame:   H_C(p) = mu gamma(p)^-1 S(p).Xi(p), with S the rest-frame field
             produced by the lab fields (:func:`relqrf.lorentz.transform_field`).

The concrete lab experiment couples mu B_z(z) Xi_z with B_z(z) = B0 - alpha z
to a packet phi_x(p_x) psi_z(p_z). Evolution is taken in the interaction
picture (no kinetic term along z), so each Xi_z branch lambda = +-1 picks up
the phase exp(-i lambda mu B0 t / hbar) and a momentum kick lambda p*(t) with
p*(t) = alpha mu t / hbar.

Two outcome projectors are reported. The packet projectors
|psi_z^+-><psi_z^+-| onto the kicked gaussians do not sum to the identity.
The half-line projectors select deflection up or down; with no kinetic term
the packets never separate in position, so the default reads the far-field
sign, which is the sign of p_z. An explicit free flight followed by a
position half-line cut is available as well.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.linalg import expm

from . import lorentz
from .lorentz import EPS4
from .qrf import RestFrameState, apply_S_L
from .spinops import SIGMA, OperatorField, pauli_lubanski, xi_along, xi_field
from .statekit import (
    NATURAL,
    GaussianDescriptor,
    MomentumGrid1D,
    SpinorField,
    UnitSystem,
    gaussian_amplitude,
    inner_product,
    sharp_state,
)

CLIP_TOL = 1e-6


class ConventionError(ValueError):
    pass


def _unit(n_hat) -> np.ndarray:
    n = np.asarray(n_hat, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0:
        raise ValueError("direction n_hat must be non-zero")
    return n / norm


def rest_hamiltonian(B: float, n_hat, mu: float, grid: MomentumGrid1D = None):
    """mu B (n.sigma); an OperatorField over ``grid`` if given, else a 2x2 matrix."""
    n = _unit(n_hat)
    H = mu * B * np.einsum("i,ijk->jk", n, SIGMA)
    if grid is None:
        return H
    return OperatorField(grid, H, "H_A")


def rest_hamiltonian_from_field(B_vec, mu: float) -> np.ndarray:
    return mu * np.einsum("...i,ijk->...jk", np.asarray(B_vec, dtype=float), SIGMA)


def lab_hamiltonian(E_lab, B_lab, grid: MomentumGrid1D, mu: float,
                    method: str = "covariant") -> OperatorField:
    """Pointwise mu gamma^-1 S(p).Xi(p) on the lab grid."""
    gamma, beta = lorentz.gamma_beta(grid.p_vectors(), grid.mass, grid.units)
    S = lorentz.transform_field(E_lab, B_lab, (gamma, beta))
    xi = np.stack([xi_field(grid, axis=i, method=method).matrices for i in range(3)], axis=1)
    H = mu * np.einsum("n,ni,nijk->njk", 1.0 / gamma, S, xi)
    return OperatorField(grid, H, "H_C")


def _sigma_stack(sigma_fields) -> np.ndarray:
    if isinstance(sigma_fields, (tuple, list)):
        return np.stack([getattr(s, "matrices", s) for s in sigma_fields], axis=1)
    return np.asarray(sigma_fields)


def covariant_h0(F, sigma_fields, grid: MomentumGrid1D, contraction: str = "time",
                 convention: str = lorentz.FARADAY_CONVENTION) -> OperatorField:
    """(1/2) a^rho eps_{rho mu nu lam} Sigma^mu F^{nu lam}, normalized without mu.

    ``contraction="time"`` uses a^rho = eta^{0 rho}; this equals gamma H_C / mu
    when F is the rest-frame tensor at each momentum and the field has no
    component along the boost. ``contraction="velocity"`` uses the particle's
    four-velocity p^rho/(mc) with the lab tensor, which is frame independent
    and equals gamma H_C / mu for any field.

    ``F`` is a single (4, 4) tensor or one per grid point (N, 4, 4).
    """
    if convention != lorentz.FARADAY_CONVENTION:
        raise ConventionError(f"Faraday convention {convention!r} is not the frozen one")
    sig = _sigma_stack(sigma_fields)
    n = len(grid)
    F = np.broadcast_to(np.asarray(F, dtype=float), (n, 4, 4))
    if contraction == "time":
        a = np.broadcast_to(lorentz.METRIC[0], (n, 4))
    elif contraction == "velocity":
        a = lorentz.four_momentum(grid.p_vectors(), grid.mass, grid.units) / (grid.mass * grid.units.c)
    else:
        raise ValueError(f"unknown contraction {contraction!r}")
    H = 0.5 * np.einsum("nr,rmab,nmjk,nab->njk", a, EPS4, sig, F)
    return OperatorField(grid, H, "H0")


def rest_tensor_field(E_lab, B_lab, grid: MomentumGrid1D) -> np.ndarray:
    """Rest-frame Faraday tensor at every grid momentum, L_p F_lab L_p^T."""
    L = lorentz.boost_matrix(grid.p_vectors(), grid.mass, grid.units)
    return lorentz.transform_tensor(lorentz.faraday(E_lab, B_lab), L)


# --- split-packet experiment ---------------------------------------------------

@dataclass(frozen=True)
class SternGerlachConfig:
    theta: float
    mu: float = 1.0
    B0: float = 1.0
    alpha: float = 1.0
    s_z: float = 1.0
    t: float = 5.0
    n_hat: tuple = (0.0, 0.0, 1.0)
    m_A: float = 1.0
    px_center: float = 1.0
    px_std: float = 0.3
    px_count: int = 64
    px_span: float = 8.0
    z_count: int = 512
    z_margin: float = 10.0
    units: UnitSystem = NATURAL
    exploratory: bool = False

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.s_z > 0:
            raise ValueError("s_z must be positive")
        if not self.t >= 0:
            raise ValueError("t must be non-negative")
        if not self.m_A > 0:
            raise ValueError("m_A must be positive")
        if not self.px_std > 0:
            raise ValueError("px_std must be positive")
        n = _unit(self.n_hat)
        if abs(n[0]) > 1e-12 and not self.exploratory:
            raise ValueError("n_hat must be orthogonal to the boost axis x (set exploratory to tilt it)")
        if self.z_margin < 8.0:
            raise ValueError("z grid must span at least 8 s_z beyond the kicked packets")

    @property
    def p_star(self) -> float:
        return self.alpha * self.mu * self.t / self.units.hbar

    @property
    def threshold_time(self) -> float:
        return self.units.hbar * self.s_z / (self.alpha * self.mu)

    def x_grid(self) -> MomentumGrid1D:
        if self.px_count == 1:
            return MomentumGrid1D.single(self.px_center, self.m_A, self.units, "A")
        half = self.px_span * self.px_std
        return MomentumGrid1D.linspace(self.px_center - half, self.px_center + half,
                                       self.px_count, self.m_A, self.units, "A")

    def z_grid(self) -> np.ndarray:
        half = abs(self.p_star) + self.z_margin * self.s_z
        # even count, endpoint dropped: a periodic grid suited to the FFT
        return np.linspace(-half, half, self.z_count, endpoint=False)


@dataclass(eq=False)
class ExperimentRecord:
    p_plus: float
    p_minus: float
    p_plus_halfline: float
    p_minus_halfline: float
    p_star: float
    overlap: float
    distinguishable: bool
    frame: str
    p_z: np.ndarray = field(repr=False)
    z_profile: np.ndarray = field(repr=False)
    state: np.ndarray = field(repr=False)
    norm: float = 1.0
    method: str = "analytic"


def xi_z_branches(grid: MomentumGrid1D, n_hat=(0, 0, 1)):
    """Eigenvectors of Xi_n at every grid point for eigenvalues +1 and -1, shape (N, 2, 2).

    Column 0 holds lambda=+1, column 1 lambda=-1; phases fixed so the largest
    component is real positive.
    """
    xi = xi_along(grid, n_hat)
    vals, vecs = np.linalg.eigh(xi.matrices)
    if np.max(np.abs(np.abs(vals) - 1.0)) > 1e-12:
        raise AssertionError("Xi eigenvalues differ from +-1")
    vecs = vecs[:, :, ::-1]
    for col in range(2):
        v = vecs[:, :, col]
        k = np.argmax(np.abs(v), axis=1)
        ph = v[np.arange(v.shape[0]), k]
        vecs[:, :, col] = v / (ph / np.abs(ph))[:, None]
    return vecs


def _to_position(psi_p, p, hbar):
    """psi(z_k) = sum_j dp/sqrt(2 pi hbar) psi(p_j) exp(i p_j z_k / hbar), via the FFT."""
    n = p.size
    dp = p[1] - p[0]
    dz = 2 * np.pi * hbar / (n * dp)
    z = (np.arange(n) - n // 2) * dz
    pre = np.exp(1j * (np.arange(n) * dp) * z[0] / hbar)
    post = np.exp(1j * p[0] * z / hbar)
    vals = np.fft.ifft(psi_p * pre, axis=-1) * n
    return z, post * vals * dp / np.sqrt(2 * np.pi * hbar)


def _to_momentum(psi_z, p, hbar):
    n = p.size
    dp = p[1] - p[0]
    dz = 2 * np.pi * hbar / (n * dp)
    z = (np.arange(n) - n // 2) * dz
    pre = np.exp(-1j * p[0] * z / hbar)
    post = np.exp(-1j * (np.arange(n) * dp) * z[0] / hbar)
    vals = np.fft.fft(psi_z * pre, axis=-1)
    return post * vals * dz / np.sqrt(2 * np.pi * hbar)


def evolve_z_spectral(psi_p, p, lam: int, cfg: SternGerlachConfig) -> np.ndarray:
    """Interaction-picture step for one branch on an arbitrary z packet.

    In position space the branch phase is exp(-i lam (mu B0 t - p* z)/hbar),
    which kicks the momentum by lam p*.
    """
    hbar = cfg.units.hbar
    z, psi_z = _to_position(psi_p, p, hbar)
    phase = np.exp(-1j * lam * (cfg.mu * cfg.B0 * cfg.t - cfg.p_star * z) / hbar)
    return _to_momentum(psi_z * phase, p, hbar)


def evolve_z_analytic(p, lam: int, cfg: SternGerlachConfig) -> np.ndarray:
    hbar = cfg.units.hbar
    return np.exp(-1j * lam * cfg.mu * cfg.B0 * cfg.t / hbar) * gaussian_amplitude(
        p - lam * cfg.p_star, 0.0, cfg.s_z)


def initial_state(cfg: SternGerlachConfig):
    """Psi_0[i_x, j_z, spin] = phi_x psi_z (cos theta chi+ + sin theta chi-)."""
    gx = cfg.x_grid()
    pz = cfg.z_grid()
    phi = gaussian_amplitude(gx.points, cfg.px_center, cfg.px_std)
    phi = phi / np.sqrt(np.sum(gx.weights * np.abs(phi) ** 2))
    psi_z = gaussian_amplitude(pz, 0.0, cfg.s_z)
    chi = xi_z_branches(gx, cfg.n_hat)
    spin = np.cos(cfg.theta) * chi[:, :, 0] + np.sin(cfg.theta) * chi[:, :, 1]
    psi0 = phi[:, None, None] * psi_z[None, :, None] * spin[:, None, :]
    return gx, pz, phi, psi_z, chi, psi0


def _packet(p, lam, cfg):
    return gaussian_amplitude(p - lam * cfg.p_star, 0.0, cfg.s_z)


def distinguishability(cfg: SternGerlachConfig) -> tuple:
    """(|<psi_z^+|psi_z^->| by quadrature, t > hbar s_z / (alpha mu))."""
    p = cfg.z_grid()
    dp = p[1] - p[0]
    ov = abs(np.sum(np.conj(_packet(p, +1, cfg)) * _packet(p, -1, cfg)) * dp)
    return float(ov), bool(cfg.t > cfg.threshold_time)


def closed_form_overlap(cfg: SternGerlachConfig) -> float:
    """Overlap of two gaussians displaced by +-p*: exp(-p*^2 / (2 s_z^2))."""
    return float(np.exp(-cfg.p_star ** 2 / (2 * cfg.s_z ** 2)))


def free_flight_halfline(z_profile, p, cfg: SternGerlachConfig, flight_time: float) -> tuple:
    """(P(z>0), P(z<0)) after free flight of duration ``flight_time`` along z.

    ``z_profile`` is (Nz,) or (Nz, k) with one column per spin component.
    """
    hbar = cfg.units.hbar
    prof = np.asarray(z_profile).reshape(len(p), -1).T
    kinetic = np.exp(-1j * p ** 2 * flight_time / (2 * cfg.m_A * hbar))
    z, psi_z = _to_position(prof * kinetic, p, hbar)
    dz = z[1] - z[0]
    dens = np.sum(np.abs(psi_z) ** 2, axis=0) * dz
    return float(np.sum(dens[z > 0]) + 0.5 * np.sum(dens[z == 0])), float(
        np.sum(dens[z < 0]) + 0.5 * np.sum(dens[z == 0]))


def evolve_split_packet(cfg: SternGerlachConfig, method: str = "analytic",
                     frame: str = "C") -> ExperimentRecord:
    """Prepare, evolve and measure the split-packet experiment.

    ``frame="C"`` runs in the lab with Xi_z branches from the covariant formula;
    ``frame="A"`` runs the rest-frame experiment (bare sigma_z, A at rest).
    """
    if frame == "A":
        # A at rest: a single p_x = 0 point, where Xi_n reduces to n.sigma
        cfg = replace(cfg, px_center=0.0, px_count=1)
    elif frame != "C":
        raise ValueError(f"unknown frame {frame!r}")
    gx, pz, phi, psi_z, chi, psi0 = initial_state(cfg)
    dp = pz[1] - pz[0]
    branches = {}
    for col, lam in ((0, +1), (1, -1)):
        if method == "analytic":
            branches[lam] = evolve_z_analytic(pz, lam, cfg)
        elif method == "spectral":
            branches[lam] = evolve_z_spectral(psi_z.astype(complex), pz, lam, cfg)
        else:
            raise ValueError(f"unknown method {method!r}")
    # amplitude profile along z per branch; the state is
    # phi_x(p_x) [cos th chi+(p_x) a+(p_z) + sin th chi-(p_x) a-(p_z)]
    state = phi[:, None, None] * (
        np.cos(cfg.theta) * chi[:, None, :, 0] * branches[+1][None, :, None]
        + np.sin(cfg.theta) * chi[:, None, :, 1] * branches[-1][None, :, None])
    wx = gx.weights
    nrm = float(np.sqrt(np.sum(wx[:, None, None] * np.abs(state) ** 2) * dp))
    if abs(nrm - 1.0) > CLIP_TOL:
        raise ValueError(f"z grid clips the evolved state (norm {nrm:.8f})")

    p_pm = {}
    for lam in (+1, -1):
        proj = _packet(pz, lam, cfg)
        amp = np.einsum("j,ijk->ik", np.conj(proj), state) * dp
        p_pm[lam] = float(np.sum(wx[:, None] * np.abs(amp) ** 2))
    dens_z = np.sum(wx[:, None, None] * np.abs(state) ** 2, axis=(0, 2)) * dp
    up = float(np.sum(dens_z[pz > 0]) + 0.5 * np.sum(dens_z[pz == 0]))
    down = float(np.sum(dens_z[pz < 0]) + 0.5 * np.sum(dens_z[pz == 0]))
    overlap, flag = distinguishability(cfg)
    # z profile of each rest-spin component, projected on phi_x
    profile = np.einsum("i,i,ijk->jk", wx, np.conj(phi), state)
    return ExperimentRecord(p_pm[+1], p_pm[-1], up, down, cfg.p_star, overlap, flag,
                            frame, pz, profile, state, nrm, method)


# interface name kept for callers of the reference API
evolve_appendixD = evolve_split_packet


# --- covariance checks --------------------------------------------------------

@dataclass(frozen=True)
class CovarianceReport:
    fidelity: float
    t_A: float
    t_C: float
    gamma: float


def evolve_covariance_check(sharp_p: float, spin, B_rest, t_A: float, m_A: float = 1.0,
                            m_C: float = 1.0, mu: float = 1.0, E_rest=(0.0, 0.0, 0.0),
                            units: UnitSystem = NATURAL) -> CovarianceReport:
    """Compare evolve-then-transform with transform-then-evolve for a sharp momentum.

    The lab momentum ``sharp_p`` is along x. Path 1 evolves the rest spin under
    mu B_rest.sigma for proper time t_A and applies S_L. Path 2 applies S_L,
    builds the lab fields that produce (E_rest, B_rest) in the rest frame, and
    evolves under the lab Hamiltonian for t_C = gamma t_A.
    """
    if np.ndim(sharp_p) != 0:
        raise ValueError("the covariance check is defined only for a single sharp momentum")
    hbar = units.hbar
    pi = -(m_C / m_A) * float(sharp_p)
    grid_C = MomentumGrid1D.single(pi, m_C, units, "C")
    spin = np.asarray(spin, dtype=complex)
    spin = spin / np.linalg.norm(spin)
    H_A = rest_hamiltonian_from_field(B_rest, mu)
    evolved = expm(-1j * H_A * t_A / hbar) @ spin
    path1 = apply_S_L(RestFrameState(evolved, grid_C, np.ones(1)), m_A, m_C)

    lab = apply_S_L(RestFrameState(spin, grid_C, np.ones(1)), m_A, m_C)
    kin = lorentz.kinematics([float(sharp_p), 0.0, 0.0], m_A, units)
    E_lab, B_lab = lorentz.lab_fields(E_rest, B_rest, kin)
    H_C = lab_hamiltonian(E_lab, B_lab, lab.grid, mu).matrices[0]
    t_C = kin.gamma * t_A
    path2 = lab.with_amplitudes((expm(-1j * H_C * t_C / hbar) @ lab.amplitudes[0])[None, :])
    fid = abs(inner_product(path1, path2)) ** 2
    return CovarianceReport(float(fid), float(t_A), float(t_C), kin.gamma)


def branch_kicks(n_hat, B0: float, alpha: float, mu: float, t: float, p_x: float,
                 mass: float, frame: str, units: UnitSystem = NATURAL, r0=(0.0, 0.0, 0.0)):
    """Momentum kick -t grad_r <H(r)>_lambda for the +1 and -1 branches; shape (2, 3).

    The lab run uses the lab gradient field (B0 - alpha r.n) n with E = 0 and
    Xi_n branches; the rest run uses the rest-frame field that this lab field
    produces at momentum p_x, coupled to sigma with n.sigma branches. Time is
    lab time t in the lab and proper time t/gamma in the rest frame.
    """
    n = _unit(n_hat)
    kin = lorentz.kinematics([p_x, 0.0, 0.0], mass, units)
    grid = MomentumGrid1D.single(p_x, mass, units, "A")
    if frame == "C":
        vecs = xi_z_branches(grid, n)[0]
        duration = t
    elif frame == "A":
        _, v = np.linalg.eigh(np.einsum("i,ijk->jk", n, SIGMA))
        vecs = v[:, ::-1]
        duration = t / kin.gamma
    else:
        raise ValueError(f"unknown frame {frame!r}")

    def energies(r):
        B_lab = (B0 - alpha * (np.asarray(r) @ n)) * n
        if frame == "C":
            H = lab_hamiltonian(np.zeros(3), B_lab, grid, mu).matrices[0]
        else:
            H = rest_hamiltonian_from_field(lorentz.transform_field(np.zeros(3), B_lab, kin), mu)
        return np.real(np.einsum("jl,jk,kl->l", np.conj(vecs), H, vecs))

    r0 = np.asarray(r0, dtype=float)
    grad = np.empty((2, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = 1.0
        grad[:, k] = (energies(r0 + e) - energies(r0 - e)) / 2
    return -duration * grad


def deflection_directions(n_hat, p_x: float, mass: float = 1.0, B0: float = 1.0,
                          alpha: float = 1.0, mu: float = 1.0, t: float = 1.0,
                          units: UnitSystem = NATURAL) -> dict:
    """Unit kick directions per branch in both frames, {'C': (2, 3), 'A': (2, 3)}."""
    out = {}
    for frame in ("C", "A"):
        k = branch_kicks(n_hat, B0, alpha, mu, t, p_x, mass, frame, units)
        out[frame] = k / np.linalg.norm(k, axis=1, keepdims=True)
    return out
