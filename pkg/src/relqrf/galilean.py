"""Galilean quantum reference frame change between two position descriptions.

Frame C describes particles A and B by positions (x_A, x_B); frame A
describes B and C by (q_B, q_C). The change of frame is a controlled
translation followed by a parity swap,

    (x_A, x_B)  ->  (q_B, q_C) = (x_B - x_A, -x_A),

so amplitude at lattice site (i_A, i_B) moves to (i_B - i_A, -i_A). Grids
are uniform with a shared spacing dx and sites at integer multiples of dx,
which keeps the map an exact relabeling. Quadrature is the plain sum with
weight dx per particle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FRAME_PARTIES = {"C": ("A", "B"), "A": ("B", "C")}


class ClippingError(ValueError):
    pass


def lattice(lo: int, hi: int, dx: float) -> np.ndarray:
    return np.arange(lo, hi + 1) * dx


def _indices(points: np.ndarray, dx: float) -> np.ndarray:
    k = np.rint(points / dx).astype(int)
    if np.max(np.abs(k * dx - points)) > 1e-9 * dx:
        raise ValueError("grid points must be integer multiples of dx")
    if k.size > 1 and not np.all(np.diff(k) == 1):
        raise ValueError("grid must be uniform with spacing dx")
    return k


@dataclass(frozen=True, eq=False)
class GalileanTwoParticleState:
    """Joint position amplitude psi(x_1, x_2) for the two parties visible in ``frame``."""

    x1: np.ndarray
    x2: np.ndarray
    amplitudes: np.ndarray
    dx: float
    frame: str = "C"

    def __post_init__(self):
        if self.frame not in FRAME_PARTIES:
            raise ValueError(f"frame must be one of {sorted(FRAME_PARTIES)}")
        x1 = np.asarray(self.x1, dtype=float)
        x2 = np.asarray(self.x2, dtype=float)
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (x1.size, x2.size):
            raise ValueError("amplitude matrix must be (len(x1), len(x2))")
        _indices(x1, self.dx)
        _indices(x2, self.dx)
        object.__setattr__(self, "x1", x1)
        object.__setattr__(self, "x2", x2)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def parties(self):
        return FRAME_PARTIES[self.frame]

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)) * self.dx)

    def orthonormal(self) -> np.ndarray:
        return (self.amplitudes * self.dx).ravel()


def sharp_superposition(x1_values, x2_value, x1_grid, x2_grid, dx, frame="C"):
    """(sum_k |x1_k>) |x2> / sqrt(K) with sharp sites of amplitude 1/sqrt(dx) each."""
    amp = np.zeros((len(x1_grid), len(x2_grid)), dtype=complex)
    j = int(np.argmin(np.abs(np.asarray(x2_grid) - x2_value)))
    for x in x1_values:
        i = int(np.argmin(np.abs(np.asarray(x1_grid) - x)))
        amp[i, j] += 1.0
    amp /= np.sqrt(len(x1_values)) * dx
    return GalileanTwoParticleState(x1_grid, x2_grid, amp, dx, frame)


def _output_grids(state, forward: bool):
    dx = state.dx
    k1 = _indices(state.x1, dx)
    k2 = _indices(state.x2, dx)
    if forward:
        # (x_A, x_B) -> (x_B - x_A, -x_A)
        g1 = lattice(k2[0] - k1[-1], k2[-1] - k1[0], dx)
        g2 = lattice(-k1[-1], -k1[0], dx)
    else:
        # (q_B, q_C) -> (-q_C, q_B - q_C)
        g1 = lattice(-k2[-1], -k2[0], dx)
        g2 = lattice(k1[0] - k2[-1], k1[-1] - k2[0], dx)
    return g1, g2


def _relabel(state, forward: bool, out1=None, out2=None):
    dx = state.dx
    d1, d2 = _output_grids(state, forward)
    out1 = d1 if out1 is None else np.asarray(out1, dtype=float)
    out2 = d2 if out2 is None else np.asarray(out2, dtype=float)
    o1 = _indices(out1, dx)
    o2 = _indices(out2, dx)
    k1 = _indices(state.x1, dx)[:, None]
    k2 = _indices(state.x2, dx)[None, :]
    if forward:
        t1, t2 = k2 - k1, -k1 + 0 * k2
    else:
        t1, t2 = -k2 + 0 * k1, k1 - k2
    r1 = t1 - o1[0]
    r2 = t2 - o2[0]
    inside = (r1 >= 0) & (r1 < o1.size) & (r2 >= 0) & (r2 < o2.size)
    clipped = float(np.sum(np.abs(state.amplitudes[~inside]) ** 2) * dx * dx)
    if clipped > 1e-12:
        raise ClippingError(f"output grid clips {clipped:.3e} of the norm")
    out = np.zeros((o1.size, o2.size), dtype=complex)
    out[r1[inside], r2[inside]] = state.amplitudes[inside]
    return out1, out2, out, (r1, r2, inside)


def galilean_transform(state: GalileanTwoParticleState, out_q_B=None, out_q_C=None):
    """Change from C's description of (A, B) to A's description of (B, C)."""
    if state.frame != "C":
        raise ValueError("galilean_transform expects a state in frame C")
    g1, g2, amp, _ = _relabel(state, True, out_q_B, out_q_C)
    return GalileanTwoParticleState(g1, g2, amp, state.dx, "A")


def galilean_inverse(state: GalileanTwoParticleState, out_x_A=None, out_x_B=None):
    if state.frame != "A":
        raise ValueError("galilean_inverse expects a state in frame A")
    g1, g2, amp, _ = _relabel(state, False, out_x_A, out_x_B)
    return GalileanTwoParticleState(g1, g2, amp, state.dx, "C")


def galilean_matrix(state: GalileanTwoParticleState) -> np.ndarray:
    """The frame change as an isometry in orthonormal coordinates, for ``state``'s grids."""
    forward = state.frame == "C"
    g1, g2, _, (r1, r2, inside) = _relabel(state, forward)
    n1, n2 = state.x1.size, state.x2.size
    U = np.zeros((g1.size * g2.size, n1 * n2))
    rows = (r1 * g2.size + r2)[inside]
    cols = (np.arange(n1)[:, None] * n2 + np.arange(n2)[None, :])[inside]
    U[rows, cols] = 1.0
    return U


def entanglement_entropy(state: GalileanTwoParticleState, tol: float = 1e-10) -> float:
    """Von Neumann entropy (natural log) of either party's reduced state."""
    if abs(state.norm() - 1.0) > tol:
        raise ValueError("entanglement_entropy needs a normalized state")
    return schmidt_entropy(state.amplitudes * state.dx)


def schmidt_entropy(matrix) -> float:
    s = np.linalg.svd(np.asarray(matrix), compute_uv=False)
    p = s ** 2
    p = p[p > 1e-300] / np.sum(p)
    return float(max(0.0, -np.sum(p * np.log(p))))
