"""Discretized one-particle states on momentum grids.

Amplitudes live on a 1D momentum axis (the boost direction) with weights
realizing the Lorentz-covariant measure

    dmu(p) = dp / ((2 pi)^(1/2) sqrt(2 (m^2 c^2 + p^2)))

via the trapezoid rule. Spin amplitudes are stored in the rest-spin label
basis |p; Sigma_p(lambda)>, so a two-component amplitude c_lambda(p_i) sits on
every grid point. The transverse (z) direction is nonrelativistic and uses a
plain uniform grid with flat weights.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

NORM_TOL = 1e-12


class GridError(ValueError):
    pass


class StateMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class UnitSystem:
    hbar: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.c > 0):
            raise ValueError(f"hbar and c must be positive, got hbar={self.hbar}, c={self.c}")


NATURAL = UnitSystem()


def _check_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 1 or pts.size < 1:
        raise GridError("points must be a non-empty 1D array")
    if pts.size > 1 and not np.all(np.diff(pts) > 0):
        raise GridError("momentum points must be strictly increasing")
    return pts


def measure_density(points, mass: float, units: UnitSystem = NATURAL) -> np.ndarray:
    """Density of the covariant measure, 1 / ((2 pi)^(1/2) sqrt(2 (m^2 c^2 + p^2)))."""
    p = np.asarray(points, dtype=float)
    mc = mass * units.c
    return 1.0 / (np.sqrt(2 * np.pi) * np.sqrt(2.0 * (mc * mc + p * p)))


def trapezoid_widths(points) -> np.ndarray:
    """Trapezoid cell widths with half-weighted endpoints.

    A single point gets width 1, which is how sharp-momentum states are
    carried (see :func:`sharp_state`).
    """
    pts = np.asarray(points, dtype=float)
    if pts.size == 1:
        return np.ones(1)
    d = np.diff(pts)
    widths = np.empty_like(pts)
    widths[0] = d[0] / 2
    widths[-1] = d[-1] / 2
    widths[1:-1] = (d[:-1] + d[1:]) / 2
    return widths


def build_measure(points, mass: float, units: UnitSystem = NATURAL) -> np.ndarray:
    pts = _check_points(points)
    if not mass > 0:
        raise GridError(f"mass must be positive, got {mass}")
    return trapezoid_widths(pts) * measure_density(pts, mass, units)


@dataclass(frozen=True, eq=False)
class MomentumGrid1D:
    """Sampled momentum axis carrying covariant quadrature weights.

    Weights are always re-derived from ``points`` and ``mass`` so the two can
    never drift apart.
    """

    points: np.ndarray
    mass: float
    units: UnitSystem = NATURAL
    label: str = ""
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pts = _check_points(self.points)
        pts.setflags(write=False)
        w = build_measure(pts, self.mass, self.units)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def linspace(cls, pmin: float, pmax: float, count: int, mass: float,
                 units: UnitSystem = NATURAL, label: str = "") -> "MomentumGrid1D":
        return cls(np.linspace(pmin, pmax, int(count)), mass, units, label)

    @classmethod
    def single(cls, p: float, mass: float, units: UnitSystem = NATURAL,
               label: str = "") -> "MomentumGrid1D":
        return cls(np.array([float(p)]), mass, units, label)

    def __len__(self):
        return self.points.size

    def same_as(self, other: "MomentumGrid1D") -> bool:
        return (self is other) or (
            self.points.shape == other.points.shape
            and np.array_equal(self.points, other.points)
            and self.mass == other.mass
            and self.units == other.units
        )

    def refined(self) -> "MomentumGrid1D":
        """Grid with every cell split in two."""
        pts = self.points
        mids = (pts[:-1] + pts[1:]) / 2
        new = np.empty(pts.size + mids.size)
        new[0::2] = pts
        new[1::2] = mids
        return MomentumGrid1D(new, self.mass, self.units, self.label)

    def p_vectors(self) -> np.ndarray:
        """3-momenta (N, 3) with the grid along x."""
        out = np.zeros((len(self), 3))
        out[:, 0] = self.points
        return out


@dataclass(frozen=True)
class GaussianDescriptor:
    center: float
    std: float

    def __call__(self, p) -> np.ndarray:
        return gaussian_amplitude(p, self.center, self.std)


def gaussian_amplitude(p, center: float, std: float) -> np.ndarray:
    """(2 pi s^2)^(-1/4) exp(-(p - center)^2 / (4 s^2)); |psi|^2 has std ``std``."""
    if not std > 0:
        raise ValueError(f"std must be positive, got {std}")
    p = np.asarray(p, dtype=float)
    return (2 * np.pi * std ** 2) ** -0.25 * np.exp(-((p - center) ** 2) / (4 * std ** 2))


def gaussian_packet(grid, center: float, std: float) -> np.ndarray:
    """Sample the gaussian packet on a grid (a MomentumGrid1D or raw points)."""
    pts = grid.points if hasattr(grid, "points") else np.asarray(grid, dtype=float)
    return gaussian_amplitude(pts, center, std).astype(complex)


@dataclass(frozen=True, eq=False)
class TransverseWavepacket:
    """Nonrelativistic packet along z on a uniform grid with flat weights dp."""

    points: np.ndarray
    amplitudes: np.ndarray
    descriptor: Optional[GaussianDescriptor] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        amp = np.asarray(self.amplitudes, dtype=complex)
        if pts.ndim != 1 or pts.size < 2:
            raise GridError("transverse grid needs at least two points")
        d = np.diff(pts)
        if not np.all(d > 0) or not np.allclose(d, d[0], rtol=1e-10, atol=0):
            raise GridError("transverse grid must be uniform and increasing")
        if amp.shape != pts.shape:
            raise GridError("amplitude count must match grid size")
        if self.descriptor is not None:
            ref = self.descriptor(pts)
            if np.max(np.abs(amp - ref)) > 1e-12:
                raise ValueError("amplitudes disagree with the gaussian descriptor")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def gaussian(cls, center: float, std: float, half_width: float, count: int):
        pts = np.linspace(center - half_width, center + half_width, int(count))
        desc = GaussianDescriptor(center, std)
        return cls(pts, desc(pts).astype(complex), desc)

    @property
    def dp(self) -> float:
        return float(self.points[1] - self.points[0])

    def norm(self) -> float:
        return float(np.sqrt(self.dp * np.sum(np.abs(self.amplitudes) ** 2)))


@dataclass(frozen=True, eq=False)
class SpinorField:
    """Two-component amplitudes per momentum point, tagged with a frame.

    ``amplitudes`` has shape (N, 2); column lambda holds c_lambda(p_i).
    """

    grid: MomentumGrid1D
    amplitudes: np.ndarray
    frame: str = "C"
    zpart: Optional[TransverseWavepacket] = None

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex)
        if amp.shape != (len(self.grid), 2):
            raise StateMismatchError(
                f"amplitudes must have shape ({len(self.grid)}, 2), got {amp.shape}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def product(cls, grid: MomentumGrid1D, packet, spin, frame: str = "C",
                zpart=None) -> "SpinorField":
        packet = np.asarray(packet, dtype=complex)
        spin = np.asarray(spin, dtype=complex)
        return cls(grid, np.outer(packet, spin), frame, zpart)

    def orthonormal(self) -> np.ndarray:
        """Coordinates sqrt(w_i) c_lambda(p_i), flattened point-major.

        In these coordinates the quadrature inner product is the plain
        Euclidean one.
        """
        return (np.sqrt(self.grid.weights)[:, None] * self.amplitudes).ravel()

    @classmethod
    def from_orthonormal(cls, grid, vec, frame="C", zpart=None) -> "SpinorField":
        vec = np.asarray(vec, dtype=complex).reshape(len(grid), 2)
        return cls(grid, vec / np.sqrt(grid.weights)[:, None], frame, zpart)

    def with_amplitudes(self, amplitudes) -> "SpinorField":
        return SpinorField(self.grid, amplitudes, self.frame, self.zpart)

    def __mul__(self, scalar):
        return self.with_amplitudes(self.amplitudes * scalar)

    __rmul__ = __mul__

    def __add__(self, other: "SpinorField") -> "SpinorField":
        _check_compatible(self, other)
        return self.with_amplitudes(self.amplitudes + other.amplitudes)

    def __sub__(self, other: "SpinorField") -> "SpinorField":
        _check_compatible(self, other)
        return self.with_amplitudes(self.amplitudes - other.amplitudes)


def _check_compatible(a: SpinorField, b: SpinorField):
    if a.frame != b.frame:
        raise StateMismatchError(f"frame mismatch: {a.frame!r} vs {b.frame!r}")
    if not a.grid.same_as(b.grid):
        raise StateMismatchError("states live on different grids")


def inner_product(a: SpinorField, b: SpinorField) -> complex:
    """<a|b> = sum_i w_i sum_lambda conj(a_lambda(p_i)) b_lambda(p_i)."""
    _check_compatible(a, b)
    w = a.grid.weights
    return complex(np.sum(w[:, None] * np.conj(a.amplitudes) * b.amplitudes))


def norm(state: SpinorField) -> float:
    w = state.grid.weights
    return float(np.sqrt(np.sum(w[:, None] * np.abs(state.amplitudes) ** 2)))


def normalize(state: SpinorField) -> SpinorField:
    n = norm(state)
    if n == 0.0:
        raise ValueError("cannot normalize the zero state")
    return state * (1.0 / n)


def is_normalized(state: SpinorField, tol: float = NORM_TOL) -> bool:
    return abs(norm(state) - 1.0) <= tol


def sharp_state(grid: MomentumGrid1D, index: int, spin, frame: str = "C") -> SpinorField:
    """Single-point state: amplitude spin/sqrt(w_i) at ``index``, zero elsewhere."""
    spin = np.asarray(spin, dtype=complex)
    spin = spin / np.linalg.norm(spin)
    amp = np.zeros((len(grid), 2), dtype=complex)
    amp[index] = spin / np.sqrt(grid.weights[index])
    return SpinorField(grid, amp, frame)


def scalar_norm(grid: MomentumGrid1D, psi) -> float:
    psi = np.asarray(psi)
    return float(np.sqrt(np.sum(grid.weights * np.abs(psi) ** 2)))
