"""Scenario execution and result emission.

Every runner returns a :class:`ResultBundle` holding one :class:`Check` per
asserted property (residual, tolerance, pass flag), scalar values, and
tabular series for plotting. Outputs are deterministic for a fixed scenario
and seed; wall-clock runtime is kept on the bundle but not written to disk
unless asked for, so repeated runs emit byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, galilean, lorentz, qrf, spinops, sterngerlach as sg
from .scenario import Scenario
from .statekit import MomentumGrid1D, SpinorField, UnitSystem, inner_product, norm, sharp_state

SUMMARY_SCHEMA_VERSION = 1
FORMATS = ("summary-json", "series-csv", "both")
SERIES_COLUMNS = {
    "theta_sweep": ["theta", "p_plus", "p_minus", "overlap"],
    "packet": ["p_z", "re_up", "im_up", "re_down", "im_down"],
    "lab_state": ["p_A", "re_up", "im_up", "re_down", "im_down"],
    "covariance": ["p", "gamma", "t_A", "t_C", "fidelity"],
    "galilean": ["frame", "entropy", "norm"],
}


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tolerance: float
    passed: bool
    note: str = ""


@dataclass
class ResultBundle:
    name: str
    kind: str
    scenario: dict
    checks: list = field(default_factory=list)
    values: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    runtime_s: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, residual, tolerance: float, note: str = "") -> Check:
        if any(c.name == name for c in self.checks):
            raise ValueError(f"check {name!r} recorded twice")
        residual = float(residual)
        c = Check(name, residual, float(tolerance), bool(residual <= tolerance), note)
        self.checks.append(c)
        return c

    def add_series(self, name: str, rows):
        self.series[name] = [[_plain(v) for v in row] for row in rows]

    def summary(self, include_runtime: bool = False) -> dict:
        out = {
            "schema_version": SUMMARY_SCHEMA_VERSION,
            "name": self.name,
            "kind": self.kind,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "residual": c.residual, "tolerance": c.tolerance,
                 "passed": c.passed, "note": c.note}
                for c in self.checks
            ],
            "values": {k: _plain(v) for k, v in self.values.items()},
            "provenance": {"package": "relqrf", "version": __version__,
                           "numpy": np.__version__},
            "scenario": self.scenario,
        }
        if include_runtime:
            out["provenance"]["runtime_s"] = self.runtime_s
        return out


def _plain(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)) and not isinstance(v, bool):
        return int(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    return v


def _units(s: Scenario) -> UnitSystem:
    return UnitSystem(**s.units)


def _bloch_spinor(direction) -> np.ndarray:
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    theta = math.acos(max(-1.0, min(1.0, n[2])))
    phi = math.atan2(n[1], n[0])
    return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])


def _random_spinor(rng) -> np.ndarray:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def _random_unit(rng, n=3) -> np.ndarray:
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)


# --- runners ------------------------------------------------------------------

def run_sterngerlach(s: Scenario, b: ResultBundle):
    p = s.params
    units = _units(s)
    tol = p["tolerances"]
    t = p["kick"] * units.hbar * p["s_z"] / (p["alpha"] * p["mu"])

    def config(theta, time_):
        return sg.SternGerlachConfig(
            theta=theta, mu=p["mu"], B0=p["B0"], alpha=p["alpha"], s_z=p["s_z"], t=time_,
            n_hat=tuple(p["n_hat"]), m_A=p["m_A"], px_center=p["px"]["center"],
            px_std=p["px"]["std"], px_count=p["px"]["count"], z_count=p["z"]["count"],
            z_margin=p["z"]["margin"], units=units, exploratory=p["exploratory"])

    rows, law, agree, frames, spectral, flight = [], 0.0, 0.0, 0.0, 0.0, 0.0
    packet_rows = None
    for theta in p["theta"]:
        cfg = config(theta, t)
        rec = sg.evolve_split_packet(cfg)
        rows.append([theta, rec.p_plus, rec.p_minus, rec.overlap])
        # overlapping packets make each projection pick up part of the other branch
        ov2 = rec.overlap ** 2
        c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
        c2, s2 = c2 + s2 * ov2, s2 + c2 * ov2
        law = max(law, abs(rec.p_plus - c2), abs(rec.p_minus - s2))
        agree = max(agree, abs(rec.p_plus_halfline - rec.p_plus),
                    abs(rec.p_minus_halfline - rec.p_minus))
        rest = sg.evolve_split_packet(cfg, frame="A")
        frames = max(frames, abs(rest.p_plus - rec.p_plus), abs(rest.p_minus - rec.p_minus))
        fft = sg.evolve_split_packet(cfg, method="spectral")
        spectral = max(spectral, float(np.max(np.abs(fft.state - rec.state))))
        up, down = sg.free_flight_halfline(rec.z_profile, rec.p_z, cfg, p["flight_time"])
        flight = max(flight, abs(up - rec.p_plus_halfline), abs(down - rec.p_minus_halfline))
        if packet_rows is None:
            packet_rows = [[pz, a[0].real, a[0].imag, a[1].real, a[1].imag]
                           for pz, a in zip(rec.p_z, rec.z_profile)]
    b.add_series("theta_sweep", rows)
    b.add_series("packet", packet_rows)
    b.values.update({"t": t, "p_star": p["kick"] * p["s_z"],
                     "threshold_time": units.hbar * p["s_z"] / (p["alpha"] * p["mu"])})

    separated = math.exp(-p["kick"] ** 2 / 2) <= tol["probability"]
    note = "" if separated else "packets overlap: compared with overlap-corrected projections"
    b.check("probability_law", law, tol["probability"], note)
    if separated:
        b.check("halfline_projector_agreement", agree, tol["probability"])
        b.check("free_flight_halfline", flight, tol["probability"])
    else:
        b.values["halfline_projector_deviation"] = agree
        b.values["free_flight_halfline_deviation"] = flight
    b.check("rest_lab_probability_agreement", frames, tol["probability"])
    b.check("spectral_vs_analytic", spectral, tol["spectral"])

    theta0 = p["theta"][0]
    ov0, flag0 = sg.distinguishability(config(theta0, 0.0))
    b.check("overlap_at_t0", abs(ov0 - 1.0) + (1.0 if flag0 else 0.0), tol["overlap_closed_form"])
    t10 = 10 * units.hbar * p["s_z"] / (p["alpha"] * p["mu"])
    ov10, flag10 = sg.distinguishability(config(theta0, t10))
    b.check("overlap_at_10_thresholds", ov10 + (0.0 if flag10 else 1.0), tol["overlap_separated"])
    cf = 0.0
    for k in (0.5, 1.0, 2.0, p["kick"], 10.0):
        c = config(theta0, k * units.hbar * p["s_z"] / (p["alpha"] * p["mu"]))
        cf = max(cf, abs(sg.distinguishability(c)[0] - sg.closed_form_overlap(c)))
    b.check("overlap_closed_form_vs_quadrature", cf, tol["overlap_closed_form"])
    b.values["overlap_at_threshold"] = sg.closed_form_overlap(
        config(theta0, units.hbar * p["s_z"] / (p["alpha"] * p["mu"])))

    if p["exploratory"]:
        b.values["deflection"] = "not asserted for a tilted field direction"
        return
    if t == 0.0:
        b.values["deflection"] = "not asserted: no kick at t = 0"
        return
    n = np.asarray(p["n_hat"], dtype=float)
    n = n / np.linalg.norm(n)
    worst = 0.0
    half = 8 * p["px"]["std"]
    for px in (p["px"]["center"] - half, p["px"]["center"], p["px"]["center"] + half):
        d = sg.deflection_directions(n, px, p["m_A"], p["B0"], p["alpha"], p["mu"], t, units)
        expected = np.array([n, -n])
        worst = max(worst, float(np.max(np.abs(d["C"] - d["A"]))),
                    float(np.max(np.abs(d["C"] - expected))))
        if not np.all(np.isfinite(d["C"])) or not np.all(np.isfinite(d["A"])):
            worst = math.inf
    b.check("deflection_direction_preserved", worst, tol["deflection"])


def run_algebra(s: Scenario, b: ResultBundle):
    p = s.params
    units = _units(s)
    tol = p["tolerances"]
    mass = p["mass"]
    g = p["grid"]
    grid = MomentumGrid1D.linspace(g["min"], g["max"], g["count"], mass, units, "A")
    rng = np.random.default_rng(s.seed)
    rand_p = rng.normal(size=(p["random_momenta"], 3)) * p["momentum_scale"] * mass * units.c

    xi = [spinops.xi_field(grid, mass, a) for a in "xyz"]
    sig = [spinops.pauli(a, grid) for a in "xyz"]
    b.check("su2_xi", spinops.su2_residual(xi), tol["su2"])
    b.check("su2_sigma", spinops.su2_residual(sig), tol["su2"])
    eig = max(float(np.max(np.abs(x.eigenvalues() - np.array([-1.0, 1.0])))) for x in xi)
    b.check("xi_eigenvalues", eig, tol["eigenvalues"])
    cons = max(spinops.constraint_residual(grid.p_vectors(), mass, units),
               spinops.constraint_residual(rand_p, mass, units))
    b.check("covariant_constraint", cons, tol["constraint"])

    cov = spinops.xi_matrices_covariant(rand_p, mass, units)
    b.check("xi_collapse", float(np.max(np.abs(cov - spinops.SIGMA[None]))), tol["collapse"])
    comp = spinops.xi_matrices_from_boost(rand_p, mass, units)
    b.check("xi_boost_composition", float(np.max(np.abs(comp - spinops.SIGMA[None]))), tol["boost"])
    closed = spinops.pauli_lubanski_matrices(rand_p, mass, units)
    from_boost = spinops.pauli_lubanski_from_boost(rand_p, mass, units)
    b.check("pauli_lubanski_boost_form", float(np.max(np.abs(closed - from_boost))), tol["boost"])
    gamma, beta = lorentz.gamma_beta(rand_p, mass, units)
    gbs = gamma[:, None, None] * np.einsum("ni,ijk->njk", beta, spinops.SIGMA)
    s_dot_b = np.einsum("nijk,ni->njk", closed[:, 1:], beta)
    b.check("sigma0_relation", max(float(np.max(np.abs(closed[:, 0] - gbs))),
                                   float(np.max(np.abs(s_dot_b - gbs)))), tol["collapse"])

    L = lorentz.boost_matrix(rand_p, mass, units)
    Linv = lorentz.boost_matrix(-rand_p, mass, units)
    b.check("boost_metric", lorentz.metric_residual(L), tol["boost"])
    b.check("boost_determinant", float(np.max(np.abs(np.linalg.det(L) - 1.0))), tol["boost"])
    b.check("boost_inverse", float(np.max(np.abs(Linv @ L - np.eye(4)))), tol["boost"])

    E, B = np.asarray(p["field"]["E"]), np.asarray(p["field"]["B"])
    target = lab_h0_target(E, B, grid)
    sigma_fields = spinops.pauli_lubanski(grid)
    vel = sg.covariant_h0(lorentz.faraday(E, B), sigma_fields, grid, "velocity").matrices
    b.check("h0_velocity_contraction", float(np.max(np.abs(vel - target))), tol["h0"])
    if abs(B[0]) == 0.0:
        F_rest = sg.rest_tensor_field(E, B, grid)
        tim = sg.covariant_h0(F_rest, sigma_fields, grid, "time").matrices
        b.check("h0_time_contraction", float(np.max(np.abs(tim - target))), tol["h0"])
    else:
        b.values["h0_time_contraction"] = "not asserted: lab B has a component along the boost"

    small = np.array([[1e-4 * mass * units.c, 0.0, 0.0]])
    nr = spinops.pauli_lubanski_matrices(small, mass, units)[:, 1:] - spinops.SIGMA[None]
    b.check("nonrelativistic_limit", float(np.max(np.abs(nr))), tol["nonrelativistic"])


def lab_h0_target(E, B, grid) -> np.ndarray:
    """gamma H_C / mu on the grid."""
    gamma, _ = lorentz.gamma_beta(grid.p_vectors(), grid.mass, grid.units)
    H = sg.lab_hamiltonian(E, B, grid, 1.0).matrices
    return gamma[:, None, None] * H


def run_transform(s: Scenario, b: ResultBundle):
    p = s.params
    units = _units(s)
    tol = p["tolerances"]
    m_A, m_C = p["m_A"], p["m_C"]
    rng = np.random.default_rng(s.seed)
    gc = p["grid_C"]
    grid_C = MomentumGrid1D.linspace(gc["min"], gc["max"], gc["count"], m_C, units, "C")
    spin = (_bloch_spinor(p["spin_direction"]) if p["spin_direction"] is not None
            else _random_spinor(rng))
    rest = qrf.RestFrameState.gaussian(spin, grid_C, p["packet"]["center"], p["packet"]["std"])
    lab, info = qrf.apply_S_L(rest, m_A, m_C, return_info=True)
    b.values["spin"] = [[z.real, z.imag] for z in spin]
    b.add_series("lab_state", [[pa, a[0].real, a[0].imag, a[1].real, a[1].imag]
                               for pa, a in zip(lab.grid.points, lab.amplitudes)])

    # resampled onto an independent uniform A grid
    half = (m_A / m_C) * max(abs(gc["min"]), abs(gc["max"]))
    other = MomentumGrid1D.linspace(-half, half, 2 * gc["count"] + 1, m_A, units, "A")
    resampled, rinfo = qrf.apply_S_L(rest, m_A, m_C, target_grid=other, return_info=True)
    b.check("norm_preservation", max(abs(norm(lab) - 1.0), abs(norm(resampled) - 1.0),
                                     rinfo["interpolation_residual"]), tol["norm"])
    b.values["resampling_method"] = rinfo["method"]
    b.values["measure_jacobian_residual"] = info["jacobian_residual"]

    rest_field = rest.to_field()
    worst = 0.0
    for a in "xyz":
        lab_val = spinops.expectation(spinops.xi_field(lab.grid, axis=a), lab)
        rest_val = spinops.expectation(spinops.pauli(a, grid_C), rest_field)
        worst = max(worst, abs(lab_val - rest_val))
    b.check("expectation_transport", worst, tol["transport"])

    other_rest = qrf.RestFrameState.gaussian(_random_spinor(rng), grid_C, -0.4, 1.1).to_field()
    other_lab = qrf.apply_S_L(other_rest, m_A, m_C)
    b.check("inner_product_preservation",
            abs(inner_product(other_lab, lab) - inner_product(other_rest, rest_field)), tol["transport"])

    n = _random_unit(rng)
    P = np.broadcast_to(qrf.spin_projector(n), (len(grid_C), 2, 2))
    report = qrf.probability_conservation_report(rest, P, "A->C", m_A, m_C)
    lab_p = qrf.lab_spin_probability(lab, n)
    b.values["probability_before"] = report.p_before
    b.check("probability_conservation",
            max(report.residual, abs(lab_p - report.p_before)), tol["probability"])

    back = qrf.pullback(lab, m_A, m_C)
    b.check("roundtrip", 1.0 - abs(inner_product(back, rest_field)) ** 2, tol["roundtrip"])

    # sharp-momentum battery
    idx = np.sort(rng.choice(len(grid_C), size=min(p["battery_size"], len(grid_C)), replace=False))
    spins = [_random_spinor(rng) for _ in idx]
    amps = rng.normal(size=idx.size) + 1j * rng.normal(size=idx.size)
    amps /= np.linalg.norm(amps)
    terms = qrf.rest_basis_terms(grid_C.points[idx], spins, amps, m_A, m_C, units)
    ext = qrf.drop_frame_register(qrf.apply_S_ext(terms, m_A, m_C, units), lab.grid)
    superpos = sum((a * sharp_state(grid_C, i, sp, frame="A") for i, sp, a in zip(idx, spins, amps)),
                   SpinorField(grid_C, np.zeros((len(grid_C), 2)), "A"))
    direct = qrf.apply_S_L(superpos, m_A, m_C)
    b.check("sext_equivalence", float(np.max(np.abs(ext.orthonormal() - direct.orthonormal()))),
            tol["equivalence"])
    v_lab = lorentz.velocity(np.c_[lab.grid.points[::-1][idx], np.zeros((idx.size, 2))], m_A, units)
    v_C = lorentz.velocity(np.c_[grid_C.points[idx], np.zeros((idx.size, 2))], m_C, units)
    b.check("velocity_map", float(np.max(np.abs(v_lab[:, 0] + v_C[:, 0]))) / units.c, tol["equivalence"])

    f = p["field"]
    nf = np.asarray(f["n_hat"], dtype=float)
    nf = nf / np.linalg.norm(nf)
    if abs(nf[0]) > 1e-12:
        b.values["hamiltonian_conjugation"] = "not asserted: field direction not orthogonal to the boost"
    else:
        H_C = sg.lab_hamiltonian(np.zeros(3), f["B"] * nf, lab.grid, f["mu"])
        H_A = sg.rest_hamiltonian(f["B"], nf, f["mu"])
        worst = 0.0
        for i in idx:
            basis = [qrf.apply_S_L(sharp_state(grid_C, i, e, frame="A"), m_A, m_C) for e in np.eye(2)]
            moved = [spinops.apply(H_C, v) for v in basis]
            M = np.array([[inner_product(basis[a], moved[c]) for c in range(2)] for a in range(2)])
            worst = max(worst, float(np.max(np.abs(M - H_A))))
        b.check("hamiltonian_conjugation", worst, tol["hamiltonian"])
        # covariant form of the same Hamiltonian on the lab grid
        h0 = sg.covariant_h0(lorentz.faraday(np.zeros(3), f["B"] * nf),
                             spinops.pauli_lubanski(lab.grid), lab.grid, "velocity").matrices
        target = lab_h0_target(np.zeros(3), f["B"] * nf, lab.grid)
        b.check("h0_covariant_form", float(np.max(np.abs(h0 - target))), tol["hamiltonian"])
        # evolve-then-transform against transform-then-evolve with t_C = gamma t_A
        fid = min(sg.evolve_covariance_check(
            lab.grid.points[::-1][i], sp, f["B"] * nf, 0.7, m_A, m_C, f["mu"], units=units).fidelity
            for i, sp in zip(idx, spins))
        b.check("two_path_evolution", 1.0 - fid, tol["hamiltonian"])
        spec_C = np.linalg.eigvalsh(H_C.matrices)
        spec_A = np.linalg.eigvalsh(H_A)
        b.check("hamiltonian_spectrum", float(np.max(np.abs(spec_C - spec_A[None]))), tol["hamiltonian"])

    up = qrf.apply_S_L(qrf.RestFrameState(np.array([1, 0]), grid_C, rest.psi), m_A, m_C)
    down = qrf.apply_S_L(qrf.RestFrameState(np.array([0, 1]), grid_C, rest.psi), m_A, m_C)
    mixed = qrf.apply_S_L(qrf.RestFrameState(np.array([1, 1]), grid_C, rest.psi), m_A, m_C)
    expected = {"H0": up, "H1": down, "neither": mixed}
    wrong = sum(spinops.classify_subspace(st) != lbl or qrf.pullback_class(st, m_A, m_C) != lbl
                for lbl, st in expected.items())
    b.check("subspace_classifier", wrong, 0.0)

    entangled = qrf.apply_S_L(
        (qrf.RestFrameState(np.array([1, 0]), grid_C, rest.psi).to_field()
         + qrf.RestFrameState.gaussian(np.array([0, 1]), grid_C, -1.5, 0.5).to_field()) * (1 / math.sqrt(2)),
        m_A, m_C)
    try:
        qrf.apply_S_L_inverse(entangled * (1 / norm(entangled)), m_A, m_C)
        detected, resid = 0.0, 0.0
    except qrf.NotFactorizableError as exc:
        detected, resid = 1.0, exc.residual
    b.values["entangled_schmidt_residual"] = resid
    b.check("entangled_pullback_detected", 1.0 - detected, 0.0)


def run_galilean(s: Scenario, b: ResultBundle):
    p = s.params
    tol = p["tolerances"]
    dx, n = p["dx"], p["sites"]
    grid = galilean.lattice(-n, n, dx)
    for key in ("x1", "x2", "x0"):
        if abs(round(p[key] / dx) * dx - p[key]) > 1e-9 * dx or abs(p[key]) > n * dx:
            raise ValueError(f"{key}={p[key]} must be a lattice site within the grid")
    state = galilean.sharp_superposition([p["x1"], p["x2"]], p["x0"], grid, grid, dx)
    out = galilean.galilean_transform(state)
    s_before = galilean.entanglement_entropy(state)
    s_after = galilean.entanglement_entropy(out)
    b.check("entropy_before", s_before, tol["entropy"])
    expected_after = math.log(2) if p["x1"] != p["x2"] else 0.0
    b.check("entropy_after", abs(s_after - expected_after), tol["entropy"])

    exp_amp = np.zeros_like(out.amplitudes)
    for x in (p["x1"], p["x2"]):
        i = int(np.argmin(np.abs(out.x1 - (p["x0"] - x))))
        j = int(np.argmin(np.abs(out.x2 + x)))
        exp_amp[i, j] += 1 / (math.sqrt(2) * dx)
    b.check("transformed_state", float(np.max(np.abs(out.amplitudes - exp_amp))) * dx, tol["roundtrip"])

    back = galilean.galilean_inverse(out, grid, grid)
    b.check("roundtrip", float(np.max(np.abs(back.amplitudes - state.amplitudes))) * dx
            + galilean.entanglement_entropy(back), tol["roundtrip"])
    b.check("norm_preservation", abs(out.norm() - 1.0), tol["roundtrip"])

    P = np.diag((np.repeat(grid[:, None] > 0, grid.size, axis=1)
                 | (grid[None, :] > 0)).ravel().astype(float))
    rep = qrf.probability_conservation_report(state, P, "C->A")
    b.values["probability_before"] = rep.p_before
    b.check("probability_conservation", rep.residual, tol["probability"])
    b.add_series("galilean", [["C", s_before, state.norm()], ["A", s_after, out.norm()],
                              ["C(roundtrip)", galilean.entanglement_entropy(back), back.norm()]])


def run_covariance(s: Scenario, b: ResultBundle):
    p = s.params
    units = _units(s)
    rng = np.random.default_rng(s.seed)
    momenta = list(p["momenta"]) + list(rng.uniform(-3, 3, size=p["random_momenta"]) * p["m_A"] * units.c)
    rows, worst = [], 0.0
    for k, mom in enumerate(momenta):
        spin = np.array([1.0, 0.0]) if k == 0 else _random_spinor(rng)
        rep = sg.evolve_covariance_check(mom, spin, p["B_rest"], p["t_A"], p["m_A"], p["m_C"],
                                         p["mu"], p["E_rest"], units)
        rows.append([mom, rep.gamma, rep.t_A, rep.t_C, rep.fidelity])
        worst = max(worst, abs(1.0 - rep.fidelity))
    b.add_series("covariance", rows)
    b.check("two_path_fidelity", worst, p["tolerances"]["fidelity"])


RUNNERS = {
    "sterngerlach": run_sterngerlach,
    "algebra-check": run_algebra,
    "transform": run_transform,
    "galilean-demo": run_galilean,
    "covariance-check": run_covariance,
}


class RunError(RuntimeError):
    pass


def run(scenario: Scenario) -> ResultBundle:
    bundle = ResultBundle(scenario.name, scenario.kind, scenario.echo())
    start = time.perf_counter()
    try:
        RUNNERS[scenario.kind](scenario, bundle)
    except (ValueError, ArithmeticError, AssertionError) as exc:
        raise RunError(f"scenario {scenario.name!r} ({scenario.kind}): {exc}") from exc
    bundle.runtime_s = time.perf_counter() - start
    return bundle


# --- emission -----------------------------------------------------------------

def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def series_csv(name: str, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SERIES_COLUMNS[name])
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def emit(bundle: ResultBundle, fmt: str, out_dir, include_runtime: bool = False) -> list:
    """Write the summary JSON and/or one CSV per series; returns the paths written."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {', '.join(FORMATS)}")
    out_dir = Path(out_dir)
    written = []
    try:
        if fmt in ("summary-json", "both"):
            path = out_dir / f"{bundle.name}.summary.json"
            text = json.dumps(bundle.summary(include_runtime), indent=2) + "\n"
            _atomic_write(path, text)
            written.append(path)
        if fmt in ("series-csv", "both"):
            for name, rows in bundle.series.items():
                path = out_dir / f"{bundle.name}.{name}.csv"
                _atomic_write(path, series_csv(name, rows))
                written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write results to {out_dir}: {exc}") from exc
    return written
