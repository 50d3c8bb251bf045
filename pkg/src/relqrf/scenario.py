"""Scenario files: loading, validation and default filling.

A scenario is a YAML mapping with a ``kind`` and kind-specific parameters.
Angles may be written as numbers or as simple multiples of pi ("pi/4",
"3*pi/8"). The full schema is documented in docs/scenario_schema.md; the
tables below are its executable form.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

KINDS = ("transform", "algebra-check", "sterngerlach", "galilean-demo", "covariance-check")
REQUIRED = object()


class ScenarioError(ValueError):
    """Validation or parse failure; ``path`` names the offending field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


_PI_RE = re.compile(r"^\s*(?:([-+]?\d*\.?\d+)\s*\*?\s*)?(-)?pi\s*(?:/\s*(\d*\.?\d+))?\s*$")


def parse_angle(value, path: str) -> float:
    if isinstance(value, bool):
        raise ScenarioError("expected an angle", path)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _PI_RE.match(value)
        if m:
            coef = float(m.group(1)) if m.group(1) else 1.0
            if m.group(2):
                coef = -coef
            den = float(m.group(3)) if m.group(3) else 1.0
            return coef * math.pi / den
        try:
            return float(value)
        except ValueError:
            pass
    raise ScenarioError(f"cannot read {value!r} as an angle", path)


def _number(value, path, positive=False, nonneg=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"expected a number, got {value!r}", path)
    if integer and (not float(value).is_integer()):
        raise ScenarioError(f"expected an integer, got {value!r}", path)
    if positive and not value > 0:
        raise ScenarioError(f"must be positive, got {value!r}", path)
    if nonneg and not value >= 0:
        raise ScenarioError(f"must be non-negative, got {value!r}", path)
    return int(value) if integer else float(value)


def num(**kw):
    return lambda v, p: _number(v, p, **kw)


def vec3(v, path):
    if not isinstance(v, (list, tuple)) or len(v) != 3:
        raise ScenarioError("expected a list of three numbers", path)
    out = [_number(x, f"{path}[{i}]") for i, x in enumerate(v)]
    if path.endswith(("n_hat", "spin_direction")) and not any(out):
        raise ScenarioError("direction must be non-zero", path)
    return out


def angle(v, p):
    return parse_angle(v, p)


def angles(v, path):
    """A single angle, a list of angles, or {start, stop, count}."""
    if isinstance(v, dict):
        sweep = _validate(v, SWEEP, path)
        if sweep["count"] < 1:
            raise ScenarioError("count must be at least 1", f"{path}.count")
        if sweep["count"] == 1:
            return [sweep["start"]]
        step = (sweep["stop"] - sweep["start"]) / (sweep["count"] - 1)
        return [sweep["start"] + k * step for k in range(sweep["count"])]
    if isinstance(v, list):
        if not v:
            raise ScenarioError("empty angle list", path)
        return [parse_angle(x, f"{path}[{i}]") for i, x in enumerate(v)]
    return [parse_angle(v, path)]


def numbers(v, path):
    if not isinstance(v, list) or not v:
        raise ScenarioError("expected a non-empty list of numbers", path)
    return [_number(x, f"{path}[{i}]") for i, x in enumerate(v)]


def boolean(v, path):
    if not isinstance(v, bool):
        raise ScenarioError(f"expected true/false, got {v!r}", path)
    return v


def section(schema):
    return lambda v, p: _validate(v, schema, p)


SWEEP = {"start": (angle, REQUIRED), "stop": (angle, REQUIRED), "count": (num(integer=True), REQUIRED)}
GRID = {
    "min": (num(), REQUIRED),
    "max": (num(), REQUIRED),
    "count": (num(integer=True, positive=True), REQUIRED),
}
UNITS = {"hbar": (num(positive=True), 1.0), "c": (num(positive=True), 1.0)}

SCHEMAS = {
    "sterngerlach": {
        "theta": (angles, REQUIRED),
        "mu": (num(positive=True), 1.0),
        "B0": (num(), 1.0),
        "alpha": (num(positive=True), REQUIRED),
        "s_z": (num(positive=True), REQUIRED),
        # alpha mu t / (hbar s_z); the evolution time follows from it
        "kick": (num(nonneg=True), 5.0),
        "m_A": (num(positive=True), 1.0),
        "n_hat": (vec3, [0.0, 0.0, 1.0]),
        "px": (section({
            "center": (num(), 1.0),
            "std": (num(positive=True), 0.3),
            "count": (num(integer=True, positive=True), 64),
        }), {}),
        "z": (section({
            "count": (num(integer=True, positive=True), 512),
            "margin": (num(positive=True), 10.0),
        }), {}),
        "flight_time": (num(positive=True), 2.0),
        "exploratory": (boolean, False),
        "tolerances": (section({
            "probability": (num(positive=True), 1e-4),
            "overlap_closed_form": (num(positive=True), 1e-8),
            "overlap_separated": (num(positive=True), 1e-10),
            "spectral": (num(positive=True), 1e-8),
            "deflection": (num(positive=True), 1e-12),
        }), {}),
    },
    "algebra-check": {
        "mass": (num(positive=True), 1.0),
        "grid": (section(GRID), {"min": -5.0, "max": 5.0, "count": 201}),
        "random_momenta": (num(integer=True, positive=True), 100),
        "momentum_scale": (num(positive=True), 3.0),
        "field": (section({"E": (vec3, [0.3, -0.2, 0.1]), "B": (vec3, [0.0, 0.4, 1.0])}), {}),
        "tolerances": (section({
            "su2": (num(positive=True), 1e-12),
            "eigenvalues": (num(positive=True), 1e-12),
            "constraint": (num(positive=True), 1e-12),
            "collapse": (num(positive=True), 1e-12),
            "boost": (num(positive=True), 1e-10),
            "h0": (num(positive=True), 1e-10),
            "nonrelativistic": (num(positive=True), 1e-7),
        }), {}),
    },
    "transform": {
        "m_A": (num(positive=True), 1.0),
        "m_C": (num(positive=True), 1.0),
        "grid_C": (section(GRID), {"min": -6.0, "max": 6.0, "count": 241}),
        "packet": (section({"center": (num(), 0.8), "std": (num(positive=True), 0.7)}), {}),
        # Bloch vector of the rest spin; drawn from the seed when absent
        "spin_direction": (vec3, None),
        "battery_size": (num(integer=True, positive=True), 16),
        "field": (section({
            "B": (num(), 1.0),
            "n_hat": (vec3, [0.0, 0.0, 1.0]),
            "mu": (num(positive=True), 1.0),
        }), {}),
        "tolerances": (section({
            "norm": (num(positive=True), 1e-8),
            "transport": (num(positive=True), 1e-10),
            "probability": (num(positive=True), 1e-10),
            "equivalence": (num(positive=True), 1e-12),
            "hamiltonian": (num(positive=True), 1e-10),
            "roundtrip": (num(positive=True), 1e-10),
        }), {}),
    },
    "galilean-demo": {
        "dx": (num(positive=True), 0.5),
        "sites": (num(integer=True, positive=True), 12),
        "x1": (num(), -2.0),
        "x2": (num(), 3.0),
        "x0": (num(), 1.0),
        "tolerances": (section({
            "entropy": (num(positive=True), 1e-10),
            "roundtrip": (num(positive=True), 1e-12),
            "probability": (num(positive=True), 1e-10),
        }), {}),
    },
    "covariance-check": {
        "m_A": (num(positive=True), 1.0),
        "m_C": (num(positive=True), 1.0),
        "mu": (num(positive=True), 1.0),
        "B_rest": (vec3, [0.2, 0.5, 1.0]),
        "E_rest": (vec3, [0.0, 0.0, 0.0]),
        "t_A": (num(nonneg=True), 0.7),
        "momenta": (numbers, [0.0, 1.0]),
        "random_momenta": (num(integer=True, nonneg=True), 8),
        "tolerances": (section({"fidelity": (num(positive=True), 1e-10)}), {}),
    },
}


def _validate(data, schema, path) -> dict:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ScenarioError("expected a mapping", path)
    unknown = sorted(set(data) - set(schema))
    if unknown:
        raise ScenarioError(f"unknown field(s) {', '.join(map(str, unknown))}", path)
    out = {}
    for key, (check, default) in schema.items():
        sub = f"{path}.{key}" if path else key
        if key in data:
            out[key] = check(data[key], sub)
        elif default is REQUIRED:
            raise ScenarioError(f"missing required field '{key}'", sub)
        elif isinstance(default, dict):
            out[key] = check(default, sub)
        else:
            out[key] = default
    return out


@dataclass(frozen=True)
class Scenario:
    kind: str
    name: str
    seed: int
    units: dict
    params: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """Plain-data form with every default filled in."""
        return {"kind": self.kind, "name": self.name, "seed": self.seed,
                "units": dict(self.units), **json.loads(json.dumps(self.params))}


def validate_scenario(data: Any, default_name: str = "scenario") -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping")
    data = dict(data)
    kind = data.pop("kind", None)
    if kind is None:
        raise ScenarioError("missing required field 'kind'", "kind")
    if kind not in KINDS:
        raise ScenarioError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}", "kind")
    name = data.pop("name", default_name)
    if not isinstance(name, str) or not re.match(r"^[\w.-]+$", name):
        raise ScenarioError("name must be a simple identifier", "name")
    seed = _number(data.pop("seed", 0), "seed", nonneg=True, integer=True)
    units = _validate(data.pop("units", {}), UNITS, "units")
    params = _validate(data, SCHEMAS[kind], "")
    if kind == "algebra-check" and params["grid"]["count"] < 2:
        raise ScenarioError("grid needs at least two points", "grid.count")
    if kind == "transform" and params["grid_C"]["count"] < 2:
        raise ScenarioError("grid needs at least two points", "grid_C.count")
    if kind == "sterngerlach":
        n = params["n_hat"]
        if abs(n[0]) > 1e-12 * math.sqrt(sum(x * x for x in n)) and not params["exploratory"]:
            raise ScenarioError("must be orthogonal to the boost axis x unless exploratory", "n_hat")
        if params["z"]["margin"] < 8.0:
            raise ScenarioError("z grid must extend at least 8 s_z past the kicked packets", "z.margin")
    for key in ("grid", "grid_C"):
        if key in params and not params[key]["min"] < params[key]["max"]:
            raise ScenarioError("min must be below max", f"{key}.min")
    return Scenario(kind, name, seed, units, params)


def load_scenario(path) -> Scenario:
    """Read a YAML scenario, or the scenario echo inside an emitted summary JSON."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from exc
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        if isinstance(data, dict) and "scenario" in data:
            data = data["scenario"]
    else:
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
            raise ScenarioError(f"{where}: {getattr(exc, 'problem', None) or exc}") from exc
    return validate_scenario(data, default_name=path.stem.split(".")[0])
