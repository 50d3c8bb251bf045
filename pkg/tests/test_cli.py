import csv
import json
import math
from pathlib import Path

import pytest

from relqrf import cli
from relqrf.runner import ResultBundle, emit, run
from relqrf.scenario import load_scenario, validate_scenario

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def sg_scenario(**kw):
    data = {"kind": "sterngerlach", "theta": "pi/4", "alpha": 1, "s_z": 1, "name": "sg"}
    data.update(kw)
    return validate_scenario(data)


def test_equal_weight_bundle():
    b = run(sg_scenario())
    p_plus = b.series["theta_sweep"][0][1]
    assert p_plus == pytest.approx(0.5, abs=1e-4)
    assert b.passed
    names = [c.name for c in b.checks]
    assert len(names) == len(set(names))


def test_algebra_default_residuals():
    b = run(validate_scenario({"kind": "algebra-check"}))
    res = {c.name: c.residual for c in b.checks}
    for key in ("su2_xi", "su2_sigma", "xi_eigenvalues", "covariant_constraint", "xi_collapse"):
        assert res[key] < 1e-12


def test_galilean_entropy_pair():
    b = run(validate_scenario({"kind": "galilean-demo"}))
    rows = b.series["galilean"]
    assert rows[0][1] == pytest.approx(0.0, abs=1e-10)
    assert rows[1][1] == pytest.approx(math.log(2), abs=1e-10)


def test_nine_point_sweep_csv(tmp_path):
    b = run(sg_scenario(theta={"start": 0, "stop": "pi/2", "count": 9}))
    paths = emit(b, "series-csv", tmp_path)
    sweep = tmp_path / "sg.theta_sweep.csv"
    assert sweep in paths
    rows = list(csv.reader(sweep.open()))
    assert rows[0] == ["theta", "p_plus", "p_minus", "overlap"]
    assert len(rows) == 10 and all(len(r) == 4 for r in rows)
    packet = list(csv.reader((tmp_path / "sg.packet.csv").open()))
    assert packet[0] == ["p_z", "re_up", "im_up", "re_down", "im_down"]


def test_empty_bundle_header_only(tmp_path):
    b = ResultBundle("empty", "sterngerlach", {})
    b.add_series("theta_sweep", [])
    emit(b, "both", tmp_path)
    assert (tmp_path / "empty.theta_sweep.csv").read_text() == "theta,p_plus,p_minus,overlap\n"
    summary = json.loads((tmp_path / "empty.summary.json").read_text())
    assert summary["checks"] == [] and summary["passed"] is True


def test_summary_keys_stable(tmp_path):
    b = run(sg_scenario())
    emit(b, "summary-json", tmp_path)
    data = json.loads((tmp_path / "sg.summary.json").read_text())
    assert list(data) == ["schema_version", "name", "kind", "passed", "checks", "values",
                          "provenance", "scenario"]
    assert set(data["checks"][0]) == {"name", "residual", "tolerance", "passed", "note"}
    assert "runtime_s" not in data["provenance"]


def test_byte_identical_reruns(tmp_path):
    s = load_scenario(SCENARIOS / "transform.yaml")
    emit(run(s), "both", tmp_path / "a")
    emit(run(s), "both", tmp_path / "b")
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_echo_roundtrip(tmp_path):
    s = load_scenario(SCENARIOS / "covariance.yaml")
    emit(run(s), "summary-json", tmp_path)
    again = load_scenario(tmp_path / "covariance.summary.json")
    assert again == s
    emit(run(again), "summary-json", tmp_path / "again")
    assert (tmp_path / "covariance.summary.json").read_bytes() == \
        (tmp_path / "again" / "covariance.summary.json").read_bytes()


def test_bad_format(tmp_path):
    with pytest.raises(ValueError):
        emit(run(sg_scenario()), "xml", tmp_path)


def test_cli_exit_codes(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RELQRF_OUT", str(tmp_path / "env"))
    assert cli.main(["run", str(SCENARIOS / "galilean.yaml")]) == 0
    assert (tmp_path / "env" / "galilean.summary.json").exists()
    assert "PASS" in capsys.readouterr().out

    failing = tmp_path / "strict.yaml"
    failing.write_text("kind: sterngerlach\ntheta: pi/3\nalpha: 1\ns_z: 1\n"
                       "tolerances: {spectral: 1.0e-30}\n")
    assert cli.main(["run", str(failing), "--out", str(tmp_path / "o"), "-q"]) == 1
    assert "FAIL  spectral_vs_analytic" in capsys.readouterr().out

    bad = tmp_path / "bad.yaml"
    bad.write_text("kind: sterngerlach\ntheta: 0\n")
    assert cli.main(["run", str(bad)]) == 2
    assert "alpha" in capsys.readouterr().err


def test_cli_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code = cli.main(["run", str(SCENARIOS / "galilean.yaml"), "--out", str(blocker / "sub")])
    assert code == 2
    assert "cannot write" in capsys.readouterr().err


def test_cli_runtime_flag(tmp_path):
    cli.main(["run", str(SCENARIOS / "galilean.yaml"), "--out", str(tmp_path),
              "--format", "summary-json", "--runtime", "-q"])
    data = json.loads((tmp_path / "galilean.summary.json").read_text())
    assert data["provenance"]["runtime_s"] >= 0


def test_shipped_scenarios_pass():
    for path in sorted(SCENARIOS.glob("*.yaml")):
        b = run(load_scenario(path))
        assert b.passed, (path.name, [c for c in b.checks if not c.passed])
