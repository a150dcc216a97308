import json
from importlib import resources

import numpy as np
import pytest

from crosslab import io
from crosslab.cli import main
from crosslab.extremal import ScalarField
from crosslab.geometry import Grid, Mask
from crosslab.pipelines import run_envelope
from crosslab.suite import shipped_config


def conf(name):
    return str(resources.files("crosslab.configs") / name)


def test_extremal_annulus(tmp_path):
    assert main(["extremal", "--config", conf("annulus_extremal.json"), "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["min"] == 0 and summary["max"] == pytest.approx(1, abs=0.01)
    assert (tmp_path / "field.csv").exists() and (tmp_path / "field.pgm").exists()


def test_extremal_a_equals_omega(tmp_path):
    assert main(["extremal", "--config", conf("trivial_extremal.json"), "--out", str(tmp_path)]) == 0
    _, values = io.field_from_csv(tmp_path / "field.csv")
    assert np.all(values[~np.isnan(values)] == 0)


def test_malformed_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"omega": ')
    assert main(["extremal", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    record = json.loads(capsys.readouterr().err)
    assert record["error"] == "config_schema"
    assert json.loads((tmp_path / "o" / "error.json").read_text()) == record


def test_solver_failure_is_exit_3(tmp_path, capsys):
    doc = shipped_config("annulus_extremal.json")
    doc["solver"] = {"method": "sor"}
    doc["grid"]["nx"] = doc["grid"]["ny"] = 48
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    assert main(["extremal", "--config", str(path), "--max-iter", "2"]) == 3
    record = json.loads(capsys.readouterr().err)
    assert record["error"] == "no_convergence" and record["residual"] > 0


def test_envelope_trivial(tmp_path):
    assert main(["envelope", "--config", conf("trivial_envelope.json"), "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary == {"volume_fraction": 1.0, "component_count": 1}
    assert (tmp_path / "envelope_rle.csv").exists()


def test_envelope_annulus_connected(tmp_path):
    assert main(["envelope", "--config", conf("annulus_envelope.json"), "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "summary.json").read_text())["component_count"] == 1


def test_envelope_injected_disconnected_fields():
    g = Grid.square(1, 12)
    dom = Mask(g, np.ones(g.shape, bool))
    values = np.full(g.shape, 0.9)
    values[:, :3] = 0.0
    values[:, -3:] = 0.0
    field = ScalarField(g, dom, values)
    doc = {"grid_z": g.to_dict(), "grid_w": g.to_dict()}
    report, _ = run_envelope(doc, fields=(field, ScalarField(g, dom, np.full(g.shape, 0.5))))
    assert report["component_count"] == 2


@pytest.mark.parametrize("name, code", [("theorem1_diag.json", 0), ("negative_control.json", 1),
                                        ("pole_order_too_small.json", 1)])
def test_verify_exit_codes(tmp_path, name, code):
    assert main(["verify", "--config", conf(name), "--out", str(tmp_path)]) == code
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["passed"] is (code == 0)
    if code == 0:
        assert report["max_rel_error"] <= 1e-6
        assert report["uniqueness_residual"] <= 1e-10
        assert report["removability"]["error"] <= 1e-8
    else:
        assert report["max_rel_error"] > 0.1


def test_verify_reports_are_deterministic(tmp_path):
    for d in ("a", "b"):
        assert main(["verify", "--config", conf("theorem1_diag.json"), "--seed", "3",
                     "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
