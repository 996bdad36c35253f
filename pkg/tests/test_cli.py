import io
import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

from springsweep.cli import load_trajectory_arrays, main
from springsweep.scenario import load_scenario

from test_scenario import FIXTURE, fixture_dict


def run_cli(*argv):
    out = io.StringIO()
    code = main(list(argv), stream=out)
    return code, out.getvalue()


def write_variant(tmp_path, name="variant", **changes):
    d = fixture_dict()
    d["name"] = name
    for key, value in changes.items():
        d[key] = value
    path = tmp_path / f"{name}.yaml"
    path.write_text(yaml.safe_dump(d))
    return path


def const_H(H):
    return {"u_coords": {"times": [0.0, 1.0], "values": [H, H]}}


def test_check_fixture(tmp_path):
    code, text = run_cli("check", "--scenario", str(FIXTURE), "--out", str(tmp_path))
    assert code == 0
    assert "dim U = 1, dim V = 2" in text
    assert "safe load: OK" in text
    assert "simplex: holds with k=-1" in text
    assert "nonconstancy: TRUE" in text
    rep = json.loads((tmp_path / "fig4_example_check.json").read_text())
    assert rep["simplex"]["k"] == -1 and rep["blocked_springs"] == []


def test_check_bundled_name():
    assert run_cli("check", "--scenario", "fig4_example")[0] == 0


def test_check_reports_safe_load_violation(tmp_path):
    path = write_variant(tmp_path, stress_loading=const_H(1.4))
    code, text = run_cli("check", "--scenario", str(path))
    assert code == 2 and "safe load: VIOLATED at t = [0.0, 1.0]" in text


def test_check_constant_locks(tmp_path):
    d = fixture_dict()
    lds = d["displacement_loadings"]
    for ld in lds:
        ld["signal"] = {"times": [0.0, 1.0], "values": [0.5, 0.5]}
    path = write_variant(tmp_path, displacement_loadings=lds)
    assert "nonconstancy: FALSE" in run_cli("check", "--scenario", str(path))[1]


def test_simulate_csv(tmp_path):
    code, _ = run_cli("simulate", "--scenario", str(FIXTURE), "--out", str(tmp_path),
                      "--steps-per-period", "64", "--periods", "2")
    assert code == 0
    csv_path = tmp_path / "fig4_example_centroid.csv"
    header = csv_path.read_text().splitlines()[0].split(",")
    assert header[:3] == ["t", "y_1", "y_2"] and header[-1] == "active_set"
    assert "r_2" in header and "lambda_3" in header
    arr = load_trajectory_arrays(csv_path)
    assert arr["t"].size == 129
    red = load_scenario(FIXTURE).reduced()
    np.testing.assert_allclose(arr["s"], red.a * arr["e"], atol=1e-12, rtol=0)
    assert np.all(arr["s"] <= red.c_plus + 1e-8) and np.all(arr["s"] >= red.c_minus - 1e-8)
    first = csv_path.read_bytes()
    run_cli("simulate", "--scenario", str(FIXTURE), "--out", str(tmp_path),
            "--steps-per-period", "64", "--periods", "2")
    assert csv_path.read_bytes() == first


def test_simulate_zero_loading(tmp_path):
    d = fixture_dict()
    lds = d["displacement_loadings"]
    for ld in lds:
        ld["signal"] = {"times": [0.0, 1.0], "values": [0.0, 0.0]}
    path = write_variant(tmp_path, displacement_loadings=lds, stress_loading=const_H(0.0),
                         runs=[{"name": "rest", "yhat0": [0.2, 0.1]}])
    assert run_cli("simulate", "--scenario", str(path), "--out", str(tmp_path))[0] == 0
    rows = (tmp_path / "variant_rest.csv").read_text().splitlines()[1:]
    assert len({r.split(",", 1)[1] for r in rows}) == 1


def test_attractor_unique(tmp_path):
    code, text = run_cli("attractor", "--scenario", str(FIXTURE), "--out", str(tmp_path),
                         "--steps-per-period", "64")
    assert code == 0 and "verdict: UNIQUE (numerical)" in text
    summary = json.loads((tmp_path / "fig4_example_attractor.json").read_text())
    assert summary["max_pairwise_distance"] <= 1e-8
    assert (tmp_path / "fig4_example_stress_attractor.csv").exists()
    assert (tmp_path / "fig4_example_limit_cycle.csv").exists()


def test_attractor_degenerate(tmp_path):
    d = fixture_dict()
    lds = d["displacement_loadings"]
    lds[0]["signal"]["values"] = [0.0, 0.6, -0.6, 0.0]
    lds[1]["signal"]["values"] = [0.0, 0.4, 0.0]
    runs = [{"name": "a", "yhat0": [0.0, 0.0]}, {"name": "b", "yhat0": [0.3, 0.2]}]
    path = write_variant(tmp_path, displacement_loadings=lds, stress_loading=const_H(0.0),
                         runs=runs)
    code, text = run_cli("attractor", "--scenario", str(path), "--out", str(tmp_path),
                         "--steps-per-period", "64")
    assert code == 0 and "NON-COLLAPSED" in text


def test_attractor_single_run_and_budget(tmp_path):
    path = write_variant(tmp_path, runs=[{"name": "only", "yhat0": [0.05, -0.5]}])
    code, text = run_cli("attractor", "--scenario", str(path), "--out", str(tmp_path),
                         "--steps-per-period", "64")
    assert code == 0 and "verdict" not in text
    code, text = run_cli("attractor", "--scenario", str(path), "--out", str(tmp_path),
                         "--steps-per-period", "64", "--periods", "1")
    assert code == 3 and "NOT CONVERGED" in text


@pytest.mark.parametrize("H, count", [(0.8, 3), (0.0, 6), (1.3, 1)])
def test_polyhedron_counts(tmp_path, H, count):
    path = write_variant(tmp_path, stress_loading=const_H(H))
    code, text = run_cli("polyhedron", "--scenario", str(path), "--out", str(tmp_path),
                         "--times", "0,0.25")
    assert code == 0
    assert f"t=0: {count} vertices" in text and f"t=0.25: {count} vertices" in text
    lines = (tmp_path / "variant_vertices.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * count


def test_invalid_inputs(tmp_path):
    assert run_cli("check", "--scenario", str(tmp_path / "missing.yaml"))[0] == 1
    bad = tmp_path / "bad.yaml"
    bad.write_text("nodes: [1\n")
    assert run_cli("check", "--scenario", str(bad))[0] == 1
    assert run_cli("polyhedron", "--scenario", str(FIXTURE), "--out", str(tmp_path),
                   "--times", "x")[0] == 1
    path = write_variant(tmp_path, stress_loading=const_H(1.4))
    assert run_cli("simulate", "--scenario", str(path), "--out", str(tmp_path))[0] == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "springsweep.cli", "check", "--scenario",
                           "fig4_example"], capture_output=True, text=True)
    assert proc.returncode == 0 and "simplex: holds" in proc.stdout
