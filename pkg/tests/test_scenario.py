from importlib import resources

import numpy as np
import pytest
import yaml
from hypothesis import given, settings, strategies as st

from springsweep import emit_scenario, load_scenario, parse_scenario
from springsweep.errors import ParseError, ValidationError

FIXTURE = resources.files("springsweep") / "data" / "fig4_example.yaml"


def fixture_text():
    return FIXTURE.read_text()


def fixture_dict():
    return yaml.safe_load(fixture_text())


def test_fixture_parses():
    scen = load_scenario(FIXTURE)
    red = scen.reduced()
    assert (red.m, red.n, red.q) == (3, 4, 2)
    assert scen.solver.steps_per_period == 256 and scen.tol == 1e-8
    assert len(scen.runs) == 5
    assert [s.upper_bound for s in scen.network.springs] == [1.0, 1.3, 1.6]


def test_round_trip():
    scen = load_scenario(FIXTURE)
    again = parse_scenario(emit_scenario(scen))
    assert again == scen
    assert emit_scenario(again) == emit_scenario(scen)


@settings(max_examples=30, deadline=None)
@given(st.floats(-1.2, 1.2), st.floats(0.1, 5.0), st.integers(2, 9))
def test_round_trip_varied(H, amp, steps_pow):
    d = fixture_dict()
    d["stress_loading"] = {"u_coords": {"times": [0.0, 0.5, 1.0], "values": [H, H / 2, H]}}
    d["displacement_loadings"][0]["signal"]["values"] = [0.0, amp, -amp, 0.0]
    d["solver"]["steps_per_period"] = 2 ** steps_pow
    scen = parse_scenario(yaml.safe_dump(d))
    assert parse_scenario(emit_scenario(scen)) == scen


def test_nodal_stress_variant():
    d = fixture_dict()
    d["stress_loading"] = {"nodal": {"times": [0, 1], "values": [[0.8, -1.6, 1.6, -0.8]] * 2}}
    scen = parse_scenario(yaml.safe_dump(d))
    np.testing.assert_allclose(scen.reduced().h(0.0), [0.8, -0.8, 0.8], atol=1e-12)
    assert parse_scenario(emit_scenario(scen)) == scen


def test_missing_stiffness_names_spring():
    d = fixture_dict()
    del d["springs"][1]["a"]
    with pytest.raises(ValidationError) as exc:
        parse_scenario(yaml.safe_dump(d))
    assert "spring 2" in str(exc.value) and "stiffness" in str(exc.value)


def test_period_mismatch():
    d = fixture_dict()
    d["displacement_loadings"][1]["signal"]["times"] = [0.0, 1.0, 2.0]
    with pytest.raises(ValidationError) as exc:
        parse_scenario(yaml.safe_dump(d))
    assert "displacement_loadings.1.signal" in str(exc.value)


def test_all_problems_reported_with_lines():
    text = fixture_text().replace("c_plus: 1.3", "c_plus: -2.0").replace(
        "nodes: 4", "nodes: 4\nbogus: 1")
    with pytest.raises(ValidationError) as exc:
        parse_scenario(text)
    probs = exc.value.problems
    assert len(probs) == 3
    assert any("bogus" in p and "line" in p for p in probs)
    assert any("spring 2" in p for p in probs)


def test_malformed_yaml_gives_line():
    with pytest.raises(ParseError) as exc:
        parse_scenario("name: x\nsprings: [1, 2\nnodes: 3\n")
    assert exc.value.line is not None


def test_model_level_errors():
    d = fixture_dict()
    d["displacement_loadings"][1]["chain"] = [[2, 1], [3, 1]]   # duplicate of the first lock
    with pytest.raises(ValidationError) as exc:
        parse_scenario(yaml.safe_dump(d))
    assert "dependent" in str(exc.value)


@pytest.mark.parametrize("run", [{"name": "x"}, {"yhat0": [0, 0], "e0": [0, 0, 0]},
                                 {"yhat0": "zero"}])
def test_bad_runs(run):
    d = fixture_dict()
    d["runs"] = [run]
    with pytest.raises(ValidationError):
        parse_scenario(yaml.safe_dump(d))
