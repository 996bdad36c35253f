"""Scenario files: a YAML description of network, loadings, solver and runs.

Schema (node and spring indices are 1-based in files, 0-based in code)::

    name: fig4_example
    period: 1.0
    nodes: 4
    springs:                       # spring k joins node i (left) to node j (right)
      - {i: 1, j: 2, a: 1.0, c_minus: -1.0, c_plus: 1.0}
    displacement_loadings:         # chain of [spring, orientation] pairs
      - chain: [[2, 1], [3, 1]]
        signal: {times: [0, 0.25, 0.75, 1], values: [0, 3.5, -3.5, 0]}
    stress_loading:                # exactly one of u_coords / nodal, or omitted
      u_coords: {times: [0, 1], values: [0.8, 0.8]}
    solver: {steps_per_period: 256, max_periods: 200, tol: 1.0e-8}
    runs:                          # each run gives yhat0, y0 or e0 (+ optional p0)
      - {name: a, yhat0: [0.1, 0.2]}
    outputs:
      polyhedron_times: [0, 0.25, 0.5]

Signal values are scalars for one component and lists for several.
"""

from dataclasses import dataclass, field, fields

import numpy as np
import yaml

from .errors import ParseError, SpringSweepError, ValidationError
from .network import (DisplacementLoading, NetworkTopology, NodalStress,
                      SpringSpec, UCoordinateStress)
from .reduction import build_reduced_system
from .signals import PeriodicSignal
from .solver import SolverConfig

SOLVER_KEYS = {f.name for f in fields(SolverConfig)}
ANALYSIS_DEFAULTS = {"max_periods": 200, "tol": 1e-8}
TOP_KEYS = {"name", "period", "nodes", "springs", "displacement_loadings",
            "stress_loading", "solver", "runs", "outputs"}
RUN_KEYS = {"name", "y0", "e0", "p0", "yhat0"}


@dataclass(frozen=True)
class Run:
    name: str
    y0: tuple = None
    e0: tuple = None
    p0: tuple = None
    yhat0: tuple = None

    def kwargs(self):
        return {k: np.asarray(getattr(self, k), dtype=float)
                for k in ("y0", "e0", "p0", "yhat0") if getattr(self, k) is not None}


@dataclass(eq=False)
class Scenario:
    name: str
    period: float
    network: NetworkTopology
    displacement_loadings: tuple
    stress_loading: object
    solver: SolverConfig
    runs: tuple = ()
    max_periods: int = 200
    tol: float = 1e-8
    outputs: dict = field(default_factory=dict)

    def reduced(self, V_basis=None):
        return build_reduced_system(self.network, self.displacement_loadings,
                                    self.stress_loading, self.period, V_basis=V_basis)

    def to_dict(self):
        return scenario_to_dict(self)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return _normalise(self.to_dict()) == _normalise(other.to_dict())


def _normalise(obj):
    if isinstance(obj, dict):
        return {k: _normalise(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalise(v) for v in obj]
    if isinstance(obj, float):
        return float(np.float64(obj))
    return obj


def _line_index(text):
    """Map key paths to 1-based source lines using the YAML node tree."""
    lines = {}

    def walk(node, path):
        lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = k.value
                lines[path + (key,)] = k.start_mark.line + 1
                walk(v, path + (key,))
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, path + (i,))

    root = yaml.compose(text, Loader=yaml.SafeLoader)
    if root is not None:
        walk(root, ())
    return lines


class _Collector:
    def __init__(self, lines):
        self.lines = lines
        self.problems = []

    def line(self, path):
        path = tuple(path)
        while path and path not in self.lines:
            path = path[:-1]
        return self.lines.get(path)

    def add(self, path, message):
        name = ".".join(str(p) for p in path) or "<root>"
        line = self.line(path)
        where = f"line {line}, " if line is not None else ""
        self.problems.append(f"[{where}field {name!r}] {message}")

    def guard(self, path, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except ValidationError as exc:
            for p in exc.problems:
                self.add(path, p)
        except (TypeError, ValueError, KeyError) as exc:
            self.add(path, str(exc))
        return None


def _require(c, mapping, key, path, kind=None):
    if not isinstance(mapping, dict) or key not in mapping:
        c.add(path, f"missing required key {key!r}")
        return None
    v = mapping[key]
    if isinstance(v, bool) or (kind is not None and not isinstance(v, kind)):
        c.add(path + (key,), f"expected {_kind_name(kind)}, got {type(v).__name__}")
        return None
    return v


def _kind_name(kind):
    if kind is None:
        return "value"
    if isinstance(kind, tuple):
        return " or ".join(k.__name__ for k in kind)
    return kind.__name__


def _number(c, mapping, key, path):
    return _require(c, mapping, key, path, (int, float))


def _signal(c, spec, period, path):
    if not isinstance(spec, dict):
        c.add(path, "signal must be a mapping with 'times' and 'values'")
        return None
    times = _require(c, spec, "times", path, list)
    values = _require(c, spec, "values", path, list)
    if times is None or values is None:
        return None
    return c.guard(path, PeriodicSignal, period, times, values)


def _springs(c, data, n_nodes):
    raw = _require(c, data, "springs", (), list)
    springs = []
    for k, sp in enumerate(raw or []):
        path = ("springs", k)
        if not isinstance(sp, dict):
            c.add(path, f"spring {k + 1}: expected a mapping")
            continue
        for extra in set(sp) - {"i", "j", "a", "c_minus", "c_plus"}:
            c.add(path + (extra,), f"spring {k + 1}: unknown key {extra!r}")
        vals = {}
        for key, kind in (("i", int), ("j", int), ("a", (int, float)),
                          ("c_minus", (int, float)), ("c_plus", (int, float))):
            if key not in sp:
                label = "stiffness 'a'" if key == "a" else repr(key)
                c.add(path, f"spring {k + 1}: missing {label}")
            elif isinstance(sp[key], bool) or not isinstance(sp[key], kind):
                c.add(path + (key,), f"spring {k + 1}: {key} must be {_kind_name(kind)}")
            else:
                vals[key] = sp[key]
        if len(vals) < 5:
            continue
        spec = SpringSpec(vals["i"] - 1, vals["j"] - 1, float(vals["a"]),
                          float(vals["c_minus"]), float(vals["c_plus"]))
        for p in spec.problems(n_nodes):
            c.add(path, f"spring {k + 1}: {p}")
        springs.append(spec)
    return springs


def _loadings(c, data, period):
    out = []
    for k, ld in enumerate(data.get("displacement_loadings") or []):
        path = ("displacement_loadings", k)
        if not isinstance(ld, dict):
            c.add(path, "expected a mapping with 'chain' and 'signal'")
            continue
        chain = _require(c, ld, "chain", path, list)
        sig = _signal(c, ld.get("signal"), period, path + ("signal",))
        if chain is None or sig is None:
            continue
        try:
            pairs = [(int(s) - 1, int(o)) for s, o in chain]
        except (TypeError, ValueError):
            c.add(path + ("chain",), "chain entries must be [spring, orientation] pairs")
            continue
        item = c.guard(path, DisplacementLoading, pairs, sig)
        if item is not None:
            out.append(item)
    return tuple(out)


def _stress(c, data, period):
    spec = data.get("stress_loading")
    if spec is None:
        return None
    path = ("stress_loading",)
    if not isinstance(spec, dict) or len(spec) != 1 or next(iter(spec)) not in ("nodal", "u_coords"):
        c.add(path, "stress_loading must have exactly one key: 'nodal' or 'u_coords'")
        return None
    kind, sig_spec = next(iter(spec.items()))
    sig = _signal(c, sig_spec, period, path + (kind,))
    if sig is None:
        return None
    if kind == "nodal":
        return c.guard(path + (kind,), NodalStress, sig)
    return UCoordinateStress(sig)


def _solver(c, data):
    spec = data.get("solver") or {}
    if not isinstance(spec, dict):
        c.add(("solver",), "solver must be a mapping")
        return SolverConfig(), ANALYSIS_DEFAULTS["max_periods"], ANALYSIS_DEFAULTS["tol"]
    for extra in set(spec) - SOLVER_KEYS - set(ANALYSIS_DEFAULTS):
        c.add(("solver", extra), f"unknown solver key {extra!r}")
    cfg = c.guard(("solver",), SolverConfig,
                  **{k: v for k, v in spec.items() if k in SOLVER_KEYS}) or SolverConfig()
    max_periods = spec.get("max_periods", ANALYSIS_DEFAULTS["max_periods"])
    tol = spec.get("tol", ANALYSIS_DEFAULTS["tol"])
    if not isinstance(max_periods, int) or max_periods < 1:
        c.add(("solver", "max_periods"), "max_periods must be a positive integer")
    if not isinstance(tol, (int, float)) or not tol > 0:
        c.add(("solver", "tol"), "tol must be positive")
    return cfg, max_periods, tol


def _runs(c, data):
    out = []
    for k, run in enumerate(data.get("runs") or []):
        path = ("runs", k)
        if not isinstance(run, dict):
            c.add(path, "run must be a mapping")
            continue
        for extra in set(run) - RUN_KEYS:
            c.add(path + (extra,), f"unknown run key {extra!r}")
        starts = [key for key in ("y0", "e0", "yhat0") if key in run]
        if len(starts) != 1:
            c.add(path, "a run needs exactly one of y0, e0, yhat0")
            continue
        vecs = {}
        for key in ("y0", "e0", "p0", "yhat0"):
            if key in run:
                v = run[key]
                if not isinstance(v, list) or not all(
                        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
                    c.add(path + (key,), f"{key} must be a list of numbers")
                    continue
                vecs[key] = tuple(float(x) for x in v)
        out.append(Run(str(run.get("name", f"run{k + 1}")), **vecs))
    return tuple(out)


def parse_scenario(text):
    """Parse and validate a scenario; every problem found is reported at once."""
    try:
        data = yaml.safe_load(text)
        lines = _line_index(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise ParseError(str(exc.problem or exc), line=mark.line + 1 if mark else None) from exc
    except yaml.YAMLError as exc:
        raise ParseError(str(exc)) from exc
    if not isinstance(data, dict):
        raise ParseError("scenario must be a mapping at top level", line=1)

    c = _Collector(lines)
    for extra in set(data) - TOP_KEYS:
        c.add((extra,), f"unknown top-level key {extra!r}")
    period = _number(c, data, "period", ())
    if period is not None and not period > 0:
        c.add(("period",), "period must be positive")
        period = None
    n_nodes = _require(c, data, "nodes", (), int)
    springs = _springs(c, data, n_nodes)

    period = float(period) if period is not None else 1.0
    loadings = _loadings(c, data, period)
    stress = _stress(c, data, period)
    cfg, max_periods, tol = _solver(c, data)
    runs = _runs(c, data)
    outputs = data.get("outputs") or {}
    if not isinstance(outputs, dict):
        c.add(("outputs",), "outputs must be a mapping")
        outputs = {}

    network = None
    if not c.problems:
        network = c.guard((), NetworkTopology, n_nodes, springs)
    if c.problems:
        raise ValidationError(c.problems)

    scen = Scenario(str(data.get("name", "scenario")), period, network, loadings, stress,
                    cfg, runs, max_periods, float(tol), dict(outputs))
    # structural checks that need the assembled model (connectivity, ranks, periods)
    try:
        scen.reduced()
    except SpringSweepError as exc:
        probs = getattr(exc, "problems", [str(exc)])
        raise ValidationError([f"[field '<model>'] {p}" for p in probs]) from exc
    return scen


def load_scenario(path):
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def _signal_dict(sig):
    vals = sig.values
    values = vals[:, 0].tolist() if vals.shape[1] == 1 else vals.tolist()
    return {"times": sig.times.tolist(), "values": values}


def scenario_to_dict(scen):
    net = scen.network
    out = {
        "name": scen.name,
        "period": scen.period,
        "nodes": net.n,
        "springs": [{"i": s.left_node + 1, "j": s.right_node + 1, "a": s.stiffness,
                     "c_minus": s.lower_bound, "c_plus": s.upper_bound}
                    for s in net.springs],
        "displacement_loadings": [
            {"chain": [[k + 1, o] for k, o in ld.chain], "signal": _signal_dict(ld.signal)}
            for ld in scen.displacement_loadings],
    }
    if isinstance(scen.stress_loading, NodalStress):
        out["stress_loading"] = {"nodal": _signal_dict(scen.stress_loading.signal)}
    elif isinstance(scen.stress_loading, UCoordinateStress):
        out["stress_loading"] = {"u_coords": _signal_dict(scen.stress_loading.signal)}
    solver = {f.name: getattr(scen.solver, f.name) for f in fields(SolverConfig)}
    solver.update(max_periods=scen.max_periods, tol=scen.tol)
    out["solver"] = solver
    out["runs"] = [{"name": r.name, **{k: list(v) for k, v in
                                       (("y0", r.y0), ("e0", r.e0), ("p0", r.p0),
                                        ("yhat0", r.yhat0)) if v is not None}}
                   for r in scen.runs]
    out["outputs"] = dict(scen.outputs)
    return out


def emit_scenario(scen):
    """YAML text that parses back to an equivalent scenario."""
    return yaml.safe_dump(scenario_to_dict(scen), sort_keys=False, default_flow_style=None)
