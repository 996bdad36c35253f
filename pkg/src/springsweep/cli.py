"""Command-line interface: check | simulate | attractor | polyhedron.

Exit codes: 0 ok, 1 invalid input, 2 safe load violated (empty moving
set), 3 numerical failure (including an attractor run that did not
converge within its period budget).
"""

import argparse
import csv
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .attractor import (find_periodic_orbit, stress_attractor,
                        uniqueness_study)
from .conditions import (nonconstancy_check, safe_load_report, simplex_condition)
from .errors import (DimUNotOne, DimensionTooLarge, EmptySet, HypothesisViolated,
                     NumericalError, SpringSweepError, ValidationError)
from .network import detect_blocked_springs
from .polytope import snapshot_vertices
from .scenario import load_scenario
from .solver import Integrator, SolverConfig, Trajectory

EXIT_OK, EXIT_INVALID, EXIT_SAFE_LOAD, EXIT_NUMERICAL = 0, 1, 2, 3


def fmt(x):
    return "%.17g" % x


def _active_str(J):
    return ";".join(str(j) for j in J)


def trajectory_columns(reduced):
    d, m, q = reduced.dim_V, reduced.m, reduced.q
    return (["t"] + [f"y_{i + 1}" for i in range(d)] + [f"s_{i + 1}" for i in range(m)]
            + [f"e_{i + 1}" for i in range(m)] + [f"p_{i + 1}" for i in range(m)]
            + [f"r_{i + 1}" for i in range(q)] + [f"lambda_{i + 1}" for i in range(m)]
            + ["active_set"])


def write_trajectory_csv(path, trajectory):
    """One row per grid time.

    ``lambda_i`` is the signed face weight w_i / dt of spring i: positive
    when its upper stress bound pushes the state, negative for the lower.
    """
    red = trajectory.reduced
    lam = trajectory.multipliers / trajectory.dt
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(trajectory_columns(red))
        for k in range(len(trajectory)):
            nums = np.concatenate([[trajectory.times[k]], trajectory.y_reduced[k],
                                   trajectory.stresses[k], trajectory.elastic[k],
                                   trajectory.plastic[k], trajectory.reactions[k], lam[k]])
            out.writerow([fmt(x) for x in nums] + [_active_str(trajectory.active_sets[k])])


def read_trajectory_csv(path):
    """Columns of a trajectory CSV as a dict of arrays (active sets as tuples)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {}
    for j, name in enumerate(header):
        if name == "active_set":
            cols[name] = [tuple(int(x) for x in r[j].split(";") if x) for r in body]
        else:
            cols[name] = np.array([float(r[j]) for r in body])
    return cols


def _stack(cols, prefix):
    keys = sorted((k for k in cols if k.startswith(prefix + "_")),
                  key=lambda k: int(k.rsplit("_", 1)[1]))
    return np.column_stack([cols[k] for k in keys]) if keys else np.zeros((len(cols["t"]), 0))


def load_trajectory_arrays(path):
    cols = read_trajectory_csv(path)
    return {p: _stack(cols, p) for p in ("y", "s", "e", "p", "r", "lambda")} | {
        "t": cols["t"], "active_set": cols["active_set"]}


def _scenario_path(name):
    p = Path(name)
    if p.exists():
        return p
    bundled = resources.files("springsweep") / "data" / f"{name}.yaml"
    if bundled.is_file():
        return bundled
    raise ValidationError(f"scenario file not found: {name}")


def _config(scen, args):
    cfg = scen.solver
    if args.steps_per_period is not None:
        cfg = SolverConfig(**{**cfg.__dict__, "steps_per_period": args.steps_per_period})
    return cfg


def _outdir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def condition_report(scen, reduced):
    """Structured stabilisation report (JSON-serialisable)."""
    rep = {
        "name": scen.name,
        "m": reduced.m, "n": reduced.n, "q": reduced.q,
        "dim_U": reduced.dim_U, "dim_V": reduced.dim_V,
        "blocked_springs": sorted(k + 1 for k in detect_blocked_springs(
            reduced.network, reduced.displacement_loadings)),
    }
    sl = safe_load_report(reduced)
    rep["safe_load"] = {"holds": sl.holds, "violated_at": list(sl.violation_times),
                        "interval": list(sl.interval) if sl.interval is not None else None}
    nc = nonconstancy_check(reduced)
    rep["nonconstancy"] = {"holds": nc.holds, "threshold": nc.threshold,
                           "max_squared_distance": nc.max_squared_distance,
                           "witness": list(nc.witness) if nc.witness else None}
    try:
        sx = simplex_condition(reduced)
        rep["simplex"] = {"holds": sx.holds_with_k != 0, "k": sx.holds_with_k,
                          "interval": list(sx.intervals[sx.holds_with_k])
                          if sx.holds_with_k else None,
                          "intervals": {str(k): list(v) for k, v in sx.intervals.items()},
                          "u_projection": list(sx.u_projection), "mixed": sx.mixed}
    except (DimUNotOne, HypothesisViolated) as exc:
        rep["simplex"] = {"holds": False, "k": 0, "reason": str(exc)}
    return rep


def _print_check(rep, stream):
    p = lambda *a: print(*a, file=stream)
    p(f"scenario {rep['name']}: m={rep['m']} n={rep['n']} q={rep['q']}")
    p(f"dim U = {rep['dim_U']}, dim V = {rep['dim_V']}")
    p(f"blocked springs: {rep['blocked_springs'] or 'none'}")
    sl = rep["safe_load"]
    line = "safe load: OK" if sl["holds"] else f"safe load: VIOLATED at t = {sl['violated_at']}"
    if sl["interval"] is not None:
        line += " (<u, A h(t)> must lie in [%.12g, %.12g])" % tuple(sl["interval"])
    p(line)
    nc = rep["nonconstancy"]
    p("nonconstancy: %s (max ||g(t1)-g(t2)||_A^2 = %.12g, threshold %.12g, witness %s)"
      % ("TRUE" if nc["holds"] else "FALSE", nc["max_squared_distance"], nc["threshold"],
         nc["witness"]))
    sx = rep["simplex"]
    if "reason" in sx:
        p(f"simplex: not applicable ({sx['reason']})")
    elif sx["holds"]:
        p("simplex: holds with k=%d, <u, A h(t)> in [%.12g, %.12g]" % (sx["k"], *sx["interval"]))
    else:
        p("simplex: does not hold")


def cmd_check(scen, args, stream=sys.stdout):
    reduced = scen.reduced()
    rep = condition_report(scen, reduced)
    _print_check(rep, stream)
    if args.out:
        (_outdir(args) / f"{scen.name}_check.json").write_text(json.dumps(rep, indent=2) + "\n")
    return EXIT_OK if rep["safe_load"]["holds"] else EXIT_SAFE_LOAD


def _runs(scen):
    if not scen.runs:
        raise ValidationError("scenario configures no runs")
    return scen.runs


def cmd_simulate(scen, args, stream=sys.stdout):
    reduced = scen.reduced()
    cfg = _config(scen, args)
    integ = Integrator(reduced, cfg)
    out = _outdir(args)
    periods = args.periods or 1
    for run in _runs(scen):
        yhat, p = integ.initial_state(**run.kwargs())
        arrays = integ.run(yhat, p, periods)
        traj = Trajectory(cfg, reduced, *arrays)
        path = out / f"{scen.name}_{run.name}.csv"
        write_trajectory_csv(path, traj)
        print(f"{run.name}: {len(traj)} rows -> {path}", file=stream)
    return EXIT_OK


def cmd_attractor(scen, args, stream=sys.stdout):
    reduced = scen.reduced()
    cfg = _config(scen, args)
    tol = args.tol if args.tol is not None else scen.tol
    max_periods = args.periods or scen.max_periods
    runs = _runs(scen)
    out = _outdir(args)
    p = lambda *a: print(*a, file=stream)
    summary = {"name": scen.name, "tol": tol, "runs": {}}
    if len(runs) == 1:
        reports = [find_periodic_orbit(reduced, cfg, max_periods=max_periods, tol=tol,
                                       **runs[0].kwargs())]
        cycles = [reports[0].limit_cycle]
        study = None
    else:
        study = uniqueness_study(reduced, cfg, [r.kwargs() for r in runs], tol=tol,
                                 max_periods=max_periods)
        reports, cycles = study.reports, study.cycles
    p("run            periods  converged  monotone  final r_k")
    for run, rep in zip(runs, reports):
        final = float(rep.residuals[-1])
        p(f"{run.name:<14} {rep.periods_used:>7}  {str(rep.converged):<9}  "
          f"{str(rep.monotone):<8}  {final:.3e}")
        summary["runs"][run.name] = {**rep.summary(), "residuals": rep.residuals.tolist()}
    if study is not None:
        p("pairwise limit-cycle distances (max over the cycle, A-norm):")
        for pc in study.pairs:
            cmp_ = pc.active_sets
            status = "agree" if cmp_.agree else ("inconclusive" if cmp_.inconclusive
                                                  else "differ")
            p(f"  {runs[pc.i].name} vs {runs[pc.j].name}: distance {pc.max_distance:.3e}, "
              f"variation {pc.distance_variation:.3e}, velocity diff "
              f"{pc.velocity_difference:.3e}, active sets {status}")
        p(f"hypotheses: {study.hypotheses}")
        p(f"verdict: {study.verdict} (max distance {study.max_pairwise_distance:.3e}, "
          f"cycle amplitude {study.cycle_amplitude:.6g})")
        for note in study.notes:
            p(f"note: {note}")
        summary.update(verdict=study.verdict, max_pairwise_distance=study.max_pairwise_distance,
                       distance_matrix=study.distance_matrix.tolist(),
                       hypotheses=study.hypotheses, cycle_amplitude=study.cycle_amplitude,
                       notes=study.notes)
    write_trajectory_csv(out / f"{scen.name}_limit_cycle.csv", cycles[0])
    sa = stress_attractor(cycles[0], reduced)
    with open(out / f"{scen.name}_stress_attractor.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"s_{i + 1}" for i in range(reduced.m)])
        for t, s in zip(sa.times, sa.stresses):
            w.writerow([fmt(t)] + [fmt(x) for x in s])
    summary["stress_periodicity_residual"] = sa.periodicity_residual
    (out / f"{scen.name}_attractor.json").write_text(json.dumps(summary, indent=2) + "\n")
    if not all(r.converged for r in reports):
        p("attractor: NOT CONVERGED within the period budget")
        return EXIT_NUMERICAL
    return EXIT_OK


def _parse_times(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ValidationError(f"--times must be a comma-separated list of numbers: {exc}")


def cmd_polyhedron(scen, args, stream=sys.stdout):
    reduced = scen.reduced()
    if args.times is not None:
        times = _parse_times(args.times)
    else:
        times = [float(t) for t in scen.outputs.get("polyhedron_times", [0.0])]
    out = _outdir(args)
    d, m = reduced.dim_V, reduced.m
    vpath = out / f"{scen.name}_vertices.csv"
    epath = out / f"{scen.name}_edges.csv"
    with open(vpath, "w", newline="") as fv, open(epath, "w", newline="") as fe:
        wv = csv.writer(fv, lineterminator="\n")
        we = csv.writer(fe, lineterminator="\n")
        wv.writerow(["t", "vertex"] + [f"yhat_{i + 1}" for i in range(d)]
                    + [f"y_{i + 1}" for i in range(m)] + ["faces"])
        we.writerow(["t", "vertex_a", "vertex_b"])
        for t in times:
            vs = snapshot_vertices(reduced.snapshot(t))
            full = vs.vertices @ reduced.V_basis.T
            for k, (v, y) in enumerate(zip(vs.vertices, full)):
                wv.writerow([fmt(t), k + 1] + [fmt(x) for x in v] + [fmt(x) for x in y]
                            + [_active_str(vs.faces[k])])
            for a, b in vs.edges:
                we.writerow([fmt(t), a + 1, b + 1])
            print(f"t={t:g}: {len(vs)} vertices", file=stream)
    return EXIT_OK


COMMANDS = {"check": cmd_check, "simulate": cmd_simulate,
            "attractor": cmd_attractor, "polyhedron": cmd_polyhedron}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="springsweep",
        description="Sweeping-process analysis of elastoplastic spring networks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("check", "report safe-load, nonconstancy and simplex conditions"),
                        ("simulate", "integrate every configured run and write CSV"),
                        ("attractor", "converge runs to their periodic regime and compare"),
                        ("polyhedron", "vertices of the moving set at given times")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--scenario", required=True,
                        help="scenario YAML file or name of a bundled scenario")
        sp.add_argument("--out", default=None if name == "check" else "out",
                        help="output directory")
        sp.add_argument("--steps-per-period", type=int, default=None)
        sp.add_argument("--periods", type=int, default=None,
                        help="periods to simulate (simulate) or budget (attractor)")
        sp.add_argument("--tol", type=float, default=None, help="convergence tolerance")
        sp.add_argument("--times", default=None, help="comma-separated times (polyhedron)")
    return parser


def main(argv=None, stream=None):
    stream = stream or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        scen = load_scenario(_scenario_path(args.scenario))
        return COMMANDS[args.command](scen, args, stream=stream)
    except ValidationError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except EmptySet as exc:
        print(f"error: safe load violated: {exc}", file=sys.stderr)
        return EXIT_SAFE_LOAD
    except (NumericalError, DimensionTooLarge) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SpringSweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
