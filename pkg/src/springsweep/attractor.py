"""Periodic attractor of the catching-up scheme.

Under T-periodic loading every solution approaches the set of T-periodic
solutions, and the Poincare residual r_k = ||y((k+1)T) - y(kT)|| never
increases.  The helpers here iterate the period map until that residual is
small, compare limit cycles reached from several starts, and report the
stress cycle s(t) = A(y(t) - h(t) + g(t)).
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .conditions import nonconstancy_check, simplex_condition
from .errors import (DimUNotOne, GridMismatch, HypothesisViolated,
                     NotConverged)
from .solver import Integrator, Trajectory

MONOTONE_SLACK = 1e-12


def poincare_residuals(trajectory):
    """r_k for every complete period of ``trajectory``."""
    N = trajectory.config.steps_per_period
    P = trajectory.n_periods
    if P < 1:
        return np.zeros(0)
    ends = trajectory.y_reduced[::N][:P + 1]
    return trajectory.reduced.gram_norm(np.diff(ends, axis=0))


def is_nonincreasing(values, slack=MONOTONE_SLACK):
    values = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(values) <= slack * np.maximum(1.0, np.abs(values[:-1]))))


@dataclass(eq=False)
class ConvergenceReport:
    """Outcome of iterating the period map from one initial state.

    ``limit_cycle`` is the last computed period (both endpoints included);
    ``period_starts`` holds the reduced state at every t = kT visited.
    """

    residuals: np.ndarray
    converged: bool
    periods_used: int
    tol: float
    limit_cycle: Trajectory
    period_starts: np.ndarray

    @property
    def monotone(self):
        return is_nonincreasing(self.residuals)

    @property
    def final_state(self):
        return self.limit_cycle.y_reduced[-1], self.limit_cycle.plastic[-1]

    def summary(self):
        return {
            "converged": self.converged,
            "periods_used": self.periods_used,
            "final_residual": float(self.residuals[-1]) if self.residuals.size else 0.0,
            "monotone": self.monotone,
        }


def _cycle(integ, times, ys, ss, es, ps, rs, ws, acts):
    return Trajectory(integ.config, integ.reduced, times, ys, ss, es, ps, rs, ws, acts)


def find_periodic_orbit(reduced, config, y0=None, *, e0=None, p0=None, yhat0=None,
                        max_periods=200, tol=1e-8, strict=False, integrator=None):
    """Iterate whole periods until r_k <= tol or the budget runs out.

    A run that exhausts ``max_periods`` still returns its report with
    ``converged=False``; pass ``strict=True`` to raise NotConverged instead.
    """
    integ = integrator or Integrator(reduced, config)
    yhat, p = integ.initial_state(y0=y0, e0=e0, p0=p0, yhat0=yhat0)
    starts = [yhat]
    residuals = []
    out = None
    for k in range(max_periods):
        out = integ.run(yhat, p, 1, t0_period=k)
        ys, ps = out[1], out[4]
        yhat, p = ys[-1], ps[-1]
        starts.append(yhat)
        residuals.append(float(reduced.gram_norm(ys[-1] - ys[0])))
        if residuals[-1] <= tol:
            break
    converged = bool(residuals) and residuals[-1] <= tol
    report = ConvergenceReport(np.asarray(residuals), converged, len(residuals), tol,
                               _cycle(integ, *out), np.asarray(starts))
    if strict and not converged:
        raise NotConverged(f"residual {residuals[-1]:.3g} > {tol:g} after {max_periods} periods",
                           report=report)
    return report


@dataclass(frozen=True)
class ActiveSetComparison:
    """Step-by-step comparison of two active-set traces.

    ``agree`` is the verdict.  Disagreement is flagged ``inconclusive`` when
    one of the cycles sits on a facet at a mismatched step, since equality
    of active sets is only guaranteed for relative-interior solutions.
    """

    agree: bool
    mismatched_steps: tuple = ()
    inconclusive: bool = False

    def __bool__(self):
        return self.agree


def _check_same_grid(c1, c2):
    if len(c1) != len(c2) or c1.config.steps_per_period != c2.config.steps_per_period:
        raise GridMismatch("cycles have different step grids")
    T = c1.reduced.period
    ph1 = np.mod(c1.times, T)
    ph2 = np.mod(c2.times, T)
    gap = np.abs(ph1 - ph2)
    gap = np.minimum(gap, T - gap)
    if np.any(gap > 1e-9 * T):
        raise GridMismatch("cycles are not aligned in phase")


def active_set_trace_compare(cycle1, cycle2):
    _check_same_grid(cycle1, cycle2)
    bad = tuple(k for k, (a, b) in enumerate(zip(cycle1.active_sets, cycle2.active_sets))
                if set(a) != set(b))
    inconclusive = any(cycle1.active_sets[k] or cycle2.active_sets[k] for k in bad)
    return ActiveSetComparison(not bad, bad, inconclusive)


@dataclass(frozen=True, eq=False)
class StressAttractor:
    times: np.ndarray
    stresses: np.ndarray
    periodicity_residual: float
    max_bound_violation: float

    @property
    def is_constant(self):
        return bool(np.ptp(self.stresses, axis=0).max(initial=0.0) <= 1e-12)


def stress_attractor(cycle, reduced):
    """Stress samples of one period of a (converged) cycle."""
    s = cycle.stresses
    viol = np.maximum(reduced.c_minus - s, s - reduced.c_plus).max(initial=-np.inf)
    return StressAttractor(cycle.times.copy(), s.copy(),
                           float(np.abs(s[-1] - s[0]).max()), float(max(viol, 0.0)))


@dataclass(frozen=True)
class PairComparison:
    i: int
    j: int
    max_distance: float
    distance_variation: float
    velocity_difference: float
    active_sets: ActiveSetComparison


@dataclass(eq=False)
class UniquenessReport:
    """Limit cycles from several starts, aligned in phase, and their pairwise
    distances, velocity differences and active-set agreement."""

    reports: list
    cycles: list
    pairs: list
    distance_matrix: np.ndarray
    hypotheses_hold: bool
    hypotheses: dict
    cycle_amplitude: float
    tol: float
    contraction_ok: bool = True
    notes: list = field(default_factory=list)

    @property
    def max_pairwise_distance(self):
        return float(self.distance_matrix.max(initial=0.0))

    @property
    def collapsed(self):
        return self.max_pairwise_distance <= self.tol

    @property
    def verdict(self):
        return "UNIQUE (numerical)" if self.collapsed else "NON-COLLAPSED"

    @property
    def all_converged(self):
        return all(r.converged for r in self.reports)


def _hypotheses(reduced):
    out = {}
    try:
        rep = simplex_condition(reduced)
        out["simplex"] = rep.holds_with_k != 0
        out["simplex_k"] = rep.holds_with_k
    except (DimUNotOne, HypothesisViolated) as exc:
        out["simplex"] = False
        out["simplex_reason"] = str(exc)
    nc = nonconstancy_check(reduced)
    out["nonconstancy"] = nc.holds
    return out


def _start_kwargs(point):
    if isinstance(point, dict):
        return dict(point)
    return {"yhat0": point}


def uniqueness_study(reduced, config, initial_points, tol=1e-8, max_periods=200,
                     collapse_tol=None):
    """Run every start to its limit cycle and compare the cycles.

    Starts are reduced states or dicts of keyword arguments accepted by
    ``find_periodic_orbit`` (``y0``, ``e0``/``p0``, ``yhat0``).  Negative
    outcomes are reported, never raised.
    """
    if len(initial_points) < 2:
        raise ValueError("a uniqueness study needs at least two initial points")
    collapse_tol = tol if collapse_tol is None else collapse_tol
    integ = Integrator(reduced, config)
    reports = [find_periodic_orbit(reduced, config, max_periods=max_periods, tol=tol,
                                   integrator=integ, **_start_kwargs(pt))
               for pt in initial_points]
    notes = []
    # compare the final periods on a common phase grid by rerunning every
    # start up to the longest budget used
    P = max(r.periods_used for r in reports)
    cycles = []
    for r in reports:
        if r.periods_used < P:
            y, p = r.final_state
            extra = integ.run(y, p, P - r.periods_used, t0_period=r.periods_used)
            N = config.steps_per_period
            rows = slice(len(extra[0]) - N - 1, None)
            cycles.append(_cycle(integ, *(x[rows] for x in extra)))
        else:
            cycles.append(r.limit_cycle)

    n = len(cycles)
    dist = np.zeros((n, n))
    pairs = []
    dt = cycles[0].dt
    for i, j in itertools.combinations(range(n), 2):
        d = reduced.gram_norm(cycles[i].y_reduced - cycles[j].y_reduced)
        dv = np.diff(cycles[i].y_reduced, axis=0) - np.diff(cycles[j].y_reduced, axis=0)
        vel = float(reduced.gram_norm(dv).max(initial=0.0)) / dt
        cmp_ = active_set_trace_compare(cycles[i], cycles[j])
        dist[i, j] = dist[j, i] = float(d.max())
        pairs.append(PairComparison(i, j, float(d.max()), float(np.ptp(d)), vel, cmp_))
    contraction_ok = all(r.monotone for r in reports)
    if not contraction_ok:
        notes.append("a Poincare residual sequence increased")
    amp = max(float(np.ptp(c.y_full, axis=0).max()) for c in cycles)
    hyp = _hypotheses(reduced)
    holds = bool(hyp["simplex"] and hyp["nonconstancy"])
    rep = UniquenessReport(reports, cycles, pairs, dist, holds, hyp, amp, collapse_tol,
                           contraction_ok, notes)
    if holds and not rep.collapsed:
        notes.append("hypotheses hold but the limit cycles did not collapse")
    if not rep.all_converged:
        notes.append("some runs did not converge within the period budget")
    return rep
