"""Catching-up integration of the reduced sweeping process.

Each step projects the previous state onto the moving set at the next grid
time.  Mechanical quantities are recovered from the reduced state:

    e = y - h + g,   s = A e,   dp = A^{-1} w,

where w are the KKT multipliers of the projection written for the
constraint rows V_basis (elongation form), so G (y_k - y_{k+1}) = V^T w.
They carry stress units and are positive on an upper bound.  Reactions
solve D^T R r = f - D^T s.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (BadInitialCondition, EmptySet, GridMismatch,
                     ReactionInconsistent, SafeLoadViolated, ValidationError)
from .projection import SlabProjector
from .reduction import slab_bounds, stress_feasible


@dataclass(frozen=True)
class SolverConfig:
    steps_per_period: int = 256
    projection_tolerance: float = 1e-10
    active_tolerance: float = 1e-8
    initial_tolerance: float = 1e-6
    reaction_tolerance: float = 1e-8

    def __post_init__(self):
        problems = []
        if int(self.steps_per_period) != self.steps_per_period or self.steps_per_period < 2:
            problems.append(f"steps_per_period must be an integer >= 2, got {self.steps_per_period}")
        for name in ("projection_tolerance", "active_tolerance",
                     "initial_tolerance", "reaction_tolerance"):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be positive")
        if problems:
            raise ValidationError(problems)
        object.__setattr__(self, "steps_per_period", int(self.steps_per_period))


@dataclass(frozen=True, eq=False)
class StepRecord:
    time: float
    y_reduced: np.ndarray
    y_full: np.ndarray
    stresses: np.ndarray
    elastic: np.ndarray
    plastic: np.ndarray
    reactions: np.ndarray
    multipliers: np.ndarray
    active_set: tuple


@dataclass(eq=False)
class Trajectory:
    """Uniformly sampled solution; row k is time k * T / steps_per_period."""

    config: SolverConfig
    reduced: object
    times: np.ndarray
    y_reduced: np.ndarray
    stresses: np.ndarray
    elastic: np.ndarray
    plastic: np.ndarray
    reactions: np.ndarray
    multipliers: np.ndarray
    active_sets: list = field(default_factory=list)

    def __len__(self):
        return self.times.size

    def __getitem__(self, k):
        return StepRecord(
            time=float(self.times[k]),
            y_reduced=self.y_reduced[k],
            y_full=self.reduced.V_basis @ self.y_reduced[k],
            stresses=self.stresses[k],
            elastic=self.elastic[k],
            plastic=self.plastic[k],
            reactions=self.reactions[k],
            multipliers=self.multipliers[k],
            active_set=self.active_sets[k],
        )

    @property
    def y_full(self):
        return self.y_reduced @ self.reduced.V_basis.T

    @property
    def dt(self):
        return self.reduced.period / self.config.steps_per_period

    @property
    def n_periods(self):
        return (len(self) - 1) // self.config.steps_per_period

    def period_slice(self, k):
        """Rows of period k, both endpoints included."""
        N = self.config.steps_per_period
        return slice(k * N, (k + 1) * N + 1)

    def sub(self, rows):
        """Trajectory restricted to the rows selected by slice ``rows``."""
        return Trajectory(self.config, self.reduced, self.times[rows], self.y_reduced[rows],
                          self.stresses[rows], self.elastic[rows], self.plastic[rows],
                          self.reactions[rows], self.multipliers[rows], self.active_sets[rows])


def active_set(snapshot, yhat, tol):
    """Signed 1-based indices of the slab bounds active at ``yhat``."""
    return _active(snapshot.slab_rows @ yhat, snapshot.lower, snapshot.upper,
                   tol, np.any(snapshot.slab_rows != 0, axis=1))


def _active(Wy, lower, upper, tol, nonzero):
    up = np.flatnonzero((Wy >= upper - tol) & nonzero)
    lo = np.flatnonzero((Wy <= lower + tol) & nonzero)
    return tuple(sorted([int(i) + 1 for i in up] + [-(int(i) + 1) for i in lo],
                        key=lambda j: (abs(j), j)))


def check_grid(reduced, config):
    """Every knot of every signal must be a grid point."""
    N = config.steps_per_period
    pos = reduced.knot_times() * N / reduced.period
    off = np.abs(pos - np.round(pos))
    if np.any(off > 1e-9):
        bad = reduced.knot_times()[off > 1e-9]
        raise GridMismatch(
            f"knots {bad.tolist()} are not multiples of T/{N}; choose steps_per_period accordingly")


def check_safe_load(reduced):
    bad = [float(t) for t in reduced.stress_knot_times()
           if not stress_feasible(reduced, reduced.h(t))]
    if bad:
        raise SafeLoadViolated(f"safe load violated at t = {bad}", times=bad)


def recover_state(reduced, yhat, w, t, prev_p, tol=1e-8):
    """(s, e, p, r) after a step that ended at reduced state ``yhat``."""
    t = float(t)
    e = reduced.V_basis @ yhat - reduced.h(t) + reduced.g(t)
    s = reduced.a * e
    p = prev_p + w / reduced.a
    r = _reactions(reduced, s, reduced.f(t), tol)
    return s, e, p, r


def _reactions(reduced, s, f, tol, pinv=None):
    DR = reduced.D.T @ reduced.R
    rhs = f - reduced.D.T @ s
    if reduced.q == 0:
        r = np.zeros(0)
        resid = float(np.abs(rhs).max(initial=0.0))
    else:
        if pinv is None:
            pinv = np.linalg.pinv(DR)
        r = pinv @ rhs
        resid = float(np.abs(DR @ r - rhs).max())
    if resid > tol * max(1.0, float(np.abs(s).max(initial=0.0)), float(np.abs(f).max(initial=0.0))):
        raise ReactionInconsistent(f"static balance residual {resid:.3g}")
    return r


class Integrator:
    """Per-period tables and the stepping loop for one reduced system."""

    def __init__(self, reduced, config):
        check_grid(reduced, config)
        check_safe_load(reduced)
        self.reduced = reduced
        self.config = config
        N = config.steps_per_period
        self.dt = reduced.period / N
        self.grid = np.arange(N + 1) * self.dt
        self.g = reduced.g(self.grid)
        self.h = reduced.h(self.grid)
        self.f = reduced.f(self.grid)
        self.lower, self.upper = slab_bounds(reduced, self.g, self.h)
        self.projector = SlabProjector(reduced.W, reduced.gram_V, config.projection_tolerance)
        self.nonzero = np.any(reduced.W != 0, axis=1)
        self.DR_pinv = np.linalg.pinv(reduced.D.T @ reduced.R) if reduced.q else None

    def initial_state(self, y0=None, e0=None, p0=None, yhat0=None):
        """Reduced initial state and p(0) from any supported description.

        Without ``p0`` the plastic elongation is chosen so that
        z(0) = e + p + h - g = 0.
        """
        red = self.reduced
        h0, g0 = self.h[0], self.g[0]
        given = sum(x is not None for x in (y0, e0, yhat0))
        if given != 1:
            raise BadInitialCondition("give exactly one of y0, e0, yhat0")
        if yhat0 is not None:
            y_full = red.V_basis @ np.asarray(yhat0, dtype=float)
        elif e0 is not None:
            y_full = np.asarray(e0, dtype=float) + h0 - g0
        else:
            y_full = np.asarray(y0, dtype=float)
        if y_full.shape != (red.m,):
            raise BadInitialCondition(f"initial state must have {red.m} components")
        yhat = red.to_reduced(y_full)
        off_V = float(red.a_norm(y_full - red.V_basis @ yhat))
        yproj, _ = self.projector(self.lower[0], self.upper[0], yhat)
        dist = off_V + float(red.gram_norm(yproj - yhat))
        if dist > self.config.initial_tolerance * max(1.0, float(red.a_norm(y_full))):
            raise BadInitialCondition(
                f"initial state is {dist:.3g} away from the moving set at t=0")
        y_proj_full = red.V_basis @ yproj
        if p0 is None:
            p = -y_proj_full
        else:
            p = np.asarray(p0, dtype=float)
            e_init = y_proj_full - h0 + g0
            z0 = e_init + p + h0 - g0
            if red.a_norm(red.P_V @ z0) > self.config.initial_tolerance * max(1.0, float(red.a_norm(z0))):
                raise BadInitialCondition("e0 + p0 + h(0) - g(0) must lie in U")
        return yproj, p

    def run(self, yhat, p, n_periods, t0_period=0):
        """Integrate ``n_periods`` periods; returns arrays of all rows."""
        red = self.reduced
        N = self.config.steps_per_period
        K = n_periods * N + 1
        d, m, q = red.dim_V, red.m, red.q
        ys = np.empty((K, d))
        ss = np.empty((K, m))
        es = np.empty((K, m))
        ps = np.empty((K, m))
        rs = np.empty((K, q))
        ws = np.zeros((K, m))
        acts = []
        V, a = red.V_basis, red.a
        atol = self.config.active_tolerance
        rtol = self.config.reaction_tolerance

        def store(k, idx, y, p, w):
            e = V @ y - self.h[idx] + self.g[idx]
            s = a * e
            ys[k], es[k], ss[k], ps[k], ws[k] = y, e, s, p, w
            rs[k] = _reactions(red, s, self.f[idx], rtol, self.DR_pinv)
            acts.append(_active(red.W @ y, self.lower[idx], self.upper[idx], atol, self.nonzero))

        store(0, 0, yhat, p, np.zeros(m))
        y = yhat
        for k in range(1, K):
            idx = k % N if k % N else N
            try:
                y, w_slab = self.projector(self.lower[idx], self.upper[idx], y)
            except EmptySet as exc:
                t = (t0_period * N + k) * self.dt
                raise SafeLoadViolated(f"moving set empty at t={t}", times=[t]) from exc
            # slab rows are A V, so their multipliers are A^{-1} w
            w = a * w_slab
            p = p + w_slab
            store(k, idx, y, p, w)
        times = (t0_period * N + np.arange(K)) * self.dt
        return times, ys, ss, es, ps, rs, ws, acts


def catch_up(reduced, config, y0=None, n_periods=1, *, e0=None, p0=None, yhat0=None):
    """Trajectory of the catching-up scheme over ``n_periods`` periods."""
    integ = Integrator(reduced, config)
    yhat, p = integ.initial_state(y0=y0, e0=e0, p0=p0, yhat0=yhat0)
    times, ys, ss, es, ps, rs, ws, acts = integ.run(yhat, p, n_periods)
    return Trajectory(config, reduced, times, ys, ss, es, ps, rs, ws, acts)


@dataclass(frozen=True, eq=False)
class LambdaDecomposition:
    """Non-negative face weights with -dy/dt = sum_i lam_i n_i per step.

    Columns 0..m-1 are the upper faces, m..2m-1 the lower faces; ``normals``
    holds the matching directed normals in reduced coordinates (Gram metric).
    """

    lam: np.ndarray
    normals: np.ndarray
    residuals: np.ndarray

    def integrals(self, dt):
        return self.lam.sum(axis=0) * dt


def lambda_decomposition(reduced, trajectory):
    G = reduced.gram_V
    n_up = np.linalg.solve(G, reduced.V_basis.T).T
    normals = np.vstack([n_up, -n_up])
    w = trajectory.multipliers
    dt = trajectory.dt
    lam = np.hstack([np.maximum(w, 0.0), np.maximum(-w, 0.0)]) / dt
    vel = np.zeros_like(trajectory.y_reduced)
    vel[1:] = -np.diff(trajectory.y_reduced, axis=0) / dt
    residuals = np.linalg.norm(vel - lam @ normals, axis=1)
    return LambdaDecomposition(lam, normals, residuals)
