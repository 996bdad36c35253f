"""Analytic stabilisation checks: safe load, non-constancy, simplex shape.

All loadings are piecewise linear, so every quantity tested here is
piecewise linear (or convex) in time and checking the knots is exact.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimUNotOne, HypothesisViolated, SingletonSet
from .network import detect_blocked_springs
from .reduction import stress_feasible


@dataclass(frozen=True, eq=False)
class ExtremalCorners:
    """Corners of the stress box that extremise <u_bar, s>.

    ``c_plus_bar[i]`` is c_i^{sign(u_i)} and ``c_minus_bar[i]`` is
    c_i^{-sign(u_i)}; a zero entry of ``u_bar`` (blocked spring) picks
    c_i^+ for both, which leaves the inner products unchanged.
    """

    u_bar: np.ndarray
    c_plus_bar: np.ndarray
    c_minus_bar: np.ndarray

    @classmethod
    def from_vector(cls, u_bar, c_minus, c_plus):
        u = np.asarray(u_bar, dtype=float)
        c_minus = np.asarray(c_minus, dtype=float)
        c_plus = np.asarray(c_plus, dtype=float)
        if not np.any(u):
            raise ValueError("u_bar must be nonzero")
        cp = np.where(u >= 0, c_plus, c_minus)
        cm = np.where(u > 0, c_minus, c_plus)
        return cls(u, cp, cm)

    def corner(self, k):
        return self.c_plus_bar if k == 1 else self.c_minus_bar

    def flipped(self, k, j):
        """c_bar^k with entry j replaced by the opposite corner's entry."""
        c = self.corner(k).copy()
        c[j] = self.corner(-k)[j]
        return c


def extremal_corners(reduced):
    if reduced.dim_U != 1:
        raise DimUNotOne(f"extremal corners need dim U = 1, got {reduced.dim_U}")
    return ExtremalCorners.from_vector(reduced.U_basis[:, 0],
                                       reduced.c_minus, reduced.c_plus)


def safe_load_general(reduced, t):
    """True iff Pi(t) n V is nonempty."""
    return stress_feasible(reduced, reduced.h(t))


def safe_load_sufficient(reduced, t):
    """The one-way test -A h(t) in C."""
    s = -reduced.a * reduced.h(t)
    return bool(np.all(s >= reduced.c_minus) and np.all(s <= reduced.c_plus))


def safe_load_interval(corners):
    """Bounds (lo, hi) on <u_bar, A h(t)> for the safe load condition."""
    u = corners.u_bar
    return -float(u @ corners.c_plus_bar), -float(u @ corners.c_minus_bar)


def u_projection(reduced, corners, t):
    """<u_bar, A h(t)> (vectorised over t)."""
    return reduced.h(t) @ (reduced.a * corners.u_bar)


@dataclass(frozen=True)
class SafeLoadReport:
    holds: bool
    knot_times: tuple
    violation_times: tuple
    interval: tuple = None          # (lo, hi) for <u_bar, A h> when dim U = 1
    sufficient_holds: bool = None   # -A h(t) in C at every knot


def safe_load_report(reduced):
    """Check the safe load condition over one period (exact at knots)."""
    times = reduced.stress_knot_times()
    bad = [float(t) for t in times if not safe_load_general(reduced, t)]
    interval = None
    if reduced.dim_U == 1:
        interval = safe_load_interval(extremal_corners(reduced))
    suff = all(safe_load_sufficient(reduced, t) for t in times)
    return SafeLoadReport(not bad, tuple(map(float, times)), tuple(bad), interval, suff)


@dataclass(frozen=True)
class NonconstancyResult:
    holds: bool
    threshold: float           # <c^- - c^+, A^{-1}(c^- - c^+)>
    max_squared_distance: float
    witness: tuple             # (t1, t2) maximising |g(t1) - g(t2)|_A


def nonconstancy_threshold(reduced):
    w = reduced.c_plus - reduced.c_minus
    return float(np.sum(w * w / reduced.a))


def nonconstancy_check(reduced, times=None):
    """Does the displacement loading rule out constant solutions?

    Maximises |g(t1) - g(t2)|_A^2 over pairs of knot times; g is linear in
    the piecewise-linear l, so the maximum of this convex function is
    attained at knots.
    """
    if times is None:
        times = reduced.knot_times()
    times = np.asarray(times, dtype=float)
    lhs = nonconstancy_threshold(reduced)
    g = reduced.g(times)
    best, witness = 0.0, (float(times[0]), float(times[0]))
    for i, j in itertools.combinations(range(len(times)), 2):
        dist2 = float(reduced.a_norm(g[i] - g[j]) ** 2)
        if dist2 > best:
            best, witness = dist2, (float(times[i]), float(times[j]))
    return NonconstancyResult(lhs < best, lhs, best, witness)


def bigforce_products(corners, x, k):
    """Left-hand sides of the large-stress inequality for every spring j.

    ``x`` is <u_bar, A h(t)> (scalar or array); returns shape x.shape + (m,).
    """
    u = corners.u_bar
    base = float(u @ corners.corner(k))
    flipped = np.array([u @ corners.flipped(k, j) for j in range(u.size)])
    x = np.asarray(x, dtype=float)[..., None]
    return (flipped + x) * (base + x)


def sufficient_interval(corners, k):
    """Interval for <u_bar, A h> between the roots, for sign k."""
    u = corners.u_bar
    flips = [-float(u @ corners.flipped(k, j)) for j in range(u.size)]
    if k == 1:
        return -float(u @ corners.c_plus_bar), min(flips)
    return max(flips), -float(u @ corners.c_minus_bar)


@dataclass(frozen=True)
class SimplexReport:
    holds_with_k: int                 # +1, -1, or 0 when neither sign works
    exact: dict                       # k -> bool, product test at all knots
    intervals: dict                   # k -> (lo, hi) for <u_bar, A h>
    knot_times: tuple
    u_projection: tuple               # <u_bar, A h(t)> at the knots
    mixed: bool                       # every knot passes for some k, no common k
    per_knot: tuple = field(default=())  # tuple of sets of k passing at each knot


def check_simplex_hypotheses(reduced):
    problems = []
    if reduced.q != reduced.n - 2:
        problems.append(f"q = {reduced.q} but n - 2 = {reduced.n - 2}")
    blocked = detect_blocked_springs(reduced.network, reduced.displacement_loadings)
    if blocked:
        problems.append("blocked springs: " + ", ".join(str(i + 1) for i in sorted(blocked)))
    if problems:
        raise HypothesisViolated("; ".join(problems))


def simplex_condition(reduced, tol=1e-12):
    """Test the large-stress condition that makes Pi(t) n V a simplex."""
    check_simplex_hypotheses(reduced)
    corners = extremal_corners(reduced)
    times = reduced.stress_knot_times()
    x = u_projection(reduced, corners, times)
    scale = max(1.0, float(np.abs(corners.c_plus_bar).max()) ** 2)
    per_knot = []
    for xi in x:
        ok = {k for k in (1, -1)
              if np.all(bigforce_products(corners, xi, k) <= tol * scale)}
        per_knot.append(frozenset(ok))
    exact = {k: all(k in s for s in per_knot) for k in (1, -1)}
    holds = 1 if exact[1] else (-1 if exact[-1] else 0)
    mixed = holds == 0 and all(per_knot)
    return SimplexReport(
        holds_with_k=holds,
        exact=exact,
        intervals={k: sufficient_interval(corners, k) for k in (1, -1)},
        knot_times=tuple(map(float, times)),
        u_projection=tuple(map(float, x)),
        mixed=mixed,
        per_knot=tuple(per_knot),
    )


def simplex_vertices(reduced, corners, k, t, tol=1e-12):
    """The m vertices of Pi(t) n V in full coordinates (rows).

    Vertex j has every slab i != j on its k-side bound and satisfies
    <u_bar, A(x + g)> = 0.  Raises SingletonSet when all vertices merge.
    """
    u = corners.u_bar
    a = reduced.a
    if np.any(u == 0):
        raise HypothesisViolated("u_bar has zero entries (blocked spring)")
    h = reduced.h(t)
    g = reduced.g(t)
    target = corners.corner(k) + a * h          # a_i xi_i for i != j
    scale = max(1.0, float(np.abs(target).max()))
    if abs(u @ target) <= tol * scale * u.size:
        raise SingletonSet(f"moving set is the single point A^-1 c_bar^k + h at t={t}")
    m = u.size
    xi = np.empty((m, m))
    for j in range(m):
        ax = target.copy()
        mask = np.arange(m) != j
        ax[j] = -(u[mask] @ ax[mask]) / u[j]
        xi[j] = ax / a
    return xi - g
