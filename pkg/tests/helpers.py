"""Shared builders and independent oracles for the test suite."""

import itertools

import numpy as np

from springsweep import (DisplacementLoading, NetworkTopology, PeriodicSignal, SpringSpec,
                         UCoordinateStress, build_reduced_system)
from springsweep.errors import ValidationError

EXAMPLE_BOUNDS = (1.0, 1.3, 1.6)


def example_network(a=(1.0, 1.0, 1.0), c=EXAMPLE_BOUNDS):
    springs = [SpringSpec(k, k + 1, float(a[k]), -float(c[k]), float(c[k])) for k in range(3)]
    return NetworkTopology(4, springs)


def example_loadings(amp1=3.5, amp2=2.0, period=1.0):
    l1 = PeriodicSignal(period, [0, .25 * period, .75 * period, period], [0, amp1, -amp1, 0])
    l2 = PeriodicSignal(period, [0, .5 * period, period], [0, amp2, 0])
    # R columns (0,1,1) and (1,1,0): nodes 2-4 and nodes 1-3
    return [DisplacementLoading([(1, 1), (2, 1)], l1),
            DisplacementLoading([(0, 1), (1, 1)], l2)]


def example_reduced(H=0.8, a=(1.0, 1.0, 1.0), loadings=None, V_basis=None, period=1.0):
    """Worked-example network; ``H`` is a constant or a (times, values) pair."""
    if isinstance(H, tuple):
        sig = PeriodicSignal(period, *H)
    else:
        sig = PeriodicSignal.constant(H, period)
    lds = example_loadings(period=period) if loadings is None else loadings
    return build_reduced_system(example_network(a), lds, UCoordinateStress(sig), period,
                                V_basis=V_basis)


def hand_V_basis(a=(1.0, 1.0, 1.0)):
    a1, a2, a3 = a
    return np.array([[1 / a1, 0.0], [1 / a2, 1 / a2], [0.0, 1 / a3]])


# --------------------------------------------------------------------------
# independent oracles

def dykstra(W, G, lower, upper, y0, tol=1e-13, maxiter=500_000):
    """Dykstra's alternating projections onto slabs in the G metric.

    Stops when the correction terms settle (the Birgin-Raydan criterion)
    and the iterate is feasible; a plain step-size test stalls too early.
    """
    W = np.asarray(W, float)
    Ginv = np.linalg.inv(G)
    dirs = W @ Ginv                      # G^{-1} w_i as rows
    norms = np.einsum("ij,ij->i", dirs, W)
    m, d = W.shape
    x = np.array(y0, float)
    incr = np.zeros((m, d))
    scale = max(1.0, float(np.abs(np.concatenate([lower, upper])).max()))
    for _ in range(maxiter):
        old = incr.copy()
        for i in range(m):
            if norms[i] == 0:
                continue
            z = x + incr[i]
            wz = W[i] @ z
            clipped = min(max(wz, lower[i]), upper[i])
            x = z + dirs[i] * (clipped - wz) / norms[i]
            incr[i] = z - x
        Wx = W @ x
        viol = max(float((Wx - upper).max()), float((lower - Wx).max()), 0.0)
        if np.abs(incr - old).max() <= tol * scale and viol <= tol * scale:
            break
    return x


def random_slab_instance(rng, d=None):
    """Nonempty random slab polytope, SPD Gram matrix and a point."""
    d = d or int(rng.integers(1, 5))
    m = int(rng.integers(d + 1, d + 5))
    W = rng.normal(size=(m, d))
    B = rng.normal(size=(d, d))
    G = B @ B.T + 0.3 * np.eye(d)
    yc = rng.normal(size=d)
    lower = W @ yc - rng.uniform(0.05, 1.5, m)
    upper = W @ yc + rng.uniform(0.05, 1.5, m)
    y0 = yc + rng.normal(scale=3.0, size=d)
    return W, G, lower, upper, y0


def brute_force_vertices(W, lower, upper, tol=1e-9):
    """Vertices by intersecting every d-subset of hyperplanes, then filtering."""
    m, d = W.shape
    planes = [(W[i], upper[i]) for i in range(m)] + [(W[i], lower[i]) for i in range(m)]
    pts = []
    for S in itertools.combinations(planes, d):
        M = np.array([p[0] for p in S])
        if np.linalg.matrix_rank(M) < d:
            continue
        y = np.linalg.solve(M, np.array([p[1] for p in S]))
        if np.all(W @ y <= upper + tol) and np.all(W @ y >= lower - tol):
            if not any(np.allclose(y, q, atol=1e-8) for q in pts):
                pts.append(y)
    return np.array(pts)


def _tree_path(n, springs, src, dst):
    """Chain of (spring, orientation) from src to dst through the spring graph."""
    adj = {v: [] for v in range(n)}
    for k, s in enumerate(springs):
        adj[s.left_node].append((s.right_node, k, 1))
        adj[s.right_node].append((s.left_node, k, -1))
    prev = {src: None}
    queue = [src]
    while queue:
        v = queue.pop(0)
        for w, k, o in adj[v]:
            if w not in prev:
                prev[w] = (v, k, o)
                queue.append(w)
    chain = []
    v = dst
    while prev[v] is not None:
        u, k, o = prev[v]
        chain.append((k, o))
        v = u
    return chain[::-1]


def random_reduced(rng, period=1.0, n_range=(3, 6), with_stress=True):
    """Random connected network with independent locks and a safe stress load."""
    while True:
        n = int(rng.integers(*n_range))
        springs = []
        perm = rng.permutation(n)
        for k in range(1, n):
            j = int(rng.integers(0, k))
            springs.append((int(perm[j]), int(perm[k])))
        for _ in range(int(rng.integers(0, 3))):
            i, j = rng.choice(n, 2, replace=False)
            springs.append((int(i), int(j)))
        specs = []
        for i, j in springs:
            c_lo = float(rng.uniform(0.5, 2.0))
            c_hi = float(rng.uniform(0.5, 2.0))
            specs.append(SpringSpec(i, j, float(rng.uniform(0.5, 3.0)), -c_lo, c_hi))
        net = NetworkTopology(n, specs)
        q = int(rng.integers(0, n - 1))
        lds = []
        for _ in range(q):
            I, J = rng.choice(n, 2, replace=False)
            chain = _tree_path(n, specs, int(I), int(J))
            inner = np.sort(rng.choice([0.25, 0.5, 0.75], int(rng.integers(0, 4)), replace=False))
            knots = np.concatenate([[0.0], inner, [1.0]]) * period
            vals = rng.uniform(-3, 3, knots.size)
            vals[-1] = vals[0]
            lds.append(DisplacementLoading(chain, PeriodicSignal(period, knots, vals)))
        try:
            red = build_reduced_system(net, lds, None, period)
        except ValidationError:
            continue
        if red.dim_V == 0:
            continue
        stress = None
        if with_stress and red.dim_U:
            # small U coordinates keep -A h inside C (sufficient safe-load test)
            umax = np.abs(red.a[:, None] * red.U_basis).sum(axis=1).max()
            cmin = min(red.c_plus.min(), -red.c_minus.max())
            amp = 0.4 * cmin / umax
            knots = np.array([0, 0.5 * period, period])
            vals = rng.uniform(-amp, amp, (3, red.dim_U))
            vals[-1] = vals[0]
            stress = UCoordinateStress(PeriodicSignal(period, knots, vals))
        return build_reduced_system(net, lds, stress, period)


def random_feasible_point(rng, reduced, t=0.0):
    """Projection of a random point onto the moving set at ``t``."""
    from springsweep import project_A
    snap = reduced.snapshot(t)
    y, _ = project_A(snap, rng.normal(scale=2.0, size=reduced.dim_V))
    # pull slightly inside along the segment to a second projected point
    y2, _ = project_A(snap, rng.normal(scale=0.5, size=reduced.dim_V))
    return 0.5 * (y + y2)
