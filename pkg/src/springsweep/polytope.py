"""Vertex enumeration of small slab polytopes {y : lower <= W y <= upper}.

Brute force over all d-subsets of the 2m directed faces: exact and simple
at desk scale, which is all this package targets.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionTooLarge, EmptySet

MAX_SUBSETS = 2_000_000


@dataclass(frozen=True, eq=False)
class VertexSet:
    """Deduplicated, lexicographically sorted vertices.

    ``faces[v]`` lists the signed 1-based indices of the faces active at
    vertex v (+i upper bound of slab i, -i lower bound).  ``edges`` are the
    vertex pairs sharing at least d-1 active faces.
    """

    vertices: np.ndarray
    faces: tuple
    edges: tuple

    def __len__(self):
        return self.vertices.shape[0]


def _dedupe(points, tol):
    order = np.lexsort(points.T[::-1])
    kept = []
    for idx in order:
        p = points[idx]
        if not any(np.max(np.abs(p - points[j])) <= tol for j in kept):
            kept.append(idx)
    return points[kept]


def enumerate_vertices(W, lower, upper, tol=1e-9, max_subsets=MAX_SUBSETS):
    W = np.asarray(W, dtype=float)
    m, d = W.shape
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    scale = max(1.0, float(np.abs(np.concatenate([lower, upper])).max()))
    feas_tol = tol * scale

    if d == 0:
        if np.all(lower <= feas_tol) and np.all(upper >= -feas_tol):
            return VertexSet(np.zeros((1, 0)), (tuple(),), tuple())
        raise EmptySet("zero-dimensional set is empty")
    if math.comb(2 * m, d) > max_subsets:
        raise DimensionTooLarge(
            f"{math.comb(2 * m, d)} face subsets exceed the brute-force limit {max_subsets}")

    N = np.vstack([W, -W])
    b = np.concatenate([upper, -lower])
    found = []
    for S in itertools.combinations(range(2 * m), d):
        S = list(S)
        M = N[S]
        if abs(np.linalg.det(M)) <= 1e-12 * max(1.0, np.abs(M).max()) ** d:
            continue
        y = np.linalg.solve(M, b[S])
        if np.all(N @ y <= b + feas_tol):
            found.append(y)
    if not found:
        raise EmptySet("polytope has no vertices (empty or unbounded)")
    V = _dedupe(np.array(found), tol)
    V = V[np.lexsort(V.T[::-1])]

    faces = []
    for y in V:
        slack_up = W @ y - upper
        slack_lo = lower - W @ y
        act = [i + 1 for i in range(m) if slack_up[i] >= -feas_tol and np.any(W[i])]
        act += [-(i + 1) for i in range(m) if slack_lo[i] >= -feas_tol and np.any(W[i])]
        faces.append(tuple(sorted(act, key=lambda j: (abs(j), j))))
    edges = []
    for a, b2 in itertools.combinations(range(len(V)), 2):
        if len(set(faces[a]) & set(faces[b2])) >= d - 1:
            edges.append((a, b2))
    return VertexSet(V, tuple(faces), tuple(edges))


def snapshot_vertices(snap, tol=1e-9):
    return enumerate_vertices(snap.slab_rows, snap.lower, snap.upper, tol=tol)
