"""Spring networks, their loadings, and the raw matrices D, R, A, C.

Node and spring indices are 0-based here; scenario files use 1-based
indices and are converted on load.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from . import linalg
from .errors import (BrokenChain, DependentLoadings, DisconnectedGraph,
                     RankDeficient, UnbalancedForce, ValidationError)
from .signals import PeriodicSignal


@dataclass(frozen=True)
class SpringSpec:
    left_node: int
    right_node: int
    stiffness: float
    lower_bound: float
    upper_bound: float

    def problems(self, node_count=None):
        out = []
        if self.left_node == self.right_node:
            out.append("left and right node coincide")
        if node_count is not None:
            for name, v in (("left_node", self.left_node), ("right_node", self.right_node)):
                if not 0 <= v < node_count:
                    out.append(f"{name}={v} outside 0..{node_count - 1}")
        if not self.stiffness > 0:
            out.append(f"stiffness must be positive, got {self.stiffness}")
        if not self.lower_bound < self.upper_bound:
            out.append(f"lower_bound {self.lower_bound} >= upper_bound {self.upper_bound}")
        if not self.lower_bound <= 0.0 <= self.upper_bound:
            out.append("elastic range must contain zero stress")
        return out


@dataclass(frozen=True)
class NetworkTopology:
    node_count: int
    springs: tuple

    def __post_init__(self):
        object.__setattr__(self, "springs", tuple(self.springs))
        problems = []
        if self.node_count < 2:
            problems.append("a network needs at least two nodes")
        if not self.springs:
            problems.append("a network needs at least one spring")
        for k, s in enumerate(self.springs):
            problems += [f"spring {k + 1}: {p}" for p in s.problems(self.node_count)]
        if problems:
            raise ValidationError(problems)

    @property
    def m(self):
        return len(self.springs)

    @property
    def n(self):
        return self.node_count

    @property
    def stiffness(self):
        return np.array([s.stiffness for s in self.springs])

    @property
    def lower(self):
        return np.array([s.lower_bound for s in self.springs])

    @property
    def upper(self):
        return np.array([s.upper_bound for s in self.springs])

    @property
    def A(self):
        return np.diag(self.stiffness)


def build_kinematic_matrix(topology):
    """m x n matrix D with (D xi)_k = xi[right_k] - xi[left_k]."""
    D = np.zeros((topology.m, topology.n))
    for k, s in enumerate(topology.springs):
        D[k, s.left_node] = -1.0
        D[k, s.right_node] = 1.0
    return D


@dataclass(frozen=True)
class NetworkDiagnostics:
    connected: bool
    rank_D: int
    cycle_space_dim: int
    components: int


def _components(n, edges):
    if not edges:
        return n, np.arange(n)
    i, j = np.array(edges).T
    g = scipy.sparse.coo_matrix((np.ones(len(edges)), (i, j)), shape=(n, n))
    return scipy.sparse.csgraph.connected_components(g, directed=False)


def validate_network(topology):
    """Check connectivity and rank D = n - 1.

    Raises DisconnectedGraph or RankDeficient; otherwise returns diagnostics
    including dim Ker D^T = m - n + 1.
    """
    edges = [(s.left_node, s.right_node) for s in topology.springs]
    ncomp, _ = _components(topology.n, edges)
    if ncomp != 1:
        raise DisconnectedGraph(f"spring graph has {ncomp} connected components")
    r = linalg.rank(build_kinematic_matrix(topology))
    if r != topology.n - 1:
        raise RankDeficient(f"rank D = {r}, expected {topology.n - 1}")
    return NetworkDiagnostics(True, r, topology.m - topology.n + 1, 1)


@dataclass(frozen=True)
class DisplacementLoading:
    """Length lock between two nodes realised along a chain of springs.

    ``chain`` is a sequence of ``(spring_index, orientation)`` with
    orientation +1 when the spring is walked from its left to its right
    node.  ``signal`` is the scalar enforced length l(t).
    """

    chain: tuple
    signal: PeriodicSignal

    def __post_init__(self):
        chain = tuple((int(k), int(o)) for k, o in self.chain)
        if not chain:
            raise BrokenChain("empty chain")
        for k, o in chain:
            if o not in (1, -1):
                raise BrokenChain(f"orientation of spring {k + 1} must be +1 or -1, got {o}")
        if self.signal.ncomponents != 1:
            raise ValidationError("displacement signal must be scalar")
        object.__setattr__(self, "chain", chain)

    def endpoints(self, topology):
        """Nodes (I, J) joined by the chain; raises BrokenChain."""
        node = None
        start = None
        for pos, (k, o) in enumerate(self.chain):
            if not 0 <= k < topology.m:
                raise BrokenChain(f"chain refers to unknown spring {k + 1}")
            s = topology.springs[k]
            a, b = (s.left_node, s.right_node) if o == 1 else (s.right_node, s.left_node)
            if node is None:
                start = a
            elif a != node:
                raise BrokenChain(
                    f"chain step {pos + 1} (spring {k + 1}) does not start at node {node + 1}")
            node = b
        if start == node:
            raise BrokenChain("chain is closed: both endpoints are the same node")
        return start, node


def incidence_vector(chain, m):
    """R^k in {-1, 0, 1}^m for a chain of (spring, orientation) pairs."""
    R = np.zeros(m)
    for k, o in chain:
        R[k] += o
    return R


def incidence_matrix(topology, loadings):
    """m x q matrix whose columns are the incidence vectors of the loadings."""
    cols = []
    for ld in loadings:
        ld.endpoints(topology)
        cols.append(incidence_vector(ld.chain, topology.m))
    if not cols:
        return np.zeros((topology.m, 0))
    return np.column_stack(cols)


def validate_loading_independence(D, R):
    """Require rank(R^T D) = q."""
    q = R.shape[1]
    if q == 0:
        return 0
    r = linalg.rank(R.T @ D)
    if r != q:
        raise DependentLoadings(
            f"displacement-controlled loadings are dependent: rank(R^T D) = {r} < q = {q}")
    return r


def detect_blocked_springs(topology, loadings):
    """Indices of springs whose endpoints are joined by displacement locks."""
    pairs = [ld.endpoints(topology) for ld in loadings]
    _, labels = _components(topology.n, pairs)
    return {k for k, s in enumerate(topology.springs)
            if labels[s.left_node] == labels[s.right_node]}


@dataclass(frozen=True)
class NodalStress:
    """External nodal forces f(t) (n components, zero sum)."""

    signal: PeriodicSignal
    tolerance: float = field(default=1e-10)

    def __post_init__(self):
        sums = self.signal.values.sum(axis=1)
        scale = max(1.0, float(np.abs(self.signal.values).max()))
        bad = np.flatnonzero(np.abs(sums) > self.tolerance * scale)
        if bad.size:
            t = self.signal.times[bad[0]]
            raise UnbalancedForce(
                f"nodal forces do not sum to zero at t={t} (sum={sums[bad[0]]:.3g})")


@dataclass(frozen=True)
class UCoordinateStress:
    """Stress loading given directly as coordinates H(t) in the U basis."""

    signal: PeriodicSignal
