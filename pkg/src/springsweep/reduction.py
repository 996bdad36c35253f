"""Reduction of a loaded spring network to a sweeping process on V.

Builds the subspaces

    U = {x in D R^n : R^T x = 0},        V = A^{-1} U^perp,

the A-orthogonal projections onto them, the effective loadings
g(t) in V (displacement-controlled) and h(t) in U (stress-controlled), and
the moving polyhedron Pi(t) n V written in coordinates of a basis of V.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from . import linalg
from .errors import EmptySet, ValidationError
from .network import (NodalStress, UCoordinateStress, build_kinematic_matrix,
                      incidence_matrix, validate_loading_independence,
                      validate_network)
from .signals import merged_knots

FEAS_TOL = 1e-12


def compute_U_basis(D, R):
    """Basis of U as the columns of an m x (n-q-1) matrix.

    Ker(R^T D) is mapped through D and the image is put in reduced
    row-echelon form, so that e.g. a one-dimensional U comes out with a
    leading entry of exactly 1.
    """
    m, n = D.shape
    N = linalg.null_space(R.T @ D, n)
    return linalg.canonical_basis(linalg.orth(D @ N, m))


def compute_V_basis(A, U_basis):
    """Basis of V = Ker(U_basis^T A)."""
    m = A.shape[0]
    if U_basis.shape[1] == 0:
        return np.eye(m)
    return linalg.canonical_basis(linalg.null_space(U_basis.T @ A, m))


def solve_L(D, R):
    """Minimum-Frobenius-norm solution of R^T D L = I (n x q)."""
    if R.shape[1] == 0:
        return np.zeros((D.shape[1], 0))
    return np.linalg.pinv(R.T @ D)


def compute_L_bar(R, V_basis, D):
    """Coordinates in ``V_basis`` of P_V D L.

    Solves R^T V_basis Lbar = I together with V_basis Lbar in D R^n, the
    latter written as K^T V_basis Lbar = 0 for a basis K of Ker D^T.
    """
    m, q = R.shape
    d = V_basis.shape[1]
    if q == 0:
        return np.zeros((d, 0))
    K = linalg.null_space(D.T, m)
    M = np.vstack([R.T @ V_basis, K.T @ V_basis])
    rhs = np.vstack([np.eye(q), np.zeros((K.shape[1], q))])
    Lbar, res = linalg.lstsq(M, rhs)
    if res > 1e-9 * max(1.0, np.abs(M).max()):
        raise ValidationError(f"no matrix Lbar satisfies its defining equations (residual {res:.3g})")
    return Lbar


def a_projections(A, U_basis):
    """(P_U, P_V): complementary projections, orthogonal in <x, A y>."""
    m = A.shape[0]
    if U_basis.shape[1] == 0:
        return np.zeros((m, m)), np.eye(m)
    Ub = U_basis
    P_U = Ub @ np.linalg.solve(Ub.T @ A @ Ub, Ub.T @ A)
    return P_U, np.eye(m) - P_U


@dataclass(frozen=True, eq=False)
class MovingSetSnapshot:
    """Pi(t) n V as {y : lower <= W y <= upper} in V-basis coordinates."""

    time: float
    slab_rows: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    offset_g: np.ndarray
    offset_h: np.ndarray
    gram: np.ndarray

    @property
    def dim(self):
        return self.slab_rows.shape[1]

    def violation(self, yhat):
        Wy = self.slab_rows @ yhat
        return float(max(np.max(Wy - self.upper, initial=0.0),
                         np.max(self.lower - Wy, initial=0.0)))

    def contains(self, yhat, tol=1e-9):
        return self.violation(yhat) <= tol


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    network: object
    displacement_loadings: tuple
    stress_loading: object
    period: float
    D: np.ndarray
    R: np.ndarray
    A: np.ndarray
    U_basis: np.ndarray
    V_basis: np.ndarray
    L: np.ndarray
    L_bar: np.ndarray
    P_U: np.ndarray
    P_V: np.ndarray
    gram_V: np.ndarray
    W: np.ndarray

    @property
    def m(self):
        return self.D.shape[0]

    @property
    def n(self):
        return self.D.shape[1]

    @property
    def q(self):
        return self.R.shape[1]

    @property
    def dim_U(self):
        return self.U_basis.shape[1]

    @property
    def dim_V(self):
        return self.V_basis.shape[1]

    @property
    def a(self):
        return np.diag(self.A).copy()

    @property
    def c_minus(self):
        return self.network.lower

    @property
    def c_plus(self):
        return self.network.upper

    def l(self, t):
        """Enforced lengths l(t): shape (q,) or (len(t), q)."""
        t = np.asarray(t, dtype=float)
        if self.q == 0:
            return np.zeros(t.shape + (0,))
        return np.concatenate([ld.signal(t) for ld in self.displacement_loadings], axis=-1)

    def g(self, t):
        return effective_displacement(self, self.l(t))

    def h(self, t):
        return effective_stress(self, self.stress_loading, t)

    def f(self, t):
        """Nodal forces f(t) consistent with the stress loading."""
        t = np.asarray(t, dtype=float)
        sl = self.stress_loading
        if sl is None:
            return np.zeros(t.shape + (self.n,))
        if isinstance(sl, NodalStress):
            return sl.signal(t)
        return -(self.h(t) @ self.A) @ self.D

    def knot_times(self):
        """Union of all signal knots over one period."""
        sigs = [ld.signal for ld in self.displacement_loadings]
        if self.stress_loading is not None:
            sigs.append(self.stress_loading.signal)
        return merged_knots(sigs, self.period)

    def stress_knot_times(self):
        sigs = [] if self.stress_loading is None else [self.stress_loading.signal]
        return merged_knots(sigs, self.period)

    def a_norm(self, x):
        x = np.asarray(x)
        return np.sqrt(np.einsum("...i,i,...i->...", x, np.diag(self.A), x))

    def gram_norm(self, yhat):
        yhat = np.asarray(yhat)
        return np.sqrt(np.einsum("...i,ij,...j->...", yhat, self.gram_V, yhat))

    def to_reduced(self, y_full):
        """Coordinates in V_basis of the A-orthogonal projection of y onto V."""
        y_full = np.asarray(y_full, dtype=float)
        return np.linalg.solve(self.gram_V, self.V_basis.T @ self.A @ y_full.T).T

    def snapshot(self, t, check=True):
        return snapshot(self, t, check=check)


def build_reduced_system(network, displacement_loadings=(), stress_loading=None,
                         period=None, V_basis=None):
    """Validate the inputs and assemble every ingredient of the reduction.

    ``V_basis`` may be supplied to work in a particular basis of V (any
    basis is admissible); by default a canonical one is computed.
    """
    displacement_loadings = tuple(displacement_loadings)
    validate_network(network)
    D = build_kinematic_matrix(network)
    R = incidence_matrix(network, displacement_loadings)
    validate_loading_independence(D, R)
    A = network.A

    sigs = [ld.signal for ld in displacement_loadings]
    if stress_loading is not None:
        sigs.append(stress_loading.signal)
    periods = {s.period for s in sigs}
    if period is not None:
        periods.add(float(period))
    if len(periods) > 1:
        raise ValidationError(f"signals disagree on the period: {sorted(periods)}")
    period = periods.pop() if periods else 1.0

    U_basis = compute_U_basis(D, R)
    if V_basis is None:
        V_basis = compute_V_basis(A, U_basis)
    else:
        V_basis = np.asarray(V_basis, dtype=float)
        d_expected = network.m - U_basis.shape[1]
        if (V_basis.shape != (network.m, d_expected)
                or linalg.rank(V_basis) != d_expected
                or np.abs(U_basis.T @ A @ V_basis).max(initial=0.0) > 1e-10):
            raise ValidationError("supplied V_basis is not a basis of V")

    if isinstance(stress_loading, UCoordinateStress):
        if stress_loading.signal.ncomponents != U_basis.shape[1]:
            raise ValidationError(
                f"U-coordinate stress loading has {stress_loading.signal.ncomponents} "
                f"components but dim U = {U_basis.shape[1]}")
    elif isinstance(stress_loading, NodalStress):
        if stress_loading.signal.ncomponents != network.n:
            raise ValidationError(
                f"nodal stress loading has {stress_loading.signal.ncomponents} "
                f"components but the network has {network.n} nodes")

    P_U, P_V = a_projections(A, U_basis)
    return ReducedSystem(
        network=network,
        displacement_loadings=displacement_loadings,
        stress_loading=stress_loading,
        period=period,
        D=D, R=R, A=A,
        U_basis=U_basis,
        V_basis=V_basis,
        L=solve_L(D, R),
        L_bar=compute_L_bar(R, V_basis, D),
        P_U=P_U, P_V=P_V,
        gram_V=V_basis.T @ A @ V_basis,
        W=A @ V_basis,
    )


def effective_displacement(reduced, l):
    """g = V_basis Lbar l (works row-wise for a stack of l vectors)."""
    l = np.asarray(l, dtype=float)
    return l @ (reduced.V_basis @ reduced.L_bar).T


def effective_stress(reduced, loading, t):
    """h(t) in U for a NodalStress, UCoordinateStress, or None loading."""
    t = np.asarray(t, dtype=float)
    if loading is None:
        return np.zeros(t.shape + (reduced.m,))
    if isinstance(loading, UCoordinateStress):
        return loading.signal(t) @ reduced.U_basis.T
    if isinstance(loading, NodalStress):
        f = loading.signal(t)
        scale = max(1.0, float(np.abs(f).max(initial=0.0)))
        if np.any(np.abs(f.sum(axis=-1)) > loading.tolerance * scale):
            raise ValidationError("nodal forces do not sum to zero")
        # least-norm hbar with D^T hbar = -f, then h = P_U A^{-1} hbar
        hbar, _ = linalg.lstsq(reduced.D.T, -f.reshape(-1, reduced.n).T)
        h = (reduced.P_U @ (hbar / reduced.a[:, None])).T
        return h.reshape(t.shape + (reduced.m,))
    raise TypeError(f"unsupported stress loading {type(loading).__name__}")


def nodal_forces_for(reduced, H):
    """Zero-sum nodal forces producing U coordinates ``H``."""
    h = np.asarray(H, dtype=float) @ reduced.U_basis.T
    return -(h @ reduced.A) @ reduced.D


def stress_feasible(reduced, h, tol=FEAS_TOL):
    """True iff (C + A h) meets U^perp, i.e. Pi(t) n V is nonempty."""
    if reduced.dim_U == 0:
        return True
    lo, hi = reduced.c_minus, reduced.c_plus
    target = -(reduced.U_basis.T @ (reduced.a * h))
    scale = max(1.0, float(np.abs(lo).max()), float(np.abs(hi).max()))
    if reduced.dim_U == 1:
        u = reduced.U_basis[:, 0]
        smin = np.minimum(u * lo, u * hi).sum()
        smax = np.maximum(u * lo, u * hi).sum()
        return smin - tol * scale <= target[0] <= smax + tol * scale
    res = linprog(np.zeros(reduced.m), A_eq=reduced.U_basis.T, b_eq=target,
                  bounds=list(zip(lo, hi)), method="highs")
    return res.status == 0


def slab_bounds(reduced, g, h):
    """Lower and upper slab bounds c^-/+ + A h - A g."""
    a = reduced.a
    shift = a * (h - g)
    return reduced.c_minus + shift, reduced.c_plus + shift


def snapshot(reduced, t, check=True):
    """The moving set Pi(t) n V at time ``t`` in reduced coordinates."""
    g = reduced.g(t)
    h = reduced.h(t)
    if check and not stress_feasible(reduced, h):
        raise EmptySet(f"moving set is empty at t={float(t)} (safe load violated)", times=[t])
    lower, upper = slab_bounds(reduced, g, h)
    return MovingSetSnapshot(float(t), reduced.W, lower, upper, g, h, reduced.gram_V)
