"""Projection onto a slab polytope in the metric of a Gram matrix.

    minimise (y - y0)^T G (y - y0)  subject to  lower <= W y <= upper

With G = R^T R and z = R (y - y0) this is a least-distance problem
min |z| s.t. N z >= c, solved through its NNLS dual (Lawson & Hanson,
"Solving Least Squares Problems", ch. 23).  The NNLS solution gives the
KKT multipliers directly, which the plastic-flow recovery relies on.
"""

import numpy as np
import scipy.linalg

from .errors import InfeasibleSet, MaxIterations


def nnls(E, f, maxiter=None):
    """Lawson-Hanson active-set solution of min |E u - f| over u >= 0."""
    m, n = E.shape
    maxiter = 5 * n + 10 if maxiter is None else maxiter
    tol = 10 * np.finfo(float).eps * np.abs(E).sum(axis=0).max(initial=1.0) * max(m, n)
    passive = np.zeros(n, dtype=bool)
    skip = np.zeros(n, dtype=bool)
    u = np.zeros(n)
    it = 0
    while True:
        grad = E.T @ (f - E @ u)
        grad[passive | skip] = -np.inf
        j = int(np.argmax(grad)) if n else -1
        if j < 0 or grad[j] <= tol:
            break
        passive[j] = True
        while True:
            it += 1
            if it > maxiter:
                raise MaxIterations(f"NNLS did not terminate in {maxiter} iterations")
            idx = np.flatnonzero(passive)
            z = np.zeros(n)
            z[idx] = np.linalg.lstsq(E[:, idx], f, rcond=None)[0]
            if np.all(z[idx] > 0):
                u = z
                skip[:] = False
                break
            bad = idx[z[idx] <= 0]
            alpha = np.min(u[bad] / (u[bad] - z[bad]))
            u = u + alpha * (z - u)
            passive &= u > tol
            u[~passive] = 0.0
            if not passive[j] and alpha == 0.0:
                # rounding left the entering column stuck at zero
                skip[j] = True
                break
    return u, float(np.linalg.norm(E @ u - f))


class SlabProjector:
    """Reusable projector for a fixed (W, G); bounds vary per call."""

    def __init__(self, W, gram, tolerance=1e-10, maxiter=None):
        self.W = np.asarray(W, dtype=float)
        self.gram = np.asarray(gram, dtype=float)
        self.m, self.d = self.W.shape
        self.tolerance = tolerance
        self.maxiter = maxiter
        if self.d:
            self._chol = scipy.linalg.cholesky(self.gram, lower=False)
            # rows of W R^{-1}
            self._WRinv = scipy.linalg.solve_triangular(
                self._chol, self.W.T, trans="T", lower=False).T
        self._nonzero = np.any(self.W != 0.0, axis=1)

    def __call__(self, lower, upper, y0):
        """Return (y*, w) with G (y0 - y*) = W^T w; w > 0 on upper faces."""
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        y0 = np.asarray(y0, dtype=float)
        m, d = self.m, self.d
        scale = max(1.0, float(np.abs(upper).max(initial=0.0)),
                    float(np.abs(lower).max(initial=0.0)))
        tol = self.tolerance * scale
        if np.any(~self._nonzero & ((lower > tol) | (upper < -tol))):
            raise InfeasibleSet("a degenerate slab excludes every point")
        if d == 0:
            return y0.copy(), np.zeros(m)

        Wy = self.W @ y0
        if np.all(Wy <= upper + tol) and np.all(Wy >= lower - tol):
            return y0.copy(), np.zeros(m)

        # constraints in z: -WRinv z >= Wy - upper ;  WRinv z >= lower - Wy
        N = np.vstack([-self._WRinv, self._WRinv])
        c = np.concatenate([Wy - upper, lower - Wy])
        s = max(1.0, float(np.abs(c).max()))
        E = np.vstack([N.T, c[None, :] / s])
        f = np.zeros(d + 1)
        f[-1] = 1.0
        u, _ = nnls(E, f, maxiter=self.maxiter)
        r = E @ u - f
        if abs(r[-1]) <= 1e-12:
            raise InfeasibleSet("moving set is empty")
        mu = u / (-r[-1])
        z = N.T @ mu
        z_check = -r[:d] / r[-1]
        if np.max(np.abs(z - z_check)) > 1e-8 * max(1.0, float(np.abs(z).max())):
            raise InfeasibleSet("least-distance dual did not close; set is numerically empty")
        mu = mu * s
        z = z * s
        y = y0 + scipy.linalg.solve_triangular(self._chol, z, lower=False)
        w = mu[:m] - mu[m:]
        w[np.abs(w) <= 1e-15 * max(1.0, float(np.abs(w).max()))] = 0.0
        y, w = self._polish(y0, y, w, lower, upper, tol)
        return y, w

    def _polish(self, y0, y, w, lower, upper, tol):
        """Re-solve the equality-constrained KKT system on the active set."""
        act = np.flatnonzero(w != 0.0)
        if act.size == 0 or act.size > self.d:
            return y, w
        Wa = self.W[act]
        ba = np.where(w[act] > 0, upper[act], lower[act])
        d, k = self.d, act.size
        K = np.zeros((d + k, d + k))
        K[:d, :d] = self.gram
        K[:d, d:] = Wa.T
        K[d:, :d] = Wa
        rhs = np.concatenate([self.gram @ y0, ba])
        try:
            sol = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError:
            return y, w
        y2, wa = sol[:d], sol[d:]
        if np.any(np.sign(wa) != np.sign(w[act])):
            return y, w
        Wy = self.W @ y2
        if np.any(Wy > upper + tol) or np.any(Wy < lower - tol):
            return y, w
        w2 = np.zeros_like(w)
        w2[act] = wa
        return y2, w2


def project_A(snapshot, y0, tolerance=1e-10):
    """Project ``y0`` onto a MovingSetSnapshot in its Gram metric."""
    return SlabProjector(snapshot.slab_rows, snapshot.gram, tolerance)(
        snapshot.lower, snapshot.upper, y0)
