"""Small dense rank-revealing helpers (desk-scale matrices only)."""

import numpy as np
import scipy.linalg

RANK_RTOL = 1e-10


def rank(M, rtol=RANK_RTOL):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def null_space(M, ncols, rtol=RANK_RTOL):
    """Orthonormal basis of Ker M; ``ncols`` fixes the width when M has no rows."""
    M = np.asarray(M, dtype=float).reshape(-1, ncols)
    if M.shape[0] == 0:
        return np.eye(ncols)
    return scipy.linalg.null_space(M, rcond=rtol)


def orth(M, nrows, rtol=RANK_RTOL):
    M = np.asarray(M, dtype=float).reshape(nrows, -1)
    if M.shape[1] == 0 or not np.any(M):
        return np.zeros((nrows, 0))
    return scipy.linalg.orth(M, rcond=rtol)


def canonical_basis(B, tol=1e-12):
    """Reduced-row-echelon basis of the column span of ``B``.

    The result does not depend on which basis of the subspace was passed in,
    so downstream coordinates are reproducible across LAPACK builds.
    Pivot entries are exactly 1.
    """
    B = np.asarray(B, dtype=float)
    m, k = B.shape
    if k == 0:
        return B.copy()
    X = B.T.copy()
    scale = max(np.abs(X).max(), 1.0)
    row = 0
    pivots = []
    for col in range(m):
        if row == k:
            break
        p = row + int(np.argmax(np.abs(X[row:, col])))
        if abs(X[p, col]) <= tol * scale:
            continue
        X[[row, p]] = X[[p, row]]
        X[row] /= X[row, col]
        for r in range(k):
            if r != row:
                X[r] -= X[r, col] * X[row]
        X[row, col] = 1.0
        pivots.append(col)
        row += 1
    for r, col in enumerate(pivots):
        for rr in range(k):
            if rr != r:
                X[rr, col] = 0.0
    return X[:row].T


def lstsq(M, b):
    """Minimum-norm least-squares solution and the residual norm."""
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    if M.shape[1] == 0:
        return np.zeros((0,) + b.shape[1:]), float(np.linalg.norm(b))
    x, *_ = np.linalg.lstsq(M, b, rcond=None)
    return x, float(np.linalg.norm(M @ x - b))
