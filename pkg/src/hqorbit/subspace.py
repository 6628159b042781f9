"""Subspaces of R^{4n} as column-orthonormal frames.

A frame is a plain ``(4n, m)`` array with orthonormal columns.  Frames are
never canonicalised by sign or column order.
"""
from __future__ import annotations

import json

import numpy as np

from .hqspace import TOL_RANK, HQSpace, qconj, qmul


def _as_matrix(vectors, dim=None):
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        return np.asarray(vectors, dtype=float)
    vectors = [np.asarray(v, dtype=float) for v in vectors]
    if not vectors:
        return np.zeros((dim or 0, 0))
    return np.stack(vectors, axis=1)


def empty_frame(dim):
    return np.zeros((dim, 0))


def orthonormalize(vectors, tol=TOL_RANK, dim=None):
    """Orthonormal frame for the span of ``vectors``, dropping numerically dependent directions."""
    M = _as_matrix(vectors, dim)
    if M.shape[1] == 0:
        return np.zeros((M.shape[0], 0))
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    return U[:, s > tol]


def gram_schmidt(vectors, tol=TOL_RANK, dim=None):
    """Order-preserving orthonormalisation (modified Gram-Schmidt, two passes)."""
    M = _as_matrix(vectors, dim)
    out = []
    for v in M.T:
        w = v.copy()
        for _ in range(2):
            for q in out:
                w -= (q @ w) * q
        r = np.linalg.norm(w)
        if r > tol:
            out.append(w / r)
    return _as_matrix(out, M.shape[0])


def _hmat(space, vectors):
    """Vectors as quaternion arrays of shape (n, 4)."""
    return [np.asarray(v, dtype=float).reshape(space.n, 4) for v in vectors]


def h_orthonormalize(space: HQSpace, vectors, tol=TOL_RANK):
    """Quaternionic Gram-Schmidt.

    Returns a list of vectors v_p with v_p . v_q = delta_pq, spanning the same
    right H-submodule as the input.  Projection onto the line v H is
    ``v (v . w)``.
    """
    out = []
    for h in _hmat(space, _as_matrix(vectors, space.dim).T):
        w = h.copy()
        for _ in range(2):
            for q in out:
                coeff = qmul(qconj(q), w).sum(axis=0)
                w = w - qmul(q, coeff)
        r = np.linalg.norm(w)
        if r > tol:
            out.append(w / r)
    return [v.reshape(-1) for v in out]


def h_frame_matrix(space: HQSpace, hvectors):
    """Real orthonormal frame of the quaternionic span of an H-orthonormal list."""
    cols = []
    for v in hvectors:
        for q in np.eye(4):
            cols.append(space.right_multiply(v, q))
    return _as_matrix(cols, space.dim)


def project(U, X):
    return U @ (U.T @ X)


def complement_in(W, U):
    """Frame of the orthogonal complement of U inside W (U is assumed to lie in W)."""
    k = U.shape[1]
    if k == 0:
        return W.copy()
    _, _, Vt = np.linalg.svd(U.T @ W)
    return W @ Vt[k:].T


def complement(U, dim=None):
    dim = U.shape[0] if dim is None else dim
    return complement_in(np.eye(dim), U)


def intersect(U, W, tol=TOL_RANK):
    """Frame of U cap W: directions whose principal angle is numerically zero."""
    if U.shape[1] == 0 or W.shape[1] == 0:
        return np.zeros((U.shape[0], 0))
    Y, s, _ = np.linalg.svd(U.T @ W)
    k = int(np.sum(s >= 1 - tol))
    return U @ Y[:, :k]


def subspace_sum(U, W, tol=TOL_RANK):
    return orthonormalize(np.hstack([U, W]), tol)


def quaternionify(space: HQSpace, U, tol=TOL_RANK):
    """Frame of span(U, IU, JU, KU)."""
    return orthonormalize(np.hstack([U] + [space.apply(e, U) for e in np.eye(3)]), tol)


def is_invariant(space: HQSpace, A, U, tol=1e-6):
    """True iff AU = U up to ``tol`` in spectral norm."""
    if U.shape[1] == 0:
        return True
    AU = space.apply(A, U)
    return np.linalg.norm(AU - project(U, AU), 2) <= tol


def is_hermitian_orthogonal(space: HQSpace, U, W, tol=1e-8):
    UH = quaternionify(space, U)
    WH = quaternionify(space, W)
    if UH.shape[1] == 0 or WH.shape[1] == 0:
        return True
    return np.linalg.norm(UH.T @ WH, 2) <= np.sin(tol) + 1e-15


def frame_to_json(n, U):
    return {"n": int(n), "columns": [list(map(float, c)) for c in np.asarray(U).T]}


def frame_from_json(obj, tol=TOL_RANK):
    """Parse a frame object; returns (n, frame, residual).

    Columns need not be orthonormal.  Full-rank input keeps its column order
    and orientation (Gram-Schmidt order).  The residual is the largest
    distance of an input column from the span of the returned frame.
    """
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "n" not in obj or "columns" not in obj:
        raise ValueError("frame object needs keys 'n' and 'columns'")
    n = obj["n"]
    if not isinstance(n, int) or n < 1:
        raise ValueError("'n' must be a positive integer")
    cols = obj["columns"]
    if not isinstance(cols, list):
        raise ValueError("'columns' must be a list")
    for i, c in enumerate(cols):
        if not isinstance(c, list) or len(c) != 4 * n:
            raise ValueError(f"column {i} must be a list of {4 * n} numbers")
    M = np.array(cols, dtype=float).T.reshape(4 * n, len(cols))
    if not np.all(np.isfinite(M)):
        raise ValueError("columns contain non-finite values")
    U = orthonormalize(M, tol)
    if 0 < U.shape[1] == M.shape[1]:
        q, r = np.linalg.qr(U @ (U.T @ M))
        U = q * np.sign(np.diag(r))
    residual = float(np.linalg.norm(M - project(U, M), axis=0).max()) if M.shape[1] else 0.0
    return n, U, residual
