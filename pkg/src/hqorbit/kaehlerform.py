"""The Kaehler form omega^A restricted to a subspace, its standard bases and invariant subspaces."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .angles import CLUSTER_GAP, cluster
from .hqspace import TOL_SNAP, HQSpace, NumericalHealthWarning


@dataclass
class SkewForm:
    omega: np.ndarray
    frame: np.ndarray
    structure: np.ndarray


@dataclass
class StandardBasis:
    """Orthonormal basis (X_1, ..., X_m) with <X_{2i-1}, A X_{2i}> = sigma_i >= 0, zero elsewhere.

    ``sigmas`` has one entry per 2x2 block (trailing zero blocks included);
    when m is odd the last column is an unpaired kernel vector.
    """
    frame: np.ndarray
    sigmas: np.ndarray
    local: np.ndarray

    @property
    def zero_dim(self):
        return self.frame.shape[1] - 2 * int(np.sum(self.sigmas > 0))


def restrict_form(space: HQSpace, A, U):
    return SkewForm(U.T @ space.apply(A, U), U, np.asarray(A, dtype=float))


def _spectral_blocks(omega, snap=TOL_SNAP):
    """Real block diagonalisation of a skew matrix.

    Returns (Q, sigmas) with Q orthogonal, columns grouped as blocks
    (x_i, y_i) with x_i^T omega y_i = sigma_i, sigmas non-increasing and
    snapped to 1 / 0, followed by an orthonormal kernel basis.
    """
    m = omega.shape[0]
    if m == 0:
        return np.zeros((0, 0)), np.zeros(0)
    lam, V = np.linalg.eigh(1j * omega)
    order = np.argsort(-lam)
    lam, V = lam[order], V[:, order]
    pos = lam > snap
    cols, sig = [], []
    for s, v in zip(lam[pos], V[:, pos].T):
        # i omega v = s v gives omega x = s y and omega y = -s x for v = x + i y
        x, y = np.sqrt(2) * v.real, -np.sqrt(2) * v.imag
        cols += [x, y]
        sig.append(s)
    Q = np.array(cols).T.reshape(m, len(cols))
    if Q.shape[1]:
        # polish orthonormality without changing the column order or signs
        q, r = np.linalg.qr(Q)
        Q = q * np.sign(np.diag(r))
    if Q.shape[1] < m:
        if Q.shape[1]:
            _, _, Vt = np.linalg.svd(Q.T)
            K = Vt[Q.shape[1]:].T
        else:
            K = np.eye(m)
        Q = np.hstack([Q, K])
    sig = np.array(sig)
    sig = np.where(sig >= 1 - snap, 1.0, sig)
    if np.any(sig > 1 + 1e-9):
        warnings.warn(f"Kaehler form singular value {sig.max():.12g} exceeds 1", NumericalHealthWarning, stacklevel=3)
    sig = np.minimum(sig, 1.0)
    return Q, np.concatenate([sig, np.zeros((m - 2 * len(sig)) // 2)])


def standard_basis(form: SkewForm, snap=TOL_SNAP):
    Q, sig = _spectral_blocks(form.omega, snap)
    return StandardBasis(form.frame @ Q, sig, Q)


def invariant_subspaces(space: HQSpace, A, U, snap=TOL_SNAP, gap=CLUSTER_GAP):
    """Canonical omega^A-invariant subspaces of U grouped by clustered sigma (descending)."""
    m = U.shape[1]
    if m == 0:
        return []
    Q, sig = _spectral_blocks(U.T @ space.apply(A, U), snap)
    npos = int(np.sum(sig > 0))
    out = []
    for g in cluster(sig[:npos], gap):
        idx = [c for i in g for c in (2 * i, 2 * i + 1)]
        out.append((float(np.mean(sig[g])), U @ Q[:, idx]))
        if len(g) > 1 and sig[g[0]] - sig[g[-1]] > gap:
            warnings.warn("sigma cluster spans more than the clustering gap", NumericalHealthWarning, stacklevel=2)
    if 2 * npos < m:
        out.append((0.0, U @ Q[:, 2 * npos:]))
    return out


def max_invariant_subspace(space: HQSpace, A, U, tol=TOL_SNAP):
    """Largest W in U with AW = W: the blocks of omega^A|_U with sigma snapped to 1."""
    if U.shape[1] == 0:
        return U.copy()
    Q, sig = _spectral_blocks(U.T @ space.apply(A, U), tol)
    k = int(np.sum(sig >= 1.0))
    return U @ Q[:, :2 * k]
