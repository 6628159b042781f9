"""Decompositions U = U_Q + U^Sigma + U_R and the Hermitian splitting of complex subspaces."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .angles import isoclinicity
from .hqspace import TOL_SNAP, HQSpace, NumericalHealthWarning, adapted_basis, canonical_sign
from .kaehlerform import _spectral_blocks, invariant_subspaces, max_invariant_subspace
from .subspace import complement_in, is_invariant, orthonormalize

GRID = (64, 128)
INVARIANCE_CHECK = 1e-6
POLISH_GAP = 1e-3


@dataclass
class Decomposition:
    quaternionic: np.ndarray
    sigma: list = field(default_factory=list)   # (structure, frame) pairs
    real: np.ndarray = None
    residuals: dict = field(default_factory=dict)

    @property
    def structures(self):
        return [A for A, _ in self.sigma]


def _forms(space: HQSpace, W):
    return np.stack([W.T @ space.apply(e, W) for e in np.eye(3)])


def structure_gram(omegas):
    """M_ab = -Tr(Omega_a Omega_b) / m.  A^T M A = |Omega_A|_F^2 / m <= 1, equality iff W is A-complex."""
    m = omegas.shape[1]
    return np.einsum("aij,bij->ab", omegas, omegas) / m


def _top_structure(omegas):
    w, v = np.linalg.eigh(structure_gram(omegas))
    return w[-1], v[:, -1]


def sphere_grid(n_incl, n_azim):
    t = np.pi * (np.arange(n_incl) + 0.5) / n_incl
    p = 2 * np.pi * np.arange(n_azim) / n_azim
    t, p = np.meshgrid(t, p, indexing="ij")
    return np.stack([np.cos(t), np.sin(t) * np.cos(p), np.sin(t) * np.sin(p)], axis=-1).reshape(-1, 3)


def _sigma_max(omegas, A):
    return np.linalg.norm(np.tensordot(A, omegas, 1), 2)


def _ascend(omegas, A, tol=1e-7, max_iter=2000):
    """Alternating ascent of sigma_max(Omega_A) over the sphere.

    For the top singular pair (x, y) of Omega_A the best structure for that
    pair is v / |v| with v_a = x^T Omega_a y, so every step is monotone.
    """
    for _ in range(max_iter):
        u, _, vt = np.linalg.svd(np.tensordot(A, omegas, 1))
        v = np.einsum("i,aij,j->a", u[:, 0], omegas, vt[0])
        if np.linalg.norm(v) < 1e-300:
            return A
        nxt = v / np.linalg.norm(v)
        if np.linalg.norm(nxt - A) < tol:
            return nxt
        A = nxt
    return A


def _seeds(nodes, values, k=6, sep=0.3):
    picked = []
    for i in np.argsort(-values):
        if all(abs(nodes[i] @ nodes[j]) < np.cos(sep) for j in picked):
            picked.append(i)
            if len(picked) == k:
                break
    return [nodes[i] for i in picked]


def _polish(omegas, A, gap=POLISH_GAP, rounds=10):
    """Replace A by the top eigenvector of M on the leading singular blocks of Omega_A.

    If those blocks lie in an A*-complex subspace the step lands on A* exactly,
    which the ascent reaches only slowly when sigma_max is flat (small angles).
    """
    best, best_val = A, _sigma_max(omegas, A)
    for _ in range(rounds):
        Q, sig = _spectral_blocks(np.tensordot(A, omegas, 1), 1e-12)
        if sig.size == 0 or sig[0] < 1e-12:
            break
        C = Q[:, :2 * int(np.sum(sig >= sig[0] - gap))]
        _, A = _top_structure(np.einsum("ip,aij,jq->apq", C, omegas, C))
        val = _sigma_max(omegas, A)
        if val <= best_val + 1e-15:
            break
        best, best_val = A, val
    return best


def find_complex_structure(space: HQSpace, W, tol=TOL_SNAP, grid=GRID):
    """A structure A with sigma_max(Omega_A|W) >= 1 - tol, or None when W is totally real.

    Fast path: if W is a single complex subspace the top eigenvector of the
    3x3 matrix M is exact.  Otherwise a coarse sphere grid seeds an
    alternating ascent, stopped at a step size of 1e-7; ``_polish`` brings it
    within the snap and M restricted to the A-complex part makes it exact.
    """
    m = W.shape[1]
    if m < 2:
        return None
    omegas = _forms(space, W)
    lam, A = _top_structure(omegas)
    if lam < 1 - tol:
        nodes = sphere_grid(*grid)
        nodes = nodes[nodes @ np.array([1.0, 1e-3, 1e-6]) >= 0]   # A and -A are equivalent
        Om = (nodes @ omegas.reshape(3, -1)).reshape(-1, m, m)
        vals = np.linalg.eigvalsh(np.swapaxes(Om, 1, 2) @ Om)[:, -1]
        best, best_val = None, -1.0
        for A0 in _seeds(nodes, vals):
            A1 = _ascend(omegas, A0)
            val = _sigma_max(omegas, A1)
            if val > best_val:
                best, best_val = A1, val
            if best_val >= 1 - tol:
                break
        A = _polish(omegas, best)
        for _ in range(3):
            Q, sig = _spectral_blocks(np.tensordot(A, omegas, 1), tol)
            k = int(np.sum(sig >= 1.0))
            if k == 0:
                return None
            C = Q[:, :2 * k]
            _, A = _top_structure(np.einsum("ip,aij,jq->apq", C, omegas, C))
    if _sigma_max(omegas, A) < 1 - tol:
        return None
    return canonical_sign(A / np.linalg.norm(A))


def maximal_quaternionic(space: HQSpace, U, tol=TOL_SNAP):
    W = U
    while True:
        d = W.shape[1]
        for e in np.eye(3):
            W = max_invariant_subspace(space, e, W, tol)
        if W.shape[1] == d or W.shape[1] == 0:
            return W


def full_decompose(space: HQSpace, U, tol=TOL_SNAP, grid=GRID):
    """U = U_Q + sum of maximal pure I_i-complex addends + U_R (orthogonal sum)."""
    UQ = maximal_quaternionic(space, U, tol)
    R = complement_in(U, UQ)
    parts = []
    while R.shape[1] >= 2:
        A = find_complex_structure(space, R, tol, grid)
        if A is None:
            break
        Wc = max_invariant_subspace(space, A, R, tol)
        if Wc.shape[1] == 0:
            warnings.warn("structure search returned a structure with no invariant part", NumericalHealthWarning, stacklevel=2)
            break
        parts.append((A, Wc))
        R = complement_in(R, Wc)
    parts.sort(key=lambda p: tuple(np.round(p[0], 9)))
    dec = Decomposition(UQ, parts, R)
    dec.residuals = decomposition_residuals(space, U, dec)
    return dec


def decomposition_residuals(space: HQSpace, U, dec):
    blocks = [dec.quaternionic] + [W for _, W in dec.sigma] + [dec.real]
    F = np.hstack(blocks)
    res = {
        "orthonormality": float(np.abs(F.T @ F - np.eye(F.shape[1])).max(initial=0.0)),
        "span": float(np.linalg.norm(F - U @ (U.T @ F), 2)) if F.shape[1] else 0.0,
        "dimension_defect": int(U.shape[1] - F.shape[1]),
    }
    inv = [np.linalg.norm(space.apply(A, W) - W @ (W.T @ space.apply(A, W)), 2) for A, W in dec.sigma]
    for e in np.eye(3):
        Q = dec.quaternionic
        if Q.shape[1]:
            inv.append(np.linalg.norm(space.apply(e, Q) - Q @ (Q.T @ space.apply(e, Q)), 2))
    res["invariance"] = float(max(inv, default=0.0))
    return res


def decompose_complex(space: HQSpace, I, U, tol=TOL_SNAP):
    """Split a pure I-complex U into Hermitian-orthogonal 4-dimensional I-complex addends.

    Returns (theta, frame) pairs with theta non-decreasing; when dim U = 2m
    with m odd the last entry is a 2-plane with theta = pi/2.
    """
    I = np.asarray(I, dtype=float)
    if U.shape[1] % 2 or not is_invariant(space, I, U, INVARIANCE_CHECK):
        raise ValueError("subspace is not I-complex")
    if maximal_quaternionic(space, U, tol).shape[1]:
        raise ValueError("subspace is not pure (contains a quaternionic subspace)")
    _, _, K = adapted_basis(I)
    out, zero = [], np.zeros((U.shape[0], 0))
    for sigma, F in invariant_subspaces(space, K, U, snap=tol):
        if sigma == 0.0:
            zero = F
            continue
        if F.shape[1] % 4:
            warnings.warn(f"sigma cluster of dimension {F.shape[1]} is not a multiple of 4",
                          NumericalHealthWarning, stacklevel=2)
        while F.shape[1] >= 4:
            X = F[:, 0]
            Z = -space.apply(K, X)
            Z = F @ (F.T @ Z)
            Z /= np.linalg.norm(Z)
            block = orthonormalize(np.stack([X, Z, space.apply(I, X), space.apply(I, Z)], axis=1))
            out.append((isoclinicity(space, K, block).angle, block))
            F = complement_in(F, block)
    while zero.shape[1] >= 4:
        X = zero[:, 0]
        P = orthonormalize(np.stack([X, space.apply(I, X)], axis=1))
        Y = complement_in(zero, P)[:, 0]
        block = orthonormalize(np.stack([X, space.apply(I, X), Y, space.apply(I, Y)], axis=1))
        out.append((np.pi / 2, block))
        zero = complement_in(zero, block)
    out.sort(key=lambda p: p[0])
    if zero.shape[1] == 2:
        out.append((np.pi / 2, zero))
    return out


def kaehler_multiangle(space: HQSpace, I, U, tol=TOL_SNAP):
    return np.array([t for t, _ in decompose_complex(space, I, U, tol)])
