"""The quaternionic Hermitian space H^n realised as R^{4n}.

Quaternionic coordinate ``a`` occupies the real slots ``4a .. 4a+3`` in the
order (1, i, j, k).  H^n is a right H-module and the hypercomplex structure is
given by right multiplications, I = R_{-i}, J = R_{-j}, K = R_{-k}.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL_RANK = 1e-8
TOL_SNAP = 1e-8
TOL_COMPARE = 1e-6


class NumericalHealthWarning(RuntimeWarning):
    """Raised (as a warning) when an input sits close to a numerical degeneracy."""


def qmul(p, q):
    """Hamilton product of quaternion arrays with trailing axis (w, x, y, z)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack([
        pw * qw - px * qx - py * qy - pz * qz,
        pw * qx + px * qw + py * qz - pz * qy,
        pw * qy - px * qz + py * qw + pz * qx,
        pw * qz + px * qy - py * qx + pz * qw,
    ], axis=-1)


def qconj(q):
    q = np.array(q, dtype=float)
    q[..., 1:] *= -1
    return q


@dataclass(frozen=True)
class Quaternion:
    w: float
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, a):
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def as_array(self):
        return np.array([self.w, self.x, self.y, self.z])

    @property
    def real(self):
        return self.w

    @property
    def imag(self):
        return np.array([self.x, self.y, self.z])

    def conjugate(self):
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self):
        return float(np.linalg.norm(self.as_array()))

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion.from_array(qmul(self.as_array(), other.as_array()))
        return Quaternion.from_array(self.as_array() * other)

    def __rmul__(self, other):
        return Quaternion.from_array(other * self.as_array())

    def __add__(self, other):
        return Quaternion.from_array(self.as_array() + other.as_array())

    def __sub__(self, other):
        return Quaternion.from_array(self.as_array() - other.as_array())

    def __neg__(self):
        return Quaternion.from_array(-self.as_array())


# 4x4 blocks acting on one quaternionic coordinate (a, b, c, d)
_BLOCKS = np.array([
    [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]],   # I: (b, -a, -d, c)
    [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]],   # J: (c, d, -a, -b)
    [[0, 0, 0, 1], [0, 0, -1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]],   # K: (d, -c, b, -a)
], dtype=float)


def check_so3(C, tol=1e-10):
    C = np.asarray(C, dtype=float)
    if C.shape != (3, 3):
        raise ValueError("admissible basis must be a 3x3 matrix")
    if np.abs(C.T @ C - np.eye(3)).max() > tol or abs(np.linalg.det(C) - 1) > tol:
        raise ValueError("admissible basis must lie in SO(3)")
    return C


def rotate_basis(C):
    """Coefficients of (I', J', K') = (I, J, K) C in the basis (I, J, K)."""
    C = check_so3(C)
    return C[:, 0].copy(), C[:, 1].copy(), C[:, 2].copy()


def as_structure(A, tol=1e-9):
    """Validate a unit coefficient triple naming A = aI + bJ + cK."""
    A = np.asarray(A, dtype=float).reshape(3)
    if abs(np.linalg.norm(A) - 1) > tol:
        raise ValueError(f"structure coefficients must be a unit vector, got norm {np.linalg.norm(A)}")
    return A


class HQSpace:
    """H^n with an admissible basis of its quaternionic structure.

    Structure coefficients passed to the methods are read in the admissible
    basis ``basis`` (columns of an SO(3) matrix expressed in the standard
    (I, J, K)).  The default is the standard basis.
    """

    def __init__(self, n, basis=None):
        if int(n) != n or n < 1:
            raise ValueError("quaternionic dimension must be a positive integer")
        self.n = int(n)
        self.basis = np.eye(3) if basis is None else check_so3(basis)

    @property
    def dim(self):
        return 4 * self.n

    def with_basis(self, basis):
        return HQSpace(self.n, basis)

    def standard_coeffs(self, A):
        return self.basis @ as_structure(A)

    def block(self, A):
        return np.tensordot(self.standard_coeffs(A), _BLOCKS, axes=1)

    def _check(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[0] != self.dim:
            raise ValueError(f"expected leading dimension {self.dim}, got {X.shape[0]}")
        return X

    def apply(self, A, X):
        """(aI + bJ + cK) X for a vector or a matrix of column vectors."""
        X = self._check(X)
        Y = np.einsum("ij,pj...->pi...", self.block(A), X.reshape(self.n, 4, *X.shape[1:]))
        return Y.reshape(X.shape)

    def matrix(self, A):
        """Dense 4n x 4n matrix of a structure; for output and tests only."""
        return np.kron(np.eye(self.n), self.block(A))

    @property
    def structures(self):
        return np.eye(3)

    def right_multiply(self, X, q):
        """Xq, quaternion right multiplication in every coordinate."""
        X = self._check(X)
        q = q.as_array() if isinstance(q, Quaternion) else np.asarray(q, dtype=float)
        Xq = np.moveaxis(X.reshape(self.n, 4, *X.shape[1:]), 1, -1)
        return np.moveaxis(qmul(Xq, q), -1, 1).reshape(X.shape)

    def hermitian_product(self, L, M):
        """L.M = <L,M> + <L,I'M> i' + <L,J'M> j' + <L,K'M> k' in the admissible basis."""
        L = self._check(L)
        M = self._check(M)
        parts = [L @ M] + [L @ self.apply(e, M) for e in np.eye(3)]
        return Quaternion(*map(float, parts))

    def hermitian_gram(self, vectors):
        """Quaternion Gram matrix (m, m, 4) of the columns of ``vectors``."""
        V = self._check(vectors)
        if V.ndim == 1:
            V = V[:, None]
        return np.stack([V.T @ V] + [V.T @ self.apply(e, V) for e in np.eye(3)], axis=-1)

    def coordinate_product(self, L, M):
        """Sum over coordinates of conj(h_a) h'_a; independent of the admissible basis."""
        L = self._check(L).reshape(self.n, 4)
        M = self._check(M).reshape(self.n, 4)
        return Quaternion.from_array(qmul(qconj(L), M).sum(axis=0))

    def unit(self, a, part=0):
        """Real coordinate vector e_a * (1, i, j, k)[part]."""
        e = np.zeros(self.dim)
        e[4 * a + part] = 1.0
        return e


def canonical_sign(A, tol=1e-9):
    """Representative of {A, -A}: first coefficient above tol is made positive."""
    A = np.asarray(A, dtype=float)
    for a in A:
        if abs(a) > tol:
            return A if a > 0 else -A
    return A


def adapted_basis(I):
    """Complete a unit structure I to a right-handed orthonormal triple (I, J, K).

    The completion is deterministic and reduces to the standard triple when
    I = (1, 0, 0).
    """
    I = as_structure(I)
    seed = np.array([0.0, 1.0, 0.0]) if abs(I[1]) < 0.9 else np.array([0.0, 0.0, 1.0])
    J = seed - (seed @ I) * I
    J /= np.linalg.norm(J)
    K = np.cross(I, J)
    return I, J, K
