"""Ground-truth generators, random group elements and brute-force oracles.

Every generator places its addends on explicit quaternionic coordinate slots
of H^n; compose with ``random_sp_n`` for generic position.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angles import PrincipalAngles
from .hqspace import HQSpace, Quaternion, adapted_basis, as_structure, qconj, qmul
from .subspace import gram_schmidt, h_frame_matrix, h_orthonormalize, orthonormalize


def rng_from(seed):
    """Counter-based generator (Philox) from an int, SeedSequence or existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def spawn(seed, k):
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [rng_from(s) for s in ss.spawn(k)]


def random_structure(rng):
    A = rng.normal(size=3)
    return A / np.linalg.norm(A)


def random_so3(rng):
    Q, R = np.linalg.qr(rng.normal(size=(3, 3)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] *= -1
    return Q


def random_frame(rng, dim, m):
    return orthonormalize(rng.normal(size=(dim, m)))


def random_quaternion(rng):
    q = rng.normal(size=4)
    return Quaternion.from_array(q / np.linalg.norm(q))


def random_sp1(seed):
    return random_quaternion(rng_from(seed))


def act_sp1(space: HQSpace, U, q):
    q = q if isinstance(q, Quaternion) else Quaternion.from_array(q)
    if abs(q.norm() - 1) > 1e-12:
        raise ValueError("Sp(1) element must be a unit quaternion")
    return space.right_multiply(U, q)


def sp_matrix(space: HQSpace, hvectors):
    """Real matrix of the H-linear map sending e_p to the p-th vector of an H-basis."""
    return h_frame_matrix(space, hvectors)


def random_sp_n(space: HQSpace, seed):
    """Random element of Sp(n) as a real 4n x 4n matrix (quaternionic QR of a Gaussian matrix)."""
    rng = rng_from(seed)
    cols = h_orthonormalize(space, rng.normal(size=(space.dim, space.n)))
    return sp_matrix(space, cols)


def slot_vector(space: HQSpace, a, q=(1.0, 0.0, 0.0, 0.0)):
    """e_a q."""
    v = np.zeros(space.dim)
    v[4 * a:4 * a + 4] = np.asarray(q.as_array() if isinstance(q, Quaternion) else q, dtype=float)
    return v


def make_two_plane(space: HQSpace, im, slot=0):
    """Orthonormal (X, Y) with Im(X.Y) = im (|im| <= 1); X = e_a, Y = e_a im + e_b sqrt(1-|im|^2)."""
    im = np.asarray(im, dtype=float).reshape(3)
    r = np.linalg.norm(im)
    if r > 1 + 1e-12:
        raise ValueError("imaginary measure must have norm <= 1")
    q = space.basis @ im   # coordinates are always standard quaternions
    X = slot_vector(space, slot)
    Y = slot_vector(space, slot, np.r_[0.0, q])
    if r < 1 - 1e-15:
        _require(space, slot + 2)
        Y = Y + np.sqrt(max(0.0, 1 - r * r)) * slot_vector(space, slot + 1)
    return np.stack([X, Y], axis=1)


def _require(space, slots):
    if slots > space.n:
        raise ValueError(f"generator needs {slots} quaternionic coordinates, space has {space.n}")


def make_complex4(space: HQSpace, I, theta, slot=0):
    """4-dim I-complex subspace with I-perp Kaehler angle theta on coordinates (slot, slot+1)."""
    I = as_structure(I)
    _require(space, slot + 2)
    if not 0 <= theta <= np.pi / 2 + 1e-15:
        raise ValueError("theta must lie in [0, pi/2]")
    _, _, K = adapted_basis(I)
    X = slot_vector(space, slot)
    Z = -np.cos(theta) * space.apply(K, X) + np.sin(theta) * slot_vector(space, slot + 1)
    return gram_schmidt(np.stack([X, space.apply(I, X), Z, space.apply(I, Z)], axis=1))


def make_totally_complex_plane(space: HQSpace, I, slot=0):
    _require(space, slot + 1)
    X = slot_vector(space, slot)
    return np.stack([X, space.apply(I, X)], axis=1)


def make_complex_even(space: HQSpace, I, multiangle, tail=False, slot=0):
    """Hermitian-orthogonal sum of make_complex4 addends (plus a complex 2-plane tail)."""
    blocks = [make_complex4(space, I, t, slot + 2 * i) for i, t in enumerate(multiangle)]
    if tail:
        blocks.append(make_totally_complex_plane(space, I, slot + 2 * len(multiangle)))
    return np.hstack(blocks) if blocks else np.zeros((space.dim, 0))


def complex_slots(multiangle, tail=False):
    return 2 * len(multiangle) + int(tail)


def make_sigma(space: HQSpace, items, slot=0):
    """Sigma-complex subspace from items (I, multiangle, tail) on consecutive slots."""
    blocks = []
    for I, multi, tail in items:
        blocks.append(make_complex_even(space, I, multi, tail, slot))
        slot += complex_slots(multi, tail)
    return np.hstack(blocks)


def make_quaternionic(space: HQSpace, dim, slot=0):
    if dim % 4:
        raise ValueError("quaternionic dimension must be a multiple of 4")
    _require(space, slot + dim // 4)
    return np.stack([slot_vector(space, slot + a, q) for a in range(dim // 4) for q in np.eye(4)], axis=1)


def make_rhps(space: HQSpace, dim, slot=0):
    _require(space, slot + dim)
    return np.stack([slot_vector(space, slot + a) for a in range(dim)], axis=1).reshape(space.dim, dim)


@dataclass
class GeneratorSpec:
    kind: str
    params: dict

    KINDS = ("TwoPlane", "Complex4", "ComplexEven", "SigmaComplex", "Quaternionic", "TotallyRealRhps")

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or "class" not in obj:
            raise ValueError("generator spec needs a 'class' key")
        kind = obj["class"]
        if kind not in cls.KINDS:
            raise ValueError(f"unknown generator class {kind!r}; expected one of {', '.join(cls.KINDS)}")
        return cls(kind, {k: v for k, v in obj.items() if k != "class"})

    def build(self, space: HQSpace):
        p = self.params
        if self.kind == "TwoPlane":
            return make_two_plane(space, p["im"])
        if self.kind == "Complex4":
            return make_complex4(space, p["I"], float(p["theta"]))
        if self.kind == "ComplexEven":
            return make_complex_even(space, p["I"], p["multiangle"], bool(p.get("tail", False)))
        if self.kind == "SigmaComplex":
            items = [(it["I"], it["multiangle"], bool(it.get("tail", False))) for it in p["items"]]
            return make_sigma(space, items)
        if self.kind == "Quaternionic":
            return make_quaternionic(space, int(p["dim"]))
        return make_rhps(space, int(p["dim"]))


def oracle_principal_angles(U, W):
    """Principal angles from the eigenvalues of (U^T W)(U^T W)^T; independent of the SVD path."""
    G = U.T @ W
    k = min(G.shape)
    S = G @ G.T if G.shape[0] <= G.shape[1] else G.T @ G
    lam = np.sort(np.linalg.eigvalsh(S))[::-1][:k]
    thetas = np.arccos(np.sqrt(np.clip(lam, 0.0, 1.0)))
    return PrincipalAngles(np.sort(thetas), None, None)


def oracle_subspace_angle(U, W):
    """Gram-determinant form: cos = sqrt(det(G G^T)), G = U^T W, for dim U <= dim W."""
    G = U.T @ W
    return float(np.arccos(np.sqrt(np.clip(np.linalg.det(G @ G.T), 0.0, 1.0))))


def oracle_hermitian_product(space: HQSpace, L, M):
    return space.coordinate_product(L, M)


def quaternion_matrix_product(space: HQSpace, L, M):
    """Coordinate-wise sum of conj(L_a) M_a for vectors, returned as an array (w, x, y, z)."""
    return qmul(qconj(L.reshape(space.n, 4)), M.reshape(space.n, 4)).sum(axis=0)
