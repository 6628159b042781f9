"""Orbit invariants, the Sp(n) equivalence test and explicit Sp(n) witnesses."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .angles import isoclinicity, principal_angles
from .decompose import GRID, Decomposition, decompose_complex, full_decompose
from .hqspace import TOL_COMPARE, TOL_RANK, TOL_SNAP, HQSpace, NumericalHealthWarning, Quaternion, \
    adapted_basis, as_structure, canonical_sign
from .subspace import complement_in, gram_schmidt, h_frame_matrix, h_orthonormalize, is_invariant, project

WITNESS_ANGLE = 1e-7
WITNESS_GROUP = 1e-9
CHAIN_CHECK = 1e-8


def imaginary_measure(space: HQSpace, X, Y):
    """Im(X.Y) / |X ^ Y| for the oriented plane with basis (X, Y)."""
    wedge2 = (X @ X) * (Y @ Y) - (X @ Y) ** 2
    if wedge2 <= 1e-24 * (X @ X) * (Y @ Y):
        raise ValueError("imaginary measure needs independent generators")
    return Quaternion(0.0, *(space.hermitian_product(X, Y).imag / np.sqrt(wedge2)))


def characteristic_deviation(space: HQSpace, U):
    """Mean over coordinate pairs r < s of |Im(X_r . X_s)|^2 for the orthonormal basis U."""
    m = U.shape[1]
    if m < 2:
        raise ValueError("characteristic deviation needs dim >= 2")
    sq = sum((U.T @ space.apply(e, U)) ** 2 for e in np.eye(3))
    r, s = np.triu_indices(m, 1)
    return float(np.mean(sq[r, s]))


# ---------------------------------------------------------------- IC^4 chains


@dataclass
class Chains:
    X: np.ndarray
    Y: np.ndarray
    Xt: np.ndarray
    Z: np.ndarray
    Yt: np.ndarray
    Zt: np.ndarray


@dataclass
class Ic4Invariants:
    thetas: np.ndarray
    xi: float
    chi: float
    eta: float
    Gamma: float
    Delta: float
    C_IJ: np.ndarray
    C_IK: np.ndarray
    degenerate: bool = False
    residuals: dict = field(default_factory=dict)

    def as_vector(self):
        return np.r_[self.thetas, self.xi, self.chi, self.eta, self.Delta]

    def to_json(self):
        return {
            "thetas": self.thetas.tolist(), "xi": self.xi, "chi": self.chi, "eta": self.eta,
            "Gamma": self.Gamma, "Delta": self.Delta,
            "C_IJ": self.C_IJ.tolist(), "C_IK": self.C_IK.tolist(),
        }


def canonical_matrices(xi, chi, Gamma, Delta):
    rx, rc = np.sqrt(max(0.0, 1 - xi * xi)), np.sqrt(max(0.0, 1 - chi * chi))
    C_IJ = np.array([[1, 0, 0, 0], [0, xi, 0, -rx], [0, 0, 1, 0], [0, rx, 0, xi]], dtype=float)
    C_IK = np.array([[1, 0, 0, 0], [0, chi, 0, -rc],
                     [0, -Delta * rc, Gamma, -chi * Delta],
                     [0, Gamma * rc, Delta, chi * Gamma]], dtype=float)
    return C_IJ, C_IK


def _in_ic4(space, U, tol):
    if U.shape[1] != 4:
        raise ValueError("IC^4 computations need a 4-dimensional subspace")
    reps = [isoclinicity(space, e, U, tol) for e in np.eye(3)]
    if not all(r.isoclinic for r in reps):
        raise ValueError("subspace is not isoclinic for I, J and K")
    return np.array([r.angle for r in reps])


def _is_unit(v, snap):
    return 1 - abs(v) < snap


def build_chains(space: HQSpace, U, X1, snap=TOL_SNAP, tol=1e-8):
    """The six chains of U in IC^4 centred on X1, for the admissible basis of ``space``.

    Returns (chains, (xi, chi, eta), cosines, degenerate).
    """
    thetas = _in_ic4(space, U, tol)
    X1 = np.asarray(X1, dtype=float)
    if abs(np.linalg.norm(X1) - 1) > 1e-9 or np.linalg.norm(X1 - project(U, X1)) > 1e-8:
        raise ValueError("leading vector must be a unit vector of U")
    E = np.eye(3)
    c = np.cos(thetas)
    live = c >= snap
    c = np.where(live, c, 0.0)
    A3 = lambda a, v: project(U, space.apply(E[a], v)) / c[a]   # -A^{-1} Pr^{AU} v / cos

    seconds = [project(U, -space.apply(E[a], X1)) / c[a] if live[a] else None for a in range(3)]
    fill = next((v for v in seconds if v is not None), None)
    if fill is None:
        fill = complement_in(U, X1[:, None])[:, 0]
    X2, Y2, Z2 = [fill if v is None else v for v in seconds]
    xi, chi, eta = float(X2 @ Y2), float(X2 @ Z2), float(Y2 @ Z2)
    degenerate = not live.all() or any(_is_unit(v, snap) for v in (xi, chi, eta))
    if live.all() and any(_is_unit(v, snap) for v in (xi, chi, eta)) \
            and not all(_is_unit(v, snap) for v in (xi, chi, eta)):
        warnings.warn("only some of xi, chi, eta are +-1", NumericalHealthWarning, stacklevel=2)

    def pair(P2, Q2, s, a, b):
        if _is_unit(s, snap):
            return None
        r = np.sqrt(1 - s * s)
        P4, Q4 = (Q2 - s * P2) / r, (-P2 + s * Q2) / r
        P3 = A3(a, P4) if live[a] else None
        Q3 = A3(b, Q4) if live[b] else None
        P3 = Q3 if P3 is None else P3
        Q3 = P3 if Q3 is None else Q3
        return P3, P4, Q3, Q4

    XY, XZ, YZ = pair(X2, Y2, xi, 0, 1), pair(X2, Z2, chi, 0, 2), pair(Y2, Z2, eta, 1, 2)

    if XY is not None:
        X3, X4 = XY[0], XY[1]
    elif XZ is not None:
        X3, X4 = XZ[0], XZ[1]
    else:
        W = complement_in(U, gram_schmidt(np.stack([X1, X2], axis=1)))
        X4, X3 = W[:, 0], W[:, 1]
        a0 = next((a for a in range(3) if live[a]), None)
        if a0 is not None:
            sign = np.sign(X1 @ space.apply(E[a0], X2)) or 1.0
            if np.sign(X3 @ space.apply(E[a0], X4)) != sign:
                X3 = -X3
    Xc = np.stack([X1, X2, X3, X4], axis=1)
    Yc = np.stack([X1, Y2, XY[2], XY[3]], axis=1) if XY is not None else np.stack([X1, xi * X2, X3, xi * X4], axis=1)
    if XZ is not None:
        Xt = np.stack([X1, X2, XZ[0], XZ[1]], axis=1)
        Zc = np.stack([X1, Z2, XZ[2], XZ[3]], axis=1)
    else:
        Xt = Xc
        Zc = np.stack([X1, chi * X2, X3, chi * X4], axis=1)
    if YZ is not None:
        Yt = np.stack([X1, Y2, YZ[0], YZ[1]], axis=1)
        Zt = np.stack([X1, Z2, YZ[2], YZ[3]], axis=1)
    else:
        Yt = Yc
        Zt = np.stack([X1, eta * Yc[:, 1], Yc[:, 2], eta * Yc[:, 3]], axis=1)
    return Chains(Xc, Yc, Xt, Zc, Yt, Zt), (xi, chi, eta), c, degenerate


def chain_residuals(space: HQSpace, chains: Chains, cos):
    """Max deviation of each chain from an orthonormal standard basis of its form."""
    out = {}
    for name, a in (("X", 0), ("Xt", 0), ("Y", 1), ("Yt", 1), ("Z", 2), ("Zt", 2)):
        B = getattr(chains, name)
        om = B.T @ space.apply(np.eye(3)[a], B)
        target = np.zeros((4, 4))
        target[0, 1] = target[2, 3] = cos[a]
        target -= target.T
        out[name] = float(max(np.abs(B.T @ B - np.eye(4)).max(), np.abs(om - target).max()))
    return out


def ic4_invariants(space: HQSpace, U, tol=1e-8, X1=None, snap=TOL_SNAP):
    """Angles, xi, chi, eta, Gamma, Delta and canonical matrices of U in IC^4."""
    X1 = U[:, 0] if X1 is None else X1
    chains, (xi, chi, eta), c, degenerate = build_chains(space, U, X1, snap, tol)
    thetas = np.where(c > 0, _in_ic4(space, U, tol), np.pi / 2)
    xi, chi, eta = [float(np.sign(v)) if _is_unit(v, snap) else v for v in (xi, chi, eta)]
    if degenerate:
        Gamma, Delta = 1.0, 0.0
    else:
        Gamma = (eta - xi * chi) / (np.sqrt(1 - xi * xi) * np.sqrt(1 - chi * chi))
        Delta = float(chains.X[:, 3] @ chains.Xt[:, 2])
    C_IJ, C_IK = canonical_matrices(xi, chi, Gamma, Delta)
    res = chain_residuals(space, chains, c)
    res["C_IJ"] = float(np.abs(chains.X.T @ chains.Y - C_IJ).max())
    res["C_IK"] = float(np.abs(chains.X.T @ chains.Z - C_IK).max())
    res["Gamma"] = float(abs(Gamma - chains.X[:, 2] @ chains.Xt[:, 2]))
    if max(res.values()) > CHAIN_CHECK:
        warnings.warn(f"IC^4 chain cross-check residual {max(res.values()):.3g}", NumericalHealthWarning, stacklevel=2)
    return Ic4Invariants(thetas, xi, chi, eta, float(Gamma), float(Delta), C_IJ, C_IK, degenerate, res)


# ------------------------------------------------------- 4-dim complex subspaces


def _check_complex4(space, I, U, snap):
    from .decompose import maximal_quaternionic
    if U.shape[1] != 4 or not is_invariant(space, I, U):
        raise ValueError("expected a 4-dimensional I-complex subspace")
    if maximal_quaternionic(space, U, snap).shape[1]:
        raise ValueError("subspace is quaternionic, not pure")


def i_perp_kaehler_angle(space: HQSpace, I, U, snap=TOL_SNAP, X=None):
    """theta with cos = sqrt(<X,KY>^2 + <X,JY>^2) for an I-orthonormal pair of U."""
    I = as_structure(I)
    _check_complex4(space, I, U, snap)
    _, J, K = adapted_basis(I)
    X = U[:, 0] if X is None else X
    Y = complement_in(U, gram_schmidt(np.stack([X, space.apply(I, X)], axis=1)))[:, 0]
    c = np.hypot(X @ space.apply(K, Y), X @ space.apply(J, Y))
    return float(np.arccos(min(1.0, c)))


def associated_plane(space: HQSpace, I, U, X, K, snap=TOL_SNAP):
    """L(X, Z) with Z = K^{-1} Pr^{KU} X / cos(theta)."""
    I, K = as_structure(I), as_structure(K)
    if abs(I @ K) > 1e-9:
        raise ValueError("K must be orthogonal to I")
    theta = i_perp_kaehler_angle(space, I, U, snap)
    if np.cos(theta) < snap:
        raise ValueError("totally complex subspace has no associated planes")
    Z = project(U, -space.apply(K, X))
    return np.stack([X, Z / np.linalg.norm(Z)], axis=1)


def associated_plane_checks(space: HQSpace, I, U, P, K):
    """Residuals of the six equivalent characterisations of an associated plane P = L(X, Z)."""
    I, K = as_structure(I), as_structure(K)
    J = np.cross(K, I)
    X, Z = P[:, 0], P[:, 1]
    cos = np.cos(i_perp_kaehler_angle(space, I, U))
    KU, KP, IP = space.apply(K, U), space.apply(K, P), space.apply(I, P)
    prj = project(KU, P)
    S = np.hstack([P, IP])
    rest = complement_in(U, P)
    adapted = space.with_basis(space.basis @ np.stack([I, J, K], axis=1))
    im = adapted.hermitian_product(X, Z).imag / np.sqrt(1 - (X @ Z) ** 2)
    return {
        "projection": float(np.linalg.norm(prj - project(KP, prj), 2)),
        "splitting": float(max(np.abs(P.T @ IP).max(), np.linalg.norm(S - project(U, S), 2),
                               np.abs(S.T @ S - np.eye(4)).max())),
        "standard": float(np.abs(P.T @ space.apply(K, rest)).max()),
        "kaehler_angle": float(abs(abs(X @ space.apply(K, Z)) / np.sqrt(1 - (X @ Z) ** 2) - cos)),
        "imaginary_measure": float(np.linalg.norm(im - np.array([0.0, 0.0, cos]))),
        "i_orthogonal": float(max(abs(X @ Z), abs(space.apply(I, X) @ Z))),
    }


# -------------------------------------------------------------- classification


@dataclass
class SubspaceClass:
    kind: str
    dim: int
    structure: np.ndarray = None
    ic4: bool = False
    rhps: bool = False
    decomposition: Decomposition = None


def classify(space: HQSpace, U, tol=TOL_SNAP, grid=GRID):
    """Class tag: TwoPlane, Quaternionic, PureComplex, SigmaComplex, TotallyReal or Other.

    ``ic4`` flags 4-dimensional subspaces isoclinic for I, J, K; ``rhps``
    flags totally real subspaces whose pairwise Hermitian products are real.
    """
    m = U.shape[1]
    ic4 = m == 4 and all(isoclinicity(space, e, U).isoclinic for e in np.eye(3))
    rhps = m >= 1 and all(np.abs(U.T @ space.apply(e, U)).max() < tol for e in np.eye(3))
    if m == 2:
        return SubspaceClass("TwoPlane", m, ic4=False, rhps=rhps)
    dec = full_decompose(space, U, tol, grid)
    q, k, r = dec.quaternionic.shape[1], len(dec.sigma), dec.real.shape[1]
    if m and q == m:
        return SubspaceClass("Quaternionic", m, ic4=ic4, decomposition=dec)
    if m and q == 0 and r == 0 and k == 1:
        return SubspaceClass("PureComplex", m, dec.sigma[0][0], ic4=ic4, decomposition=dec)
    if m and q == 0 and r == 0 and k > 1:
        return SubspaceClass("SigmaComplex", m, ic4=ic4, decomposition=dec)
    if m and q == 0 and k == 0:
        return SubspaceClass("TotallyReal", m, ic4=ic4, rhps=rhps, decomposition=dec)
    return SubspaceClass("Other", m, ic4=ic4, decomposition=dec)


# ----------------------------------------------------------- orbit invariants


def _gap(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.abs(a - b).max(initial=0.0)) if a.shape == b.shape else np.inf


class _Invariant:
    def distance(self, other):
        """Max-norm distance to another invariant; inf when the classes or dimensions differ."""
        if self.kind != other.kind or self.dim != other.dim:
            return np.inf
        return self._distance(other)

    def matches(self, other, tol):
        return self.distance(other) <= tol


@dataclass
class TwoPlaneInvariant(_Invariant):
    """{+-im} for the non-oriented Grassmannian; ``oriented`` keeps the sign of im."""
    im: np.ndarray
    oriented: bool = False
    dim: int = 2
    kind = "TwoPlane"

    def _distance(self, other):
        d = _gap(self.im, other.im)
        return d if self.oriented or other.oriented else min(d, _gap(self.im, -other.im))

    def data(self):
        return {"im": self.im.tolist(), "oriented": self.oriented}


@dataclass
class Ic4Invariant(_Invariant):
    inv: Ic4Invariants
    dim: int = 4
    kind = "Ic4"

    def _distance(self, other):
        return _gap(self.inv.as_vector(), other.inv.as_vector())

    def data(self):
        return self.inv.to_json()


@dataclass
class ComplexInvariant(_Invariant):
    structure: np.ndarray
    multiangle: np.ndarray
    dim: int
    kind = "Complex"

    def _distance(self, other):
        return max(_gap(self.structure, other.structure), _gap(self.multiangle, other.multiangle))

    def data(self):
        return {"structure": self.structure.tolist(), "multiangle": self.multiangle.tolist(), "dim": self.dim}


@dataclass
class SigmaComplexInvariant(_Invariant):
    items: list   # ComplexInvariant per addend, lexicographic by structure
    dim: int
    kind = "SigmaComplex"

    def _distance(self, other):
        if len(self.items) != len(other.items):
            return np.inf
        return max(a.distance(b) for a, b in zip(self.items, other.items))

    def data(self):
        return {"items": [it.data() for it in self.items]}


@dataclass
class QuaternionicInvariant(_Invariant):
    dim: int
    kind = "Quaternionic"

    def _distance(self, other):
        return 0.0

    def data(self):
        return {"dim": self.dim}


@dataclass
class RhpsInvariant(_Invariant):
    dim: int
    kind = "Rhps"

    def _distance(self, other):
        return 0.0

    def data(self):
        return {"dim": self.dim}


def _complex_invariant(space, A, W, snap):
    return ComplexInvariant(canonical_sign(A), np.array([t for t, _ in decompose_complex(space, A, W, snap)]), W.shape[1])


def orbit_invariant(space: HQSpace, U, snap=TOL_SNAP, grid=GRID, cls=None, oriented=False):
    cls = classify(space, U, snap, grid) if cls is None else cls
    if cls.kind == "TwoPlane":
        im = imaginary_measure(space, U[:, 0], U[:, 1]).imag
        return TwoPlaneInvariant(im, True) if oriented else TwoPlaneInvariant(canonical_sign(im))
    if cls.kind == "Quaternionic":
        return QuaternionicInvariant(cls.dim)
    if cls.kind == "PureComplex":
        return _complex_invariant(space, cls.structure, U, snap)
    if cls.kind == "SigmaComplex":
        return SigmaComplexInvariant([_complex_invariant(space, A, W, snap) for A, W in cls.decomposition.sigma], cls.dim)
    if cls.kind == "TotallyReal" and cls.rhps:
        return RhpsInvariant(cls.dim)
    if cls.ic4:
        return Ic4Invariant(ic4_invariants(space, U, snap=snap))
    raise ValueError(f"orbit invariants are not available for class {cls.kind}")


def same_orbit(space: HQSpace, U, W, tol=TOL_COMPARE, snap=TOL_SNAP, grid=GRID, oriented=False):
    """Sp(n)-equivalence of span(U) and span(W); ``oriented`` compares oriented 2-planes."""
    if U.shape[1] != W.shape[1]:
        raise ValueError("subspaces have different dimensions")
    a = orbit_invariant(space, U, snap, grid, oriented=oriented)
    b = orbit_invariant(space, W, snap, grid, oriented=oriented)
    return a.matches(b, tol)


# ------------------------------------------------------------------- witness


@dataclass
class SpnWitness:
    g: np.ndarray
    verification: dict

    def to_json(self):
        return {"matrix": self.g.tolist(), "verification": self.verification}


def _complex_generators(space, A, W, snap):
    _, _, K = adapted_basis(A)
    gens = []
    for theta, B in decompose_complex(space, A, W, snap):
        X = B[:, 0]
        if B.shape[1] == 2:
            gens.append(X)
        elif np.cos(theta) >= snap:
            Z = project(B, -space.apply(K, X))
            gens += [X, Z / np.linalg.norm(Z)]
        else:
            Y = complement_in(B, gram_schmidt(np.stack([X, space.apply(A, X)], axis=1)))[:, 0]
            gens += [X, Y]
    return gens


def canonical_generators(space: HQSpace, U, inv, cls, snap=TOL_SNAP):
    """Vectors spanning U (with their quaternionic images) whose Hermitian Gram matrix
    is a function of the orbit invariant alone."""
    if inv.kind == "TwoPlane":
        X, Y = U[:, 0], U[:, 1]
        im = imaginary_measure(space, X, Y).imag
        if np.linalg.norm(im - inv.im) > np.linalg.norm(im + inv.im):
            X, Y = Y, X
        return [X, Y]
    if inv.kind == "Rhps":
        return list(U.T)
    if inv.kind == "Quaternionic":
        return h_orthonormalize(space, U)
    if inv.kind == "Complex":
        return _complex_generators(space, inv.structure, U, snap)
    if inv.kind == "SigmaComplex":
        return [v for A, W in cls.decomposition.sigma for v in _complex_generators(space, A, W, snap)]
    chains, *_ = build_chains(space, U, U[:, 0], snap)
    return list(chains.X.T)


def _extend_h_basis(space, hvecs):
    coords = [space.unit(a) for a in range(space.n)]
    return h_orthonormalize(space, np.stack(list(hvecs) + coords, axis=1))


def verify_witness(space: HQSpace, g, U, W):
    comm = [float(np.linalg.norm(g @ space.matrix(e) - space.matrix(e) @ g)) for e in np.eye(3)]
    orth = float(np.linalg.norm(g.T @ g - np.eye(space.dim)))
    angle = float(principal_angles(g @ U, W).thetas.max()) if U.shape[1] else 0.0
    return {"max_principal_angle": angle, "commutator_norms": comm, "orthogonality_residual": orth}


def sp_n_witness(space: HQSpace, U, W, tol=WITNESS_ANGLE, snap=TOL_SNAP, grid=GRID, compare=TOL_COMPARE):
    """g in Sp(n) with gU = W, built from matched canonical bases; None if U, W are not equivalent."""
    if U.shape[1] != W.shape[1]:
        raise ValueError("subspaces have different dimensions")
    cu, cw = classify(space, U, snap, grid), classify(space, W, snap, grid)
    iu, iw = orbit_invariant(space, U, snap, grid, cu), orbit_invariant(space, W, snap, grid, cw)
    if not iu.matches(iw, compare):
        return None
    gu = canonical_generators(space, U, iu, cu, snap)
    gw = canonical_generators(space, W, iw, cw, snap)
    hu, hw = h_orthonormalize(space, np.stack(gu, axis=1)), h_orthonormalize(space, np.stack(gw, axis=1))
    if len(hu) != len(hw):
        warnings.warn("matched bases have different quaternionic rank", NumericalHealthWarning, stacklevel=2)
        return None
    E = h_frame_matrix(space, _extend_h_basis(space, hu))
    F = h_frame_matrix(space, _extend_h_basis(space, hw))
    g = F @ E.T
    ver = verify_witness(space, g, U, W)
    if ver["max_principal_angle"] > tol or max(ver["commutator_norms"]) > WITNESS_GROUP \
            or ver["orthogonality_residual"] > WITNESS_GROUP:
        warnings.warn(f"witness failed verification: {ver}", NumericalHealthWarning, stacklevel=2)
        return None
    return SpnWitness(g, ver)
