"""Principal angles, subspace angle, Kaehler, Hermitian and characteristic angles, isoclinicity."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .hqspace import HQSpace, NumericalHealthWarning
from .subspace import quaternionify

CLAMP_WARN = 1e-7
ISOCLINIC_TOL = 1e-8
CLUSTER_GAP = 1e-7


def _clamp(c, name="cosine"):
    c = np.asarray(c, dtype=float)
    excess = np.max(np.maximum(c - 1, -1 - c), initial=0.0)
    if excess > CLAMP_WARN:
        warnings.warn(f"{name} outside [-1, 1] by {excess:.3g}", NumericalHealthWarning, stacklevel=3)
    return np.clip(c, -1.0, 1.0)


@dataclass
class PrincipalAngles:
    """Ascending principal angles with principal vectors u_i in U, v_i in W."""
    thetas: np.ndarray
    u: np.ndarray
    v: np.ndarray

    @property
    def cosines(self):
        return np.cos(self.thetas)


def principal_angles(U, W):
    """Principal angles between span(U) and span(W).

    Cosines are the singular values of U^T W.  Angles below pi/4 are taken
    from the sines (singular values of the residual of the smaller frame),
    which keeps them accurate near zero.
    """
    if U.shape[1] == 0 or W.shape[1] == 0:
        raise ValueError("principal angles need nonzero subspaces")
    k = min(U.shape[1], W.shape[1])
    Y, s, Zt = np.linalg.svd(U.T @ W)
    cos = np.clip(_clamp(s[:k]), 0.0, 1.0)
    small, big = (W, U) if W.shape[1] <= U.shape[1] else (U, W)
    sines = np.linalg.svd(small - big @ (big.T @ small), compute_uv=False)
    sines = np.clip(np.sort(sines)[:k], 0.0, 1.0)
    thetas = np.where(cos > np.sqrt(0.5), np.arcsin(sines), np.arccos(cos))
    thetas = np.maximum.accumulate(thetas)
    return PrincipalAngles(thetas, U @ Y[:, :k], W @ Zt[:k].T)


def subspace_angle(U, W):
    """Angle between U and W (dim U <= dim W): arccos of the product of principal cosines."""
    if U.shape[1] > W.shape[1]:
        raise ValueError("subspace_angle needs dim U <= dim W")
    pa = principal_angles(U, W)
    return float(np.arccos(min(1.0, np.prod(pa.cosines))))


def kaehler_angle(space: HQSpace, A, X, Y):
    """A-Kaehler angle of the oriented plane L(X, Y), in [0, pi]."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    wedge2 = (X @ X) * (Y @ Y) - (X @ Y) ** 2
    if wedge2 <= 1e-24 * (X @ X) * (Y @ Y):
        raise ValueError("kaehler_angle needs independent vectors")
    return float(np.arccos(_clamp(X @ space.apply(A, Y) / np.sqrt(wedge2))))


def hermitian_angle(space: HQSpace, L, M):
    nL, nM = np.linalg.norm(L), np.linalg.norm(M)
    if nL == 0 or nM == 0:
        raise ValueError("hermitian_angle needs nonzero vectors")
    c = space.hermitian_product(L, M).norm() / (nL * nM)
    return float(np.arccos(np.clip(_clamp(c), 0.0, 1.0)))


def characteristic_angle(space: HQSpace, L, M):
    """Angle between the quaternionic lines QL and QM; cos = cos^4 of the Hermitian angle."""
    return float(np.arccos(np.cos(hermitian_angle(space, L, M)) ** 4))


def characteristic_angle_oracle(space: HQSpace, L, M):
    return subspace_angle(quaternionify(space, L[:, None]), quaternionify(space, M[:, None]))


@dataclass
class IsoclinicReport:
    isoclinic: bool
    angle: float
    deviation: float


def isoclinicity(space: HQSpace, A, U, tol=ISOCLINIC_TOL):
    """Test whether (U, AU) is an isoclinic pair via G G^T = cos^2 Id, G = U^T A U."""
    m = U.shape[1]
    if m == 0:
        return IsoclinicReport(True, 0.0, 0.0)
    AU = space.apply(A, U)
    G = U.T @ AU
    GGt = G @ G.T
    s2 = np.trace(GGt) / m
    dev = float(np.abs(GGt - s2 * np.eye(m)).max())
    # the sine from the residual keeps small angles accurate
    sin2 = np.sum((AU - U @ G) ** 2) / m
    angle = float(np.arctan2(np.sqrt(sin2), np.sqrt(max(s2, 0.0))))
    return IsoclinicReport(dev < tol, angle, dev)


def isoclinic_cos2_trace(space: HQSpace, A, U):
    """cos^2 of the isoclinicity angle of a 4-dimensional U from -Tr(Omega^2)/4."""
    if U.shape[1] != 4:
        raise ValueError("trace formula needs a 4-dimensional subspace")
    Om = U.T @ space.apply(A, U)
    return float(-np.trace(Om @ Om) / 4)


def isoclinic_angle_trace(space: HQSpace, A, U):
    return float(np.arccos(np.sqrt(np.clip(isoclinic_cos2_trace(space, A, U), 0.0, 1.0))))


def cluster(values, gap=CLUSTER_GAP):
    """Split a descending sequence into runs whose consecutive gaps are below ``gap``."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return []
    groups = [[0]]
    for i in range(1, len(values)):
        if abs(values[i - 1] - values[i]) < gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups
