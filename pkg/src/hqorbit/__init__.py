"""Sp(n)-orbit invariants of subspaces of the quaternionic Hermitian space H^n."""

from .hqspace import HQSpace, Quaternion, NumericalHealthWarning
from .subspace import orthonormalize, h_orthonormalize, project, intersect, subspace_sum, quaternionify
from .angles import principal_angles, subspace_angle, isoclinicity
from .decompose import full_decompose, decompose_complex, kaehler_multiangle
from .orbit import classify, orbit_invariant, same_orbit, sp_n_witness, ic4_invariants

__all__ = [
    "HQSpace", "Quaternion", "NumericalHealthWarning",
    "orthonormalize", "h_orthonormalize", "project", "intersect", "subspace_sum", "quaternionify",
    "principal_angles", "subspace_angle", "isoclinicity",
    "full_decompose", "decompose_complex", "kaehler_multiangle",
    "classify", "orbit_invariant", "same_orbit", "sp_n_witness", "ic4_invariants",
]
