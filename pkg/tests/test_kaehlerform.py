import numpy as np
from hypothesis import given

from hqorbit.hqspace import HQSpace, adapted_basis
from hqorbit.kaehlerform import invariant_subspaces, max_invariant_subspace, restrict_form, standard_basis
from hqorbit.lab import (make_complex4, make_complex_even, make_quaternionic, make_rhps, random_frame,
                         random_sp_n, rng_from)
from hqorbit.subspace import is_invariant

from strategies import seeds


def _block_target(sigmas, m):
    T = np.zeros((m, m))
    for i, s in enumerate(sigmas):
        T[2 * i, 2 * i + 1], T[2 * i + 1, 2 * i] = s, -s
    return T


@given(seeds)
def test_standard_basis_block_diagonalises(seed):
    rng = rng_from(seed)
    s = HQSpace(3)
    m = int(rng.integers(2, 8))
    U = random_frame(rng, s.dim, m)
    A = np.array([0.0, 0.6, 0.8])
    sb = standard_basis(restrict_form(s, A, U))
    F = sb.frame
    np.testing.assert_allclose(F.T @ F, np.eye(m), atol=1e-12)
    np.testing.assert_allclose(F.T @ s.apply(A, F), _block_target(sb.sigmas, m), atol=1e-12)
    assert np.all(np.diff(sb.sigmas) <= 1e-15)
    assert sb.zero_dim == m - 2 * int(np.sum(sb.sigmas > 0))


def test_quaternionic_sigmas(space):
    U = make_quaternionic(space, 4)
    sb = standard_basis(restrict_form(space, [1, 0, 0], U))
    np.testing.assert_array_equal(sb.sigmas, [1.0, 1.0])


def test_rhps_sigmas_zero(space):
    sb = standard_basis(restrict_form(space, [0, 0, 1], make_rhps(space, 3)))
    np.testing.assert_array_equal(sb.sigmas, [0.0])
    assert sb.zero_dim == 3


def test_invariant_subspaces_of_complex_even():
    s = HQSpace(7)
    I = np.array([1.0, 2.0, 2.0]) / 3
    _, _, K = adapted_basis(I)
    U = random_sp_n(s, 7) @ make_complex_even(s, I, [0.4, 0.4, 1.1], tail=True)
    parts = invariant_subspaces(s, K, U)
    dims = [F.shape[1] for _, F in parts]
    sig = [x for x, _ in parts]
    assert dims == [8, 4, 2]
    np.testing.assert_allclose(sig, [np.cos(0.4), np.cos(1.1), 0.0], atol=1e-12)


def test_max_invariant_subspace():
    s = HQSpace(5)
    I = np.array([0.0, 1.0, 0.0])
    U = np.hstack([make_quaternionic(s, 4), make_complex4(s, I, 0.8, slot=1), make_rhps(s, 1, slot=3)])
    U = random_sp_n(s, 3) @ U
    W = max_invariant_subspace(s, I, U)
    assert W.shape[1] == 8 and is_invariant(s, I, W, 1e-10)
    assert max_invariant_subspace(s, [1, 0, 0], U).shape[1] == 4
    assert max_invariant_subspace(s, I, U[:, :0]).shape[1] == 0
