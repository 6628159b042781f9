import warnings

import numpy as np
import pytest
from hypothesis import given, settings

from hqorbit.hqspace import HQSpace, NumericalHealthWarning, Quaternion, adapted_basis
from hqorbit.lab import (act_sp1, make_complex4, make_complex_even, make_quaternionic, make_rhps, make_sigma,
                         make_two_plane, random_frame, random_quaternion, random_sp_n, rng_from)
from hqorbit.orbit import (associated_plane, associated_plane_checks, build_chains, canonical_matrices,
                           characteristic_deviation, classify, i_perp_kaehler_angle, ic4_invariants,
                           imaginary_measure, orbit_invariant, same_orbit, sp_n_witness)
from hqorbit.subspace import orthonormalize

from strategies import angles, seeds, unit3

I3 = np.array([1.0, 2.0, 2.0]) / 3

# 4-dim complex subspace (I3, 0.7) read in the standard basis; xi, chi, eta frozen from the
# closed form cos^2 theta^A = alpha^2 + (1 - alpha^2) cos^2 theta evaluated at A = (e_a + e_b)/sqrt2
FROZEN_IC4 = {
    "thetas": [0.652751152055752, 0.500850231604427, 0.500850231604427],
    "xi": 0.1323484404302371, "chi": 0.1323484404302371, "eta": 0.23972352429586968,
    "Gamma": 0.2261690159012742, "abs_Delta": 0.9740880741730951,
}
C_IJ_COMPLEX = np.array([[1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0]], float)
C_IK_COMPLEX = np.array([[1, 0, 0, 0], [0, 0, 0, -1], [0, 1, 0, 0], [0, 0, -1, 0]], float)


# ------------------------------------------------------------------ 2-planes


def test_imaginary_measure_of_generator(space):
    im = np.array([0.2, -0.5, 0.4])
    U = make_two_plane(space, im)
    np.testing.assert_allclose(imaginary_measure(space, U[:, 0], U[:, 1]).imag, im, atol=1e-14)


def test_imaginary_measure_ignores_scaling(space, rng):
    X, Y = rng.normal(size=(2, space.dim))
    a = imaginary_measure(space, X, Y).imag
    b = imaginary_measure(space, 3 * X, 2 * Y - 0.5 * X).imag
    np.testing.assert_allclose(a, b, atol=1e-12)


@given(seeds)
def test_imaginary_measure_rotates_under_sp1(seed):
    rng = rng_from(seed)
    s = HQSpace(3)
    X, Y = rng.normal(size=(2, s.dim))
    q = random_quaternion(rng)
    before = imaginary_measure(s, X, Y)
    after = imaginary_measure(s, act_sp1(s, X, q), act_sp1(s, Y, q))
    expected = q.conjugate() * before * q
    np.testing.assert_allclose(after.imag, expected.imag, atol=1e-12)
    assert abs(np.linalg.norm(after.imag) - np.linalg.norm(before.imag)) < 1e-12


def test_two_plane_orientation(space):
    U = make_two_plane(space, [0.1, 0.2, 0.3])
    V = U[:, ::-1]
    assert same_orbit(space, U, V)
    assert not same_orbit(space, U, V, oriented=True)
    assert same_orbit(space, U, random_sp_n(space, 1) @ U, oriented=True)


# ----------------------------------------------------- characteristic deviation


@given(angles, unit3(), seeds)
def test_deviation_of_complex4(theta, I, seed):
    s = HQSpace(3)
    U = random_sp_n(s, seed) @ make_complex4(s, I, theta)
    assert abs(characteristic_deviation(s, U) - (2 * np.cos(theta) ** 2 + 1) / 3) < 1e-9


def test_deviation_special_values(space):
    assert abs(characteristic_deviation(space, make_quaternionic(space, 4)) - 1) < 1e-15
    assert characteristic_deviation(space, make_rhps(space, 3)) == 0.0
    with pytest.raises(ValueError):
        characteristic_deviation(space, make_rhps(space, 1))


@given(seeds)
def test_deviation_basis_and_group_invariance(seed):
    rng = rng_from(seed)
    s = HQSpace(3)
    m = int(rng.integers(2, 6))
    U = random_frame(rng, s.dim, m)
    d = characteristic_deviation(s, U)
    assert abs(characteristic_deviation(s, U @ random_frame(rng, m, m)) - d) < 1e-9
    gU = act_sp1(s, random_sp_n(s, rng) @ U, random_quaternion(rng))
    assert abs(characteristic_deviation(s, gU) - d) < 1e-9


# ---------------------------------------------------------------------- IC^4


def test_ic4_frozen_values():
    s = HQSpace(4)
    U = random_sp_n(s, 5) @ make_complex4(s, I3, 0.7)
    inv = ic4_invariants(s, U, X1=U @ np.full(4, 0.5))
    np.testing.assert_allclose(inv.thetas, FROZEN_IC4["thetas"], atol=1e-12)
    for k in ("xi", "chi", "eta", "Gamma"):
        assert abs(getattr(inv, k) - FROZEN_IC4[k]) < 1e-12
    assert abs(abs(inv.Delta) - FROZEN_IC4["abs_Delta"]) < 1e-12
    assert max(inv.residuals.values()) < 1e-10


@settings(max_examples=20)
@given(seeds, seeds)
def test_ic4_independent_of_leading_vector(seed, seed2):
    s = HQSpace(4)
    U = random_sp_n(s, seed) @ make_complex4(s, I3, 0.9)
    X1 = U @ random_frame(rng_from(seed2), 4, 1)[:, 0]
    a, b = ic4_invariants(s, U), ic4_invariants(s, U, X1=X1)
    np.testing.assert_allclose(a.as_vector(), b.as_vector(), atol=1e-10)
    np.testing.assert_allclose(a.C_IK, b.C_IK, atol=1e-10)


@given(angles.filter(lambda t: t < np.pi / 2 - 1e-6), seeds)
def test_complex4_canonical_matrices(theta, seed):
    s = HQSpace(3)
    U = random_sp_n(s, seed) @ make_complex4(s, [1, 0, 0], theta)
    inv = ic4_invariants(s, U)
    np.testing.assert_allclose([inv.xi, inv.chi, inv.eta, inv.Gamma, inv.Delta], [0, 0, 0, 0, -1], atol=1e-9)
    np.testing.assert_allclose(inv.C_IJ, C_IJ_COMPLEX, atol=1e-9)
    np.testing.assert_allclose(inv.C_IK, C_IK_COMPLEX, atol=1e-9)


def test_totally_complex_identity(space):
    inv = ic4_invariants(space, make_complex4(space, [1, 0, 0], np.pi / 2))
    np.testing.assert_allclose(inv.C_IJ, np.eye(4), atol=1e-12)
    np.testing.assert_allclose(inv.C_IK, np.eye(4), atol=1e-12)
    assert inv.degenerate


def test_quaternionic_ic4(space):
    inv = ic4_invariants(space, random_sp_n(space, 2) @ make_quaternionic(space, 4))
    np.testing.assert_allclose(inv.thetas, 0, atol=1e-7)
    assert not inv.degenerate
    np.testing.assert_allclose([inv.xi, inv.chi, inv.eta, inv.Gamma, abs(inv.Delta)], [0, 0, 0, 0, 1], atol=1e-12)


def test_canonical_matrices_orthogonal():
    C_IJ, C_IK = canonical_matrices(0.3, -0.4, 0.6, 0.8)
    np.testing.assert_allclose(C_IJ.T @ C_IJ, np.eye(4), atol=1e-15)
    np.testing.assert_allclose(C_IK.T @ C_IK, np.eye(4), atol=1e-15)


def test_ic4_errors(space, rng):
    with pytest.raises(ValueError):
        ic4_invariants(space, random_frame(rng, space.dim, 3))
    with pytest.raises(ValueError):
        ic4_invariants(space, random_frame(rng, space.dim, 4))
    U = make_complex4(space, I3, 0.5)
    with pytest.raises(ValueError):
        build_chains(space, U, 2 * U[:, 0])


def test_two_plane_sum_is_degenerate_ic4(space):
    # two Hermitian-orthogonal 2-planes with equal imaginary measure
    P = make_two_plane(space, [0.3, 0.2, 0.1], slot=0)
    Q = make_two_plane(space, [0.3, 0.2, 0.1], slot=2)
    with warnings.catch_warnings():
        warnings.simplefilter("error", NumericalHealthWarning)
        inv = ic4_invariants(space, np.hstack([P, Q]))
    assert inv.degenerate
    np.testing.assert_allclose(np.cos(inv.thetas), [0.3, 0.2, 0.1], atol=1e-12)


# ------------------------------------------------------- complex 4-planes


@given(unit3(), angles, seeds)
def test_i_perp_kaehler_angle(I, theta, seed):
    s = HQSpace(3)
    U = random_sp_n(s, seed) @ make_complex4(s, I, theta)
    assert abs(np.cos(i_perp_kaehler_angle(s, I, U)) - np.cos(theta)) < 1e-10


@given(unit3(), angles.filter(lambda t: t < 1.5), seeds)
def test_associated_plane_characterisations(I, theta, seed):
    rng = rng_from(seed)
    s = HQSpace(3)
    U = random_sp_n(s, rng) @ make_complex4(s, I, theta)
    _, J, K = adapted_basis(I)
    phi = rng.uniform(0, 2 * np.pi)
    Kp = np.cos(phi) * K + np.sin(phi) * J
    X = U @ random_frame(rng, 4, 1)[:, 0]
    P = associated_plane(s, I, U, X, Kp)
    for name, r in associated_plane_checks(s, I, U, P, Kp).items():
        assert r < 1e-8, name


@pytest.mark.parametrize("theta", [0.2, 0.7, 1.3])
def test_worked_example(theta):
    s = HQSpace(4)
    e1 = np.array([1.0, 0, 0])
    U = make_complex4(s, e1, theta)
    Kp = np.array([0.0, -1.0, 1.0]) / np.sqrt(2)
    P = associated_plane(s, e1, U, U[:, 0], Kp)
    Ip = np.array([1.0, 2.0, 2.0]) / 3
    Ubar = orthonormalize(np.hstack([P, s.apply(Ip, P)]))
    assert abs(np.cos(i_perp_kaehler_angle(s, Ip, Ubar)) - np.cos(theta)) < 1e-10
    # the singular partner of Z is (IZ + Z)/sqrt2 for this choice
    Z = P[:, 1]
    Z2 = (s.apply(e1, Z) + Z) / np.sqrt(2)
    assert np.linalg.norm(Z2 - U @ (U.T @ Z2)) < 1e-12


def test_associated_plane_errors(space):
    U = make_complex4(space, I3, 0.5)
    _, J, K = adapted_basis(I3)
    with pytest.raises(ValueError):
        associated_plane(space, I3, U, U[:, 0], I3)
    with pytest.raises(ValueError):
        associated_plane(space, I3, make_complex4(space, I3, np.pi / 2), U[:, 0], K)
    with pytest.raises(ValueError):
        i_perp_kaehler_angle(space, I3, make_quaternionic(space, 4))


# -------------------------------------------------------------- classification


@pytest.mark.parametrize("make,kind", [
    (lambda s: make_two_plane(s, [0.1, 0.0, 0.2]), "TwoPlane"),
    (lambda s: make_quaternionic(s, 8), "Quaternionic"),
    (lambda s: make_complex4(s, I3, 0.4), "PureComplex"),
    (lambda s: make_sigma(s, [(I3, [0.4], False), ([0, 1, 0], [], True)]), "SigmaComplex"),
    (lambda s: make_rhps(s, 3), "TotallyReal"),
    (lambda s: np.hstack([make_quaternionic(s, 4), make_rhps(s, 1, slot=1)]), "Other"),
])
def test_classify(space, make, kind):
    assert classify(space, random_sp_n(space, 9) @ make(space)).kind == kind


def test_classify_flags(space):
    assert classify(space, make_rhps(space, 2)).rhps
    assert classify(space, make_complex4(space, I3, 0.4)).ic4
    assert not classify(space, make_complex_even(space, I3, [], tail=True)).ic4


# -------------------------------------------------------------- equivalence


def _samples(s):
    return [
        make_two_plane(s, [0.3, -0.1, 0.5]),
        make_complex4(s, I3, 0.8),
        make_complex_even(s, [0, 0, 1], [0.3], tail=True),
        make_sigma(s, [(I3, [0.6], False), ([0, 1, 0], [], True)]),
        make_quaternionic(s, 8),
        make_rhps(s, 3),
        np.hstack([make_two_plane(s, [0.3, 0.2, 0.1], slot=0), make_two_plane(s, [0.3, 0.2, 0.1], slot=2)]),
    ]


@settings(max_examples=10)
@given(seeds)
def test_invariants_are_sp_n_invariant(seed):
    s = HQSpace(5)
    g = random_sp_n(s, seed)
    for U in _samples(s):
        assert orbit_invariant(s, U).distance(orbit_invariant(s, g @ U)) < 1e-9


def test_witness_for_each_class():
    s = HQSpace(5)
    for U in _samples(s):
        W = random_sp_n(s, 21) @ U
        w = sp_n_witness(s, U, W)
        assert w is not None
        v = w.verification
        assert v["max_principal_angle"] < 1e-7
        assert max(v["commutator_norms"]) < 1e-9 and v["orthogonality_residual"] < 1e-9


def test_non_equivalent_pairs(space):
    a = make_complex4(space, I3, 0.8)
    b = make_complex4(space, I3, 0.801)
    c = make_complex4(space, [0, 1, 0], 0.8)
    assert not same_orbit(space, a, b)
    assert not same_orbit(space, a, c)
    assert not same_orbit(space, a, make_rhps(space, 4))
    assert sp_n_witness(space, a, random_sp_n(space, 1) @ b) is None
    with pytest.raises(ValueError):
        same_orbit(space, a, make_rhps(space, 3))


def test_invariant_json_shapes(space):
    inv = orbit_invariant(space, make_sigma(space, [(I3, [0.6], False), ([0, 1, 0], [], True)]))
    data = inv.data()
    assert [it["dim"] for it in data["items"]] == [2, 4]
    assert data["items"][0]["multiangle"] == [np.pi / 2]
