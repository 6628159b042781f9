import json

import numpy as np
import pytest
from hypothesis import given

from hqorbit.hqspace import HQSpace
from hqorbit.lab import make_complex4, make_quaternionic, make_rhps, random_frame, rng_from, slot_vector
from hqorbit.subspace import (complement, complement_in, frame_from_json, frame_to_json, gram_schmidt,
                              h_frame_matrix, h_orthonormalize, intersect, is_hermitian_orthogonal,
                              is_invariant, orthonormalize, project, quaternionify, subspace_sum)

from strategies import seeds


def test_orthonormalize_drops_dependent_columns(rng):
    A = rng.normal(size=(8, 3))
    U = orthonormalize(np.hstack([A, (A @ [1.0, -2.0, 0.5])[:, None]]))
    assert U.shape == (8, 3)
    np.testing.assert_allclose(U.T @ U, np.eye(3), atol=1e-14)
    assert orthonormalize(np.zeros((8, 0))).shape == (8, 0)


def test_gram_schmidt_keeps_order(rng):
    A = rng.normal(size=(6, 3))
    Q = gram_schmidt(A)
    np.testing.assert_allclose(Q[:, 0], A[:, 0] / np.linalg.norm(A[:, 0]), atol=1e-15)
    R = Q.T @ A
    np.testing.assert_allclose(np.tril(R, -1), 0, atol=1e-13)
    assert np.all(np.diag(R) > 0)


@given(seeds)
def test_h_orthonormalize(seed):
    rng = rng_from(seed)
    s = HQSpace(3)
    vs = h_orthonormalize(s, rng.normal(size=(s.dim, 2)))
    assert len(vs) == 2
    G = s.hermitian_gram(np.stack(vs, axis=1))
    np.testing.assert_allclose(G[..., 0], np.eye(2), atol=1e-12)
    np.testing.assert_allclose(G[..., 1:], 0, atol=1e-12)
    F = h_frame_matrix(s, vs)
    np.testing.assert_allclose(F.T @ F, np.eye(8), atol=1e-12)
    for e in np.eye(3):
        assert is_invariant(s, e, F, 1e-12)


def test_h_orthonormalize_skips_dependent(space, rng):
    v = rng.normal(size=space.dim)
    vq = space.right_multiply(v, [0.3, -1.0, 0.2, 0.7])
    assert len(h_orthonormalize(space, np.stack([v, vq], axis=1))) == 1


def test_complement_and_project(rng):
    W = random_frame(rng, 10, 6)
    U = W[:, :2]
    C = complement_in(W, U)
    assert C.shape == (10, 4)
    np.testing.assert_allclose(U.T @ C, 0, atol=1e-14)
    np.testing.assert_allclose(project(W, C), C, atol=1e-14)
    assert complement(U).shape == (10, 8)


def test_intersect_and_sum(rng):
    B = random_frame(rng, 10, 5)
    U, W = B[:, :3], B[:, 2:]
    assert intersect(U, W).shape[1] == 1
    assert subspace_sum(U, W).shape[1] == 5
    assert intersect(U, np.zeros((10, 0))).shape == (10, 0)


def test_quaternionify_dimensions(space):
    X = slot_vector(space, 0, [0.6, 0.8, 0, 0])
    assert quaternionify(space, X[:, None]).shape[1] == 4
    assert quaternionify(space, make_rhps(space, 3)).shape[1] == 12
    assert quaternionify(space, make_quaternionic(space, 8)).shape[1] == 8


def test_is_invariant(space):
    U = make_complex4(space, [1, 0, 0], 0.4)
    assert is_invariant(space, [1, 0, 0], U)
    assert not is_invariant(space, [0, 1, 0], U)


def test_hermitian_orthogonality_of_disjoint_slots(space):
    U = make_complex4(space, [0, 1, 0], 0.3, slot=0)
    W = make_rhps(space, 2, slot=2)
    assert is_hermitian_orthogonal(space, U, W)
    assert not is_hermitian_orthogonal(space, U, make_rhps(space, 1, slot=1))


def test_frame_json_round_trip(space, rng):
    U = random_frame(rng, space.dim, 3)
    n, V, res = frame_from_json(json.dumps(frame_to_json(space.n, U)))
    assert n == space.n and res < 1e-14
    np.testing.assert_allclose(np.abs(np.sum(U * V, axis=0)), 1, atol=1e-13)


def test_frame_json_keeps_orientation():
    cols = [[0, 0, 0, 0, 2, 0, 0, 0], [1, 0, 0, 0, 1, 0, 0, 0]]
    _, U, _ = frame_from_json({"n": 2, "columns": cols})
    np.testing.assert_allclose(U[:, 0], [0, 0, 0, 0, 1, 0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(U[:, 1], [1, 0, 0, 0, 0, 0, 0, 0], atol=1e-15)


def test_frame_json_rank_deficient():
    cols = [[1, 0, 0, 0], [2, 0, 0, 0], [0, 1, 0, 0]]
    _, U, res = frame_from_json({"n": 1, "columns": cols})
    assert U.shape == (4, 2) and res < 1e-14


@pytest.mark.parametrize("obj", [
    {"columns": []},
    {"n": 0, "columns": []},
    {"n": 1, "columns": [[1, 2, 3]]},
    {"n": 1, "columns": "x"},
    {"n": 1, "columns": [[1, 0, float("nan"), 0]]},
    [1, 2],
])
def test_frame_json_validation(obj):
    with pytest.raises(ValueError):
        frame_from_json(obj)
