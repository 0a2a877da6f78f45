import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permorb import (
    flatten_embedding,
    make_rng,
    permute_rows,
    pooled_embedding,
    singular_values,
    sketched_embedding,
    sorted_embedding,
    translation_offset,
)
from permorb.core import random_permutation
from permorb.metrics import orbit_distance


def _cloud_and_perm(seed, n, d):
    rng = make_rng(seed)
    return rng.standard_normal((n, d)), random_permutation(n, rng)


# ---------------------------------------------------------------------------
# sorted embedding
# ---------------------------------------------------------------------------


def test_single_row_is_plain_projection():
    rng = make_rng(0)
    A = rng.standard_normal((3, 5))
    X = rng.standard_normal((1, 3))
    assert np.array_equal(sorted_embedding(A, X), X @ A)


def test_identity_directions_sort_coordinates():
    X = np.array([[1.0, 0.0], [0.0, 1.0]])
    E = sorted_embedding(np.eye(2), X)
    assert E.tolist() == [[0.0, 0.0], [1.0, 1.0]]


def test_homogeneity_for_positive_scale():
    rng = make_rng(1)
    A = rng.standard_normal((3, 6))
    X = rng.standard_normal((4, 3))
    left = sorted_embedding(A, 2.5 * X)
    right = 2.5 * sorted_embedding(A, X)
    assert np.max(np.abs(left - right)) < 1e-12


def test_columns_are_non_decreasing():
    rng = make_rng(2)
    E = sorted_embedding(rng.standard_normal((3, 7)), rng.standard_normal((6, 3)))
    assert np.all(np.diff(E, axis=0) >= 0)


@given(st.integers(0, 2**32), st.integers(2, 7), st.integers(1, 4), st.integers(1, 9))
@settings(max_examples=60, deadline=None)
def test_permutation_invariance_is_exact(seed, n, d, D):
    rng = make_rng(seed)
    A = rng.standard_normal((d, D))
    X = rng.standard_normal((n, d))
    sigma = random_permutation(n, rng)
    assert np.array_equal(sorted_embedding(A, permute_rows(X, sigma)), sorted_embedding(A, X))


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        sorted_embedding(np.eye(3), np.zeros((2, 2)))


# ---------------------------------------------------------------------------
# pooled embedding
# ---------------------------------------------------------------------------


def test_all_ones_pooling_sums_projections():
    rng = make_rng(3)
    A = rng.standard_normal((2, 4))
    X = rng.standard_normal((5, 2))
    B = np.ones((5, 4))
    assert np.max(np.abs(pooled_embedding(A, B, X) - (X @ A).sum(axis=0))) < 1e-12


def test_pooled_single_row():
    rng = make_rng(4)
    A = rng.standard_normal((2, 3))
    B = rng.standard_normal((1, 3))
    X = rng.standard_normal((1, 2))
    assert np.allclose(pooled_embedding(A, B, X), B[0] * (X @ A)[0])


def test_pooled_permutation_invariance():
    rng = make_rng(5)
    A = rng.standard_normal((2, 6))
    B = rng.standard_normal((5, 6))
    X = rng.standard_normal((5, 2))
    sigma = random_permutation(5, rng)
    assert np.array_equal(
        pooled_embedding(A, B, permute_rows(X, sigma)), pooled_embedding(A, B, X)
    )


def test_pooled_shape_validation():
    with pytest.raises(ValueError):
        pooled_embedding(np.eye(2), np.ones((3, 3)), np.zeros((4, 2)))


# ---------------------------------------------------------------------------
# sketched embedding
# ---------------------------------------------------------------------------


def test_identity_sketch_recovers_flattening():
    rng = make_rng(6)
    A = rng.standard_normal((2, 3))
    X = rng.standard_normal((4, 2))
    L = np.eye(12)
    assert np.array_equal(
        sketched_embedding(A, L, X), flatten_embedding(sorted_embedding(A, X))
    )


def test_zero_row_sketch_is_zero():
    rng = make_rng(7)
    A = rng.standard_normal((2, 3))
    X = rng.standard_normal((4, 2))
    assert sketched_embedding(A, np.zeros((1, 12)), X).tolist() == [0.0]


def test_sketch_linearity_in_operator():
    rng = make_rng(8)
    A = rng.standard_normal((3, 4))
    X = rng.standard_normal((5, 3))
    L1 = rng.standard_normal((6, 20))
    L2 = rng.standard_normal((6, 20))
    combined = sketched_embedding(A, L1 + L2, X)
    summed = sketched_embedding(A, L1, X) + sketched_embedding(A, L2, X)
    assert np.max(np.abs(combined - summed)) < 1e-12


def test_sketch_permutation_invariance():
    rng = make_rng(9)
    A = rng.standard_normal((2, 3))
    X = rng.standard_normal((4, 2))
    L = rng.standard_normal((5, 12))
    sigma = random_permutation(4, rng)
    assert np.array_equal(
        sketched_embedding(A, L, permute_rows(X, sigma)), sketched_embedding(A, L, X)
    )


def test_sketch_column_mismatch_rejected():
    with pytest.raises(ValueError):
        sketched_embedding(np.eye(2), np.zeros((3, 7)), np.zeros((4, 2)))


# ---------------------------------------------------------------------------
# translation offset
# ---------------------------------------------------------------------------


def test_translation_offset_zero_vector():
    A = make_rng(10).standard_normal((3, 4))
    assert np.array_equal(translation_offset(A, np.zeros(3), 5), np.zeros((5, 4)))


def test_translation_offset_constant_column():
    assert translation_offset(np.array([[1.0]]), np.array([3.0]), 2).tolist() == [[3.0], [3.0]]


def test_translation_identity_holds():
    rng = make_rng(11)
    A = rng.standard_normal((3, 5))
    X = rng.standard_normal((4, 3))
    z = rng.standard_normal(3)
    shifted = sorted_embedding(A, X + np.outer(np.ones(4), z))
    composed = sorted_embedding(A, X) + translation_offset(A, z, 4)
    assert np.max(np.abs(shifted - composed)) < 1e-12


# ---------------------------------------------------------------------------
# upper Lipschitz property
# ---------------------------------------------------------------------------


def test_embedding_gap_bounded_by_sigma1_times_distance():
    rng = make_rng(12)
    A = rng.standard_normal((3, 8))
    sigma1 = float(singular_values(A)[0])
    for _ in range(200):
        X = rng.standard_normal((5, 3))
        Y = rng.standard_normal((5, 3))
        gap = float(np.linalg.norm(sorted_embedding(A, X) - sorted_embedding(A, Y)))
        dist = orbit_distance(X, Y).distance
        assert gap <= sigma1 * dist * (1.0 + 1e-9)
