import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from degauss.errors import InvalidInputError
from degauss.subspace import (
    column_space,
    compact_svd,
    complement,
    fix_signs,
    is_orthonormal,
    null_space,
    projector_distance,
    pseudo_inverse,
    psd_basis,
    range_and_kernel,
    rank,
)

# Quarter-integers give exact rank deficiencies often enough to matter.
finite = st.integers(-40, 40).map(lambda i: i / 4.0)


def matrices(max_rows=5, max_cols=5):
    return st.tuples(st.integers(1, max_rows), st.integers(1, max_cols)).flatmap(
        lambda s: arrays(np.float64, s, elements=finite)
    )


def test_compact_svd_identity():
    U, s, V = compact_svd(np.eye(2))
    np.testing.assert_allclose(s, [1.0, 1.0])
    np.testing.assert_allclose(U @ np.diag(s) @ V.T, np.eye(2), atol=1e-15)


def test_compact_svd_zero_matrix_is_empty():
    U, s, V = compact_svd(np.zeros((2, 2)))
    assert U.shape == (2, 0) and s.shape == (0,) and V.shape == (2, 0)


def test_compact_svd_rank_one_matches_eigendecomposition():
    M = np.array([[1.0, 1.0], [1.0, 1.0]])
    U, s, V = compact_svd(M)
    w, Z = np.linalg.eigh(M.T @ M)
    np.testing.assert_allclose(s, [np.sqrt(w[-1])])
    np.testing.assert_allclose(s, [2.0])
    r = np.array([[1.0], [1.0]]) / np.sqrt(2)
    np.testing.assert_allclose(U, r, atol=1e-15)
    np.testing.assert_allclose(V, r, atol=1e-15)


def test_compact_svd_rejects_non_finite():
    with pytest.raises(InvalidInputError):
        compact_svd(np.array([[np.nan, 1.0]]))


def test_column_space_examples():
    np.testing.assert_allclose(column_space(np.array([[1.0, 0.0], [0.0, 0.0]])), [[1.0], [0.0]])
    assert column_space(np.zeros((3, 2))).shape == (3, 0)
    B = column_space(np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]))
    np.testing.assert_allclose(B[:, 0], np.array([1.0, 2.0, 3.0]) / np.sqrt(14), atol=1e-15)


def test_complement_examples():
    np.testing.assert_allclose(complement(np.array([[1.0], [0.0]])), [[0.0], [1.0]])
    assert complement(np.eye(3)).shape == (3, 0)
    b = np.ones((3, 1)) / np.sqrt(3)
    C = complement(b)
    assert C.shape == (3, 2)
    np.testing.assert_allclose(b.T @ C, 0.0, atol=1e-15)
    assert is_orthonormal(np.hstack([b, C]))


def test_complement_of_empty_basis_is_identity():
    np.testing.assert_array_equal(complement(np.zeros((2, 0))), np.eye(2))


def test_null_space_examples():
    assert null_space(np.eye(3)).shape == (3, 0)
    np.testing.assert_array_equal(null_space(np.zeros((2, 3))).shape, (3, 3))
    np.testing.assert_allclose(null_space(np.array([[1.0, -1.0]])), np.ones((2, 1)) / np.sqrt(2), atol=1e-15)


def test_pseudo_inverse_examples():
    np.testing.assert_allclose(pseudo_inverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))
    M = np.array([[3.0, 1.0], [2.0, 4.0]])
    det = 3.0 * 4.0 - 1.0 * 2.0
    np.testing.assert_allclose(pseudo_inverse(M), np.array([[4.0, -1.0], [-2.0, 3.0]]) / det, atol=1e-10)
    np.testing.assert_allclose(pseudo_inverse(np.ones((2, 1))), [[0.5, 0.5]], atol=1e-15)


def test_rank_respects_cutoff():
    M = np.diag([1.0, 1e-3, 1e-17])
    assert rank(M) == 2
    assert rank(M, rtol=1e-2) == 1
    assert rank(M, rtol=1e-2, scale=200.0) == 0


def test_fix_signs_makes_largest_entry_positive():
    U = np.array([[0.1, -0.9], [-0.8, 0.2]])
    V = np.eye(2)
    Uf, Vf = fix_signs(U, V)
    np.testing.assert_allclose(Uf, [[-0.1, 0.9], [0.8, -0.2]])
    np.testing.assert_allclose(Vf, [[-1.0, 0.0], [0.0, -1.0]])


def test_psd_basis_rejects_indefinite_and_asymmetric():
    with pytest.raises(InvalidInputError):
        psd_basis(np.diag([1.0, -1.0]))
    with pytest.raises(InvalidInputError):
        psd_basis(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_psd_basis_fixed_rank():
    U, s = psd_basis(np.diag([3.0, 2.0, 1e-20]), rank=3)
    np.testing.assert_allclose(s, [3.0, 2.0, 1e-20])
    U, s = psd_basis(np.diag([3.0, 2.0, 0.0]))
    np.testing.assert_allclose(s, [3.0, 2.0])


@settings(max_examples=200, deadline=None)
@given(matrices())
def test_fundamental_subspace_duality(M):
    B = column_space(M)
    N = null_space(M.T)
    assert B.shape[1] + N.shape[1] == M.shape[0]
    if B.shape[1] and N.shape[1]:
        np.testing.assert_allclose(B.T @ N, 0.0, atol=1e-10)


@settings(max_examples=200, deadline=None)
@given(matrices())
def test_svd_reconstruction_and_ordering(M):
    U, s, V = compact_svd(M)
    assert np.all(np.diff(s) <= 0)
    assert is_orthonormal(U) and is_orthonormal(V)
    norm = np.linalg.norm(M, 2)
    assert np.linalg.norm(U @ np.diag(s) @ V.T - M, 2) <= 1e-12 * max(norm, 1.0) + 10 * max(M.shape) * np.finfo(float).eps * norm


@settings(max_examples=200, deadline=None)
@given(matrices())
def test_complement_twice_spans_same_subspace(M):
    B = column_space(M)
    np.testing.assert_allclose(projector_distance(complement(complement(B)), B), 0.0, atol=1e-10)


@settings(max_examples=200, deadline=None)
@given(matrices())
def test_pseudo_inverse_penrose_identities(M):
    P = pseudo_inverse(M)
    scale = max(np.abs(M).max(), 1.0)
    np.testing.assert_allclose(M @ P @ M, M, atol=1e-8 * scale)
    np.testing.assert_allclose(P @ M @ P, P, atol=1e-8 * max(np.abs(P).max(), 1.0))


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_outputs_are_deterministic(M):
    a, b = compact_svd(M), compact_svd(M.copy())
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_range_and_kernel_dimensions_add_up(M):
    R, K = range_and_kernel(M)
    assert R.shape[1] + K.shape[1] == M.shape[1]
    if K.shape[1]:
        np.testing.assert_allclose(M @ K, 0.0, atol=1e-9 * max(np.abs(M).max(), 1.0))
