import numpy as np
import pytest

from jive_jackstraw.linalg import (
    as_matrix,
    as_vector,
    center_rows,
    pca,
    truncated_svd,
    vector_angle,
)


def test_as_matrix_rejects_bad_input():
    with pytest.raises(ValueError):
        as_matrix([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        as_matrix(np.zeros((0, 4)))
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan], [0.0, 1.0]])
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.inf], [0.0, 1.0]])


def test_as_vector_rejects_bad_input():
    with pytest.raises(ValueError):
        as_vector([[1.0, 2.0]])
    with pytest.raises(ValueError):
        as_vector([])
    with pytest.raises(ValueError):
        as_vector([1.0, np.nan])


def test_center_rows_zeroes_row_means():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(7, 11)) + 3.0
    c = center_rows(m)
    assert np.max(np.abs(c.mean(axis=1))) < 1e-12
    # centering subtracts a constant per row
    assert np.allclose(c, m - m.mean(axis=1, keepdims=True))


def test_truncated_svd_matches_tail_energy_oracle():
    # ||M - M_r||_F^2 must equal the sum of squared discarded singular values
    rng = np.random.default_rng(1)
    m = rng.normal(size=(20, 35))
    full_s = np.linalg.svd(m, compute_uv=False)
    for rank in (1, 3, 7, 20):
        fac = truncated_svd(m, rank)
        err = np.linalg.norm(m - fac.reconstruct()) ** 2
        tail = float(np.sum(full_s[rank:] ** 2))
        assert abs(err - tail) < 1e-8 * max(tail, 1.0)
        assert np.allclose(fac.singular_values, full_s[:rank])


def test_truncated_svd_factor_shapes_and_orthonormality():
    rng = np.random.default_rng(2)
    m = rng.normal(size=(15, 9))
    fac = truncated_svd(m, 4)
    assert fac.left_vectors.shape == (15, 4)
    assert fac.right_vectors.shape == (9, 4)
    assert fac.singular_values.shape == (4,)
    assert fac.rank == 4
    assert np.allclose(fac.left_vectors.T @ fac.left_vectors, np.eye(4), atol=1e-10)
    assert np.allclose(fac.right_vectors.T @ fac.right_vectors, np.eye(4), atol=1e-10)
    assert np.all(np.diff(fac.singular_values) <= 1e-12)


def test_truncated_svd_full_rank_reconstructs_exactly():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(6, 10))
    fac = truncated_svd(m, 6)
    assert np.allclose(fac.reconstruct(), m, atol=1e-10)


def test_truncated_svd_sign_convention():
    # largest-magnitude entry of each left vector is positive
    rng = np.random.default_rng(4)
    m = rng.normal(size=(12, 12))
    fac = truncated_svd(m, 5)
    for j in range(5):
        col = fac.left_vectors[:, j]
        assert col[np.argmax(np.abs(col))] > 0
    # flipping the data flips pairs but the convention re-fixes them
    fac2 = truncated_svd(-m, 5)
    for j in range(5):
        col = fac2.left_vectors[:, j]
        assert col[np.argmax(np.abs(col))] > 0


def test_truncated_svd_deterministic_under_refactor():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(10, 8))
    a = truncated_svd(m, 3)
    b = truncated_svd(a.reconstruct(), 3)
    assert np.allclose(a.left_vectors, b.left_vectors, atol=1e-8)
    assert np.allclose(a.right_vectors, b.right_vectors, atol=1e-8)
    assert np.allclose(a.singular_values, b.singular_values, atol=1e-10)


def test_truncated_svd_rank_validation():
    m = np.eye(4)
    with pytest.raises(ValueError):
        truncated_svd(m, 0)
    with pytest.raises(ValueError):
        truncated_svd(m, 5)
    with pytest.raises(ValueError):
        truncated_svd(m, -1)


def test_pca_requires_centered_rows():
    rng = np.random.default_rng(6)
    m = rng.normal(size=(5, 20)) + 10.0
    with pytest.raises(ValueError):
        pca(m, 2)


def test_pca_scores_loadings_and_variances():
    rng = np.random.default_rng(7)
    m = center_rows(rng.normal(size=(9, 40)))
    scores, loadings, variances = pca(m, 3)
    assert scores.shape == (3, 40)
    assert loadings.shape == (9, 3)
    assert variances.shape == (3,)
    # score rows are orthonormal, loadings carry the scale
    assert np.allclose(scores @ scores.T, np.eye(3), atol=1e-10)
    assert np.allclose(loadings @ scores, truncated_svd(m, 3).reconstruct(), atol=1e-8)
    # variances are squared singular values over n - 1
    s = np.linalg.svd(m, compute_uv=False)[:3]
    assert np.allclose(variances, s**2 / (40 - 1), atol=1e-10)
    assert np.all(np.diff(variances) <= 1e-12)


def test_pca_loading_reproduces_data_times_score():
    rng = np.random.default_rng(8)
    m = center_rows(rng.normal(size=(6, 25)))
    scores, loadings, _ = pca(m, 2)
    for j in range(2):
        assert np.allclose(loadings[:, j], m @ scores[j], atol=1e-10)


def test_vector_angle_known_values():
    assert vector_angle([1.0, 0.0], [0.0, 1.0]) == pytest.approx(90.0)
    assert vector_angle([1.0, 0.0], [2.0, 0.0]) == pytest.approx(0.0)
    assert vector_angle([1.0, 0.0], [1.0, 1.0]) == pytest.approx(45.0)
    assert vector_angle([1.0, 2.0, 2.0], [1.0, 2.0, 2.0]) == pytest.approx(0.0)


def test_vector_angle_sign_and_scale_invariant():
    rng = np.random.default_rng(9)
    u = rng.normal(size=30)
    v = rng.normal(size=30)
    a = vector_angle(u, v)
    assert vector_angle(-u, v) == pytest.approx(a, abs=1e-10)
    assert vector_angle(3.5 * u, -0.2 * v) == pytest.approx(a, abs=1e-10)
    assert 0.0 <= a <= 90.0


def test_vector_angle_errors():
    with pytest.raises(ValueError):
        vector_angle([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        vector_angle([1.0, 0.0], [1.0, 0.0, 0.0])
