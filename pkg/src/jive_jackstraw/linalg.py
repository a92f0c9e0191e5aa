"""Shared linear algebra: row centering, deterministic truncated SVD, PCA, angles.

All public functions accept anything ``np.asarray`` can turn into a 2-D float
matrix and validate shape and finiteness up front.  Matrices are oriented
features x cases throughout the package.
"""

import numpy as np
from dataclasses import dataclass

__all__ = [
    "SvdFactors",
    "as_matrix",
    "center_rows",
    "truncated_svd",
    "pca",
    "vector_angle",
]


def as_matrix(values, name="matrix"):
    """Coerce to a 2-D float64 array, rejecting empty or non-finite input."""
    m = np.asarray(values, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_vector(values, name="vector"):
    """Coerce to a 1-D float64 array, rejecting empty or non-finite input."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={v.ndim}")
    if v.size < 1:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


@dataclass(frozen=True)
class SvdFactors:
    """Rank-r factorization ``left_vectors @ diag(singular_values) @ right_vectors.T``.

    Attributes
    ----------
    left_vectors : ndarray, shape (d, r)
        Orthonormal columns.
    singular_values : ndarray, shape (r,)
        Non-negative, non-increasing.
    right_vectors : ndarray, shape (n, r)
        Orthonormal columns.
    """

    left_vectors: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray

    @property
    def rank(self):
        return self.singular_values.shape[0]

    def reconstruct(self):
        """Return the rank-r matrix this factorization represents."""
        return (self.left_vectors * self.singular_values) @ self.right_vectors.T


def center_rows(m):
    """Subtract each row's mean.  Returns a new array."""
    m = as_matrix(m)
    return m - m.mean(axis=1, keepdims=True)


def _fix_signs(u, vt):
    # Deterministic sign convention: within each singular pair, the entry of
    # the left vector with largest magnitude is made positive.  Ties resolved
    # by the first index (argmax).  The right vector flips with it so the
    # product is unchanged.
    for k in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, k])))
        if u[i, k] < 0:
            u[:, k] = -u[:, k]
            vt[k, :] = -vt[k, :]
    return u, vt


def truncated_svd(m, rank):
    """Best rank-``rank`` factorization of ``m`` with a fixed sign convention.

    Parameters
    ----------
    m : array_like, shape (d, n)
    rank : int
        1 <= rank <= min(d, n).

    Returns
    -------
    SvdFactors
    """
    m = as_matrix(m)
    rank = int(rank)
    if rank < 1 or rank > min(m.shape):
        raise ValueError(f"rank must be in [1, {min(m.shape)}], got {rank}")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    u, s, vt = u[:, :rank].copy(), s[:rank].copy(), vt[:rank, :].copy()
    u, vt = _fix_signs(u, vt)
    return SvdFactors(left_vectors=u, singular_values=s, right_vectors=vt.T.copy())


def pca(m, rank):
    """PCA of a row-centered matrix via its SVD.

    Parameters
    ----------
    m : array_like, shape (d, n)
        Must already be row-centered (|row mean| <= 1e-8 enforced).
    rank : int
        Number of components, 1 <= rank <= min(d, n).

    Returns
    -------
    scores : ndarray, shape (rank, n)
        Unit-norm right singular vectors, one component per row.
    loadings : ndarray, shape (d, rank)
        Left singular vectors scaled by their singular values.
    variances : ndarray, shape (rank,)
        Per-component variance s_k**2 / (n - 1), non-increasing.
    """
    m = as_matrix(m)
    if m.shape[1] < 2:
        raise ValueError("pca needs at least 2 cases")
    means = m.mean(axis=1)
    worst = float(np.max(np.abs(means)))
    if worst > 1e-8:
        raise ValueError(f"pca input is not row-centered (max |row mean| = {worst:.3g})")
    f = truncated_svd(m, rank)
    scores = f.right_vectors.T.copy()
    loadings = f.left_vectors * f.singular_values
    variances = f.singular_values**2 / (m.shape[1] - 1)
    return scores, loadings, variances


def vector_angle(u, v):
    """Angle between two non-zero vectors, in degrees, in [0, 90].

    Sign is ignored: the angle is computed from |cos| so that a vector and
    its negation are at 0 degrees.
    """
    u = as_vector(u, "u")
    v = as_vector(v, "v")
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("vector_angle requires non-zero vectors")
    c = abs(float(np.dot(u, v))) / (nu * nv)
    return float(np.degrees(np.arccos(min(c, 1.0))))
