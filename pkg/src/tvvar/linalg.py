"""Small dense-matrix primitives and structured 0/1 operators.

Everything here works on plain numpy arrays. The structured operators
(commutation, duplication, elimination, strictly-upper selector) are
materialized as explicit 0/1 matrices: all use cases have dimension d <= ~10,
so there is no point in an implicit-permutation fast path.

Conventions: ``vec`` stacks columns (column-major); ``vech`` keeps the lower
triangle including the diagonal, column by column.
"""

import numpy as np

from .errors import NotPositiveDefiniteError

__all__ = [
    "vec",
    "unvec",
    "vech",
    "unvech",
    "commutation",
    "duplication",
    "elimination",
    "strict_upper_selector",
    "cholesky_lower",
    "spectral_radius",
]


def vec(m):
    """Column-stack a matrix into a 1-d vector."""
    m = np.asarray(m)
    return m.reshape(m.shape[0] * m.shape[1], order="F")


def unvec(v, rows, cols):
    """Inverse of :func:`vec`."""
    return np.asarray(v).reshape(rows, cols, order="F")


def vech(m):
    """Half-vectorize a square matrix: lower triangle incl. diagonal, by column."""
    m = np.asarray(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"vech requires a square matrix, got {m.shape}")
    rows, cols = np.tril_indices(m.shape[0])
    # tril_indices is row-major; reorder to column-major vech order
    order = np.lexsort((rows, cols))
    return m[rows[order], cols[order]]


def unvech(v, symmetric=True):
    """Rebuild a square matrix from its vech. Mirrors the lower triangle up."""
    v = np.asarray(v)
    n = v.shape[0]
    d = int(round((np.sqrt(8 * n + 1) - 1) / 2))
    if d * (d + 1) // 2 != n:
        raise ValueError(f"length {n} is not a triangular number")
    out = np.zeros((d, d), dtype=v.dtype)
    rows, cols = np.tril_indices(d)
    order = np.lexsort((rows, cols))
    out[rows[order], cols[order]] = v
    if symmetric:
        out = out + out.T - np.diag(np.diag(out))
    return out


def commutation(m, n):
    """Commutation matrix K with K @ vec(G) = vec(G.T) for any m x n G."""
    K = np.zeros((m * n, m * n))
    i = np.repeat(np.arange(m), n)
    j = np.tile(np.arange(n), m)
    K[i * n + j, j * m + i] = 1.0
    return K


def duplication(d):
    """Duplication matrix D with D @ vech(S) = vec(S) for symmetric d x d S."""
    D = np.zeros((d * d, d * (d + 1) // 2))
    k = 0
    for j in range(d):
        for i in range(j, d):
            D[j * d + i, k] = 1.0
            D[i * d + j, k] = 1.0
            k += 1
    return D


def elimination(d):
    """Elimination matrix L with L @ vec(F) = vech(F) for any d x d F."""
    L = np.zeros((d * (d + 1) // 2, d * d))
    k = 0
    for j in range(d):
        for i in range(j, d):
            L[k, j * d + i] = 1.0
            k += 1
    return L


def strict_upper_selector(d):
    """Selector Q (d(d-1)/2 x d^2) picking strictly-upper entries of vec(B).

    For lower-triangular B this gives Q @ vec(B) = 0, which is the zero
    restriction used by the long-run identification scheme.
    """
    Q = np.zeros((d * (d - 1) // 2, d * d))
    k = 0
    for j in range(d):
        for i in range(j):
            Q[k, j * d + i] = 1.0
            k += 1
    return Q


def cholesky_lower(s, rel_tol=1e-12):
    """Lower Cholesky factor with positive diagonal.

    The input is symmetrized as (s + s.T)/2 before factorization. A pivot at
    or below ``rel_tol`` times the largest diagonal entry raises
    :class:`NotPositiveDefiniteError` with the offending pivot index.
    """
    s = np.asarray(s, dtype=float)
    s = 0.5 * (s + s.T)
    d = s.shape[0]
    tol = rel_tol * max(np.max(np.diag(s)), 0.0)
    L = np.zeros_like(s)
    for j in range(d):
        pivot = s[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > tol:
            raise NotPositiveDefiniteError(j)
        L[j, j] = np.sqrt(pivot)
        if j + 1 < d:
            L[j + 1 :, j] = (s[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def spectral_radius(m):
    """Largest eigenvalue modulus of a square matrix."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"spectral_radius requires a square matrix, got {m.shape}")
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(m))))
