"""SVD-based pseudoinverse, numerical rank and full rank factorization.

All rank decisions in the package go through :func:`numerical_rank` with a
cutoff relative to the largest singular value, so the admissibility check
and the recovery pipeline agree on what "full rank" means.
"""

from __future__ import annotations

import numpy as np

DEFAULT_RANK_TOL = 1e-9


def numerical_rank(a, tol: float = DEFAULT_RANK_TOL) -> int:
    """Number of singular values above ``tol * sigma_max``."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def pseudoinverse(a, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose inverse from a truncated SVD.

    Singular values at or below ``tol * sigma_max`` are treated as zero.
    The zero matrix maps to the zero matrix of transposed shape.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    m, n = a.shape
    if a.size == 0:
        return np.zeros((n, m))
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((n, m))
    keep = s > tol * s[0]
    s_inv = np.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    return (vt.T * s_inv) @ u.T


def full_rank_factorization(a, tol: float = DEFAULT_RANK_TOL):
    """Factor ``a = R1 @ R2`` with ``R1`` of full column rank and ``R2`` of
    full row rank.

    Uses the balanced split of the truncated SVD,
    ``R1 = U_r sqrt(S_r)`` and ``R2 = sqrt(S_r) V_r^T``.

    Returns
    -------
    R1 : ndarray, shape (m, r)
    R2 : ndarray, shape (r, n)
    r : int
        Numerical rank; ``r == 0`` for the zero matrix, with empty factors.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    m, n = a.shape
    if a.size == 0:
        return np.zeros((m, 0)), np.zeros((0, n)), 0
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((m, 0)), np.zeros((0, n)), 0
    r = int(np.sum(s > tol * s[0]))
    root = np.sqrt(s[:r])
    r1 = u[:, :r] * root
    r2 = root[:, None] * vt[:r]
    return r1, r2, r


def singular_gap(a, r: int) -> float:
    """Ratio ``sigma_r / sigma_{r+1}`` around a rank cutoff (1-based r).

    Returns ``inf`` when there is nothing below the cutoff or the next
    singular value is exactly zero.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0 or r == 0:
        return np.inf
    s = np.linalg.svd(a, compute_uv=False)
    if r >= len(s) or s[r] == 0.0:
        return np.inf
    return float(s[r - 1] / s[r])
