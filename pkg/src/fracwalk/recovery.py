"""Recover a transition matrix, up to hidden-block gauge, from the
observable blocks of its first three powers."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InsufficientData
from .linalg import (
    DEFAULT_RANK_TOL,
    full_rank_factorization,
    pseudoinverse,
    singular_gap,
)
from .walk_model import ObservationData, blocks

__all__ = [
    "CanonicalRepresentative",
    "assemble_canonical",
    "full_rank_factorization",
    "hidden_products",
    "insufficiency_witness",
    "pseudoinverse",
    "recover_canonical",
    "recovered_vertex_count",
    "verify_redundancy",
]


class SpectralGapWarning(UserWarning):
    """The rank cutoff falls where neighbouring singular values are close."""


@dataclass(frozen=True)
class CanonicalRepresentative:
    N: int
    r: int
    Q: np.ndarray
    R1: np.ndarray
    R2: np.ndarray

    @property
    def rank_saturated(self) -> bool:
        """``r == N``: the hidden rank hit its ceiling, so the data cannot
        exclude more hidden vertices than ``r`` and the vertex count is only
        a lower bound."""
        return self.N > 0 and self.r == self.N


def hidden_products(data: ObservationData):
    """Return ``(P12 P21, P12 P22 P21)`` computed from the first three
    observable blocks."""
    if data.K < 3:
        raise InsufficientData(
            f"need the first three observable blocks, got K={data.K}; "
            "the hidden-to-hidden block is invisible in fewer steps"
        )
    p1, p2, p3 = (np.asarray(a, dtype=float) for a in data.mats[:3])
    if any(not np.isfinite(a).all() for a in (p1, p2, p3)):
        raise InsufficientData("observation data has undefined entries")
    g2 = p2 - p1 @ p1
    g3 = p3 - p1 @ p2 - p2 @ p1 + p1 @ p1 @ p1
    return g2, g3


def assemble_canonical(p11, g3, r1, r2, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Block matrix ``[[P11, R1], [R2, R1^+ G3 R2^+]]``."""
    q22 = pseudoinverse(r1, tol) @ g3 @ pseudoinverse(r2, tol)
    return np.block([[p11, r1], [r2, q22]])


def recover_canonical(data: ObservationData, tol: float = DEFAULT_RANK_TOL) -> CanonicalRepresentative:
    """Canonical representative of the gauge class fixed by the data.

    ``P12 P21`` is factored as ``R1 R2`` (balanced truncated SVD) and the
    hidden block is ``R1^+ (P12 P22 P21) R2^+``. Under the rank condition
    the result equals ``(Id + A) P (Id + A^-1)`` for an invertible hidden
    gauge ``A``.
    """
    g2, g3 = hidden_products(data)
    r1, r2, r = full_rank_factorization(g2, tol)
    gap = singular_gap(g2, r)
    if gap < 10.0:
        warnings.warn(
            f"rank cutoff at r={r} has a spectral gap of only {gap:.3g}",
            SpectralGapWarning,
            stacklevel=2,
        )
    p11 = np.asarray(data.mats[0], dtype=float)
    q = assemble_canonical(p11, g3, r1, r2, tol)
    return CanonicalRepresentative(N=data.N, r=r, Q=q, R1=r1, R2=r2)


def recovered_vertex_count(rep: CanonicalRepresentative) -> int:
    """``N + r``; exact under the rank condition, otherwise a lower bound."""
    return rep.N + rep.r


def verify_redundancy(P, Q, N: int, Kmax: int = 10) -> float:
    """Largest max-abs gap between the observable blocks of ``P**k`` and
    ``Q**k`` over ``k = 1..Kmax``. The two matrices may differ in size."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if N > min(P.shape[0], Q.shape[0]):
        raise DimensionMismatch("observable count exceeds matrix size")
    worst = 0.0
    pk, qk = P.copy(), Q.copy()
    for k in range(1, Kmax + 1):
        if k > 1:
            pk = pk @ P
            qk = qk @ Q
        worst = max(worst, float(np.abs(pk[:N, :N] - qk[:N, :N]).max(initial=0.0)))
    return worst


def rank_signal_to_noise(data: ObservationData, batch_data: list) -> np.ndarray:
    """Per singular value of ``P12 P21``, its size over the batch-means
    noise level in the complement of the leading directions.

    Entry ``k`` compares ``sigma_{k+1}`` with the standard error of the
    estimate projected onto singular directions ``k+1, k+2, ...``; values
    near 1 or below mean that direction is not resolved by the data.
    """
    g2, _ = hidden_products(data)
    stack = np.array([hidden_products(b)[0] for b in batch_data])
    u, s, vt = np.linalg.svd(g2)
    out = np.empty(len(s))
    for k in range(len(s)):
        proj = np.einsum("ij,bjk,kl->bil", u[:, k:].T, stack, vt[k:].T)
        noise = np.linalg.norm(proj.std(axis=0, ddof=1)) / np.sqrt(len(batch_data))
        out[k] = s[k] / noise if noise > 0 else np.inf
    return out


def factorization_gauge(P, N: int, r1: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """The hidden map ``A = R1^+ P12`` linking ``P`` to the canonical form."""
    _, p12, _, _ = blocks(P, N)
    return pseudoinverse(r1, tol) @ p12


def gauge_transform_pinv(P, N: int, A: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """``(Id_N + A) P (Id_N + A^+)`` for a possibly rectangular ``A``."""
    P = np.asarray(P, dtype=float)
    left = np.zeros((N + A.shape[0], P.shape[0]))
    left[:N, :N] = np.eye(N)
    left[N:, N:] = A
    ap = pseudoinverse(A, tol)
    right = np.zeros((P.shape[0], N + A.shape[0]))
    right[:N, :N] = np.eye(N)
    right[N:, N:] = ap
    return left @ P @ right


def insufficiency_witness(P, N: int, eps: float = 1e-2):
    """Second matrix agreeing with ``P`` on every block except the hidden
    one, whose rows are shifted by a zero-sum perturbation.

    The first two observable blocks of the powers coincide exactly, the
    third generically does not. Requires two hidden vertices or more and
    enough mass in ``P22`` to keep entries nonnegative.
    """
    P = np.asarray(P, dtype=float)
    m = P.shape[0] - N
    if m < 2:
        raise DimensionMismatch("need at least two hidden vertices")
    shift = np.zeros((m, m))
    for i in range(m):
        shift[i, i] = eps
        shift[i, (i + 1) % m] = -eps
    p2 = P.copy()
    p2[N:, N:] += shift
    if (p2 < 0).any():
        raise ValueError("perturbation too large for the hidden block")
    return p2
