"""Hidden-block gauge action and the conditions that single out genuine
transition matrices inside a gauge orbit."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConditionsViolated, DimensionMismatch, RankDeficient, SingularGauge
from .linalg import DEFAULT_RANK_TOL, numerical_rank, pseudoinverse

POSITIVE = "positive"
NONNEGATIVE = "nonnegative"
FAILS = "fails"


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the positivity / row-sum / transitivity checks.

    ``p3_residual`` is ``None`` when some off-diagonal entry vanishes and
    the ratio matrix ``P / P^T`` is undefined; such a report never passes.
    """

    p1: str
    p2_residual: float
    p3_residual: float | None
    overall: bool


class RecoveredInteraction(NamedTuple):
    C: np.ndarray
    m: np.ndarray
    anchor: int


def _hidden_size(P: np.ndarray, N: int) -> int:
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise DimensionMismatch("matrix must be square")
    if not 0 <= N <= P.shape[0]:
        raise DimensionMismatch(f"observable count {N} invalid for size {P.shape[0]}")
    return P.shape[0] - N


def _checked_gauge(A, m: int, tol: float) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float)) if m else np.zeros((0, 0))
    if A.shape != (m, m):
        raise DimensionMismatch(f"gauge must be {m}x{m}, got {A.shape}")
    if m and numerical_rank(A, tol) < m:
        raise SingularGauge("gauge element is not invertible")
    return A


def gauge_action(A, P, N: int, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """``(Id_N + A) P (Id_N + A^-1)``."""
    P = np.asarray(P, dtype=float)
    m = _hidden_size(P, N)
    A = _checked_gauge(A, m, tol)
    out = P.copy()
    if m == 0:
        return out
    a_inv = np.linalg.inv(A)
    out[N:, :] = A @ out[N:, :]
    out[:, N:] = out[:, N:] @ a_inv
    return out


def ratio_matrix(P) -> np.ndarray:
    """``P / P^T`` elementwise, with unit diagonal."""
    P = np.asarray(P, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        hat = P / P.T
    np.fill_diagonal(hat, 1.0)
    return hat


def transitivity_defect(hat: np.ndarray) -> float:
    """``max |H(i,k) H(k,j) - H(i,j)| / |H(i,j)|`` over all ordered triples."""
    worst = 0.0
    for k in range(hat.shape[0]):
        prod = np.outer(hat[:, k], hat[k, :])
        worst = max(worst, float((np.abs(prod - hat) / np.abs(hat)).max()))
    return worst


def check_conditions(P, strict_positive: bool = False, tol: float = 1e-10) -> ConditionReport:
    """Test positivity, row-stochasticity and transitivity of ``P / P^T``.

    With ``strict_positive=False`` a nonnegative matrix passes the
    positivity check (entries down to ``-tol`` count as zero, to absorb
    rounding). The transitivity check needs every off-diagonal entry
    nonzero.
    """
    P = np.asarray(P, dtype=float)
    _hidden_size(P, 0)
    if (P > 0).all():
        p1 = POSITIVE
    elif (P >= -tol).all():
        p1 = NONNEGATIVE
    else:
        p1 = FAILS
    p2 = float(np.abs(P.sum(axis=1) - 1.0).max())
    off = ~np.eye(P.shape[0], dtype=bool)
    if (P[off] != 0).all():
        p3 = transitivity_defect(ratio_matrix(P))
    else:
        p3 = None
    level_ok = p1 == POSITIVE or (p1 == NONNEGATIVE and not strict_positive)
    overall = level_ok and p2 <= tol and p3 is not None and p3 <= tol
    return ConditionReport(p1=p1, p2_residual=p2, p3_residual=p3, overall=overall)


def recover_interaction(P, tol: float = 1e-10) -> RecoveredInteraction:
    """Interaction matrix ``C = diag(m) P`` normalised so that ``m(0) = 1``.

    ``m(x) = P(0, x) / P(x, 0)``; the true interaction is ``lambda * C``
    for an unknown ``lambda > 0``.
    """
    P = np.asarray(P, dtype=float)
    report = check_conditions(P, strict_positive=False, tol=tol)
    if not report.overall:
        raise ConditionsViolated(f"matrix is not a normalised symmetric kernel: {report}")
    anchor = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        m = P[anchor, :] / P[:, anchor]
    m[anchor] = 1.0
    c = m[:, None] * P
    asym = float(np.abs(c - c.T).max())
    if asym > tol * max(1.0, float(np.abs(c).max())):
        raise ConditionsViolated(f"recovered interaction asymmetric by {asym:.3g}")
    return RecoveredInteraction(C=c, m=m, anchor=anchor)


def check_A_prime(A, Ptilde, N: int, tol: float = 1e-10) -> bool:
    """Whether ``(Id + A) Ptilde (Id + A^-1)`` stays row-stochastic, i.e.
    ``(1_N, A^-1 1_M)`` is fixed by ``Ptilde``."""
    Ptilde = np.asarray(Ptilde, dtype=float)
    m = _hidden_size(Ptilde, N)
    A = _checked_gauge(A, m, DEFAULT_RANK_TOL)
    v = np.ones(N + m)
    if m:
        v[N:] = np.linalg.solve(A, np.ones(m))
    return bool(np.abs(Ptilde @ v - v).max() <= tol)


def preserves_ones(A, tol: float = 1e-10) -> bool:
    """``A 1 = 1``; equivalent to :func:`check_A_prime` when ``Ptilde > 0``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return bool(np.abs(A.sum(axis=1) - 1.0).max(initial=0.0) <= tol)


def check_diagonal_preservation(a_diag, Ptilde, N: int, tol: float = 1e-10) -> ConditionReport:
    """Conditions on ``Ptilde`` conjugated by a positive diagonal gauge.

    Positivity and transitivity survive the conjugation; row sums
    generally do not.
    """
    a_diag = np.asarray(a_diag, dtype=float).ravel()
    if not (a_diag > 0).all():
        raise ValueError("diagonal gauge must be positive")
    Ptilde = np.asarray(Ptilde, dtype=float)
    P = gauge_action(np.diag(a_diag), Ptilde, N)
    strict = bool((Ptilde > 0).all())
    return check_conditions(P, strict_positive=strict, tol=tol)


def solve_gauge(P, Ptilde, N: int, tol: float = 1e-8, rank_tol: float = DEFAULT_RANK_TOL):
    """The unique hidden gauge ``A`` with ``P = (Id + A) Ptilde (Id + A^-1)``.

    ``A = P21 Ptilde21^+``. Returns ``None`` when the candidate does not
    reproduce ``P`` to within ``tol`` (max-abs).

    Raises
    ------
    RankDeficient
        If ``Ptilde21`` lacks full row rank, so that the gauge is not unique.
    """
    P = np.asarray(P, dtype=float)
    Ptilde = np.asarray(Ptilde, dtype=float)
    if P.shape != Ptilde.shape:
        return None
    m = _hidden_size(Ptilde, N)
    if m == 0:
        return np.zeros((0, 0)) if np.abs(P - Ptilde).max() <= tol else None
    pt21 = Ptilde[N:, :N]
    if numerical_rank(pt21, rank_tol) < m:
        raise RankDeficient("hidden-to-observable block lacks full row rank")
    A = P[N:, :N] @ pseudoinverse(pt21, rank_tol)
    try:
        candidate = gauge_action(A, Ptilde, N, rank_tol)
    except SingularGauge:
        return None
    if np.abs(candidate - P).max() > tol:
        return None
    return A
