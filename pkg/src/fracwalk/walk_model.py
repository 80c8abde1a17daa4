"""Fractional conductivity interaction matrices, transition matrices and
exact partial observation data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InsufficientData, NonpositiveConductivity, ZeroRowSum
from .graph_core import Graph, all_pairs_distances

DEFAULT_ALPHA = 2.5
DEFAULT_THETA = 1.0


@dataclass(frozen=True)
class InteractionMatrix:
    C: np.ndarray
    alpha: float
    theta: float
    observable: int


@dataclass(frozen=True)
class TransitionMatrix:
    P: np.ndarray
    observable: int
    m: np.ndarray

    @property
    def n(self) -> int:
        return self.P.shape[0]


@dataclass(frozen=True)
class ObservationData:
    """Observable blocks of ``P, P**2, ..., P**K``; ``mats[k-1]`` is step k."""

    N: int
    mats: tuple

    @property
    def K(self) -> int:
        return len(self.mats)


def _conductivity(gamma, n: int) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=float).ravel()
    if gamma.shape != (n,):
        raise DimensionMismatch(f"conductivity has length {gamma.size}, graph has {n} vertices")
    if not (gamma > 0).all():
        raise NonpositiveConductivity("conductivity must be positive")
    return gamma


def jump_weights(g: Graph, gamma, alpha: float, distances: np.ndarray | None = None) -> np.ndarray:
    """Off-diagonal kernel ``sqrt(gamma(x) gamma(y)) / d(x, y)**alpha`` with a
    zero diagonal."""
    d = all_pairs_distances(g) if distances is None else distances
    root = np.sqrt(_conductivity(gamma, g.n))
    dist = d.astype(float)
    np.fill_diagonal(dist, 1.0)
    w = np.outer(root, root) / dist**alpha
    np.fill_diagonal(w, 0.0)
    return w


def build_interaction(
    g: Graph, gamma=None, alpha: float = DEFAULT_ALPHA, theta: float = DEFAULT_THETA
) -> InteractionMatrix:
    """Symmetric interaction matrix with staying weight ``theta * gamma(x)``.

    ``gamma=None`` means unit conductivity.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    gamma = np.ones(g.n) if gamma is None else _conductivity(gamma, g.n)
    c = jump_weights(g, gamma, alpha)
    c[np.diag_indices(g.n)] = theta * gamma
    return InteractionMatrix(C=c, alpha=float(alpha), theta=float(theta), observable=g.observable)


def normalize(ic: InteractionMatrix | np.ndarray, observable: int | None = None) -> TransitionMatrix:
    """Row-normalise an interaction matrix into a transition matrix."""
    if isinstance(ic, InteractionMatrix):
        c = ic.C
        observable = ic.observable if observable is None else observable
    else:
        c = np.asarray(ic, dtype=float)
        observable = c.shape[0] if observable is None else observable
    m = c.sum(axis=1)
    if not (m > 0).all():
        raise ZeroRowSum(f"row {int(np.flatnonzero(m <= 0)[0])} has nonpositive sum")
    return TransitionMatrix(P=c / m[:, None], observable=observable, m=m)


def transition_matrix(
    g: Graph, gamma=None, alpha: float = DEFAULT_ALPHA, theta: float = DEFAULT_THETA
) -> TransitionMatrix:
    return normalize(build_interaction(g, gamma, alpha, theta))


def blocks(P, N: int | None = None):
    """Split into ``(P11, P12, P21, P22)`` along the observable prefix."""
    if isinstance(P, TransitionMatrix):
        N = P.observable if N is None else N
        P = P.P
    P = np.asarray(P)
    if N is None or not 0 <= N <= P.shape[0]:
        raise DimensionMismatch(f"observable count {N} invalid for size {P.shape[0]}")
    return P[:N, :N], P[:N, N:], P[N:, :N], P[N:, N:]


def reassemble(p11, p12, p21, p22) -> np.ndarray:
    return np.block([[p11, p12], [p21, p22]])


def exact_observation_data(P, K: int, N: int | None = None) -> ObservationData:
    """Observable blocks of the first ``K`` dense powers of ``P``."""
    if isinstance(P, TransitionMatrix):
        N = P.observable if N is None else N
        P = P.P
    P = np.asarray(P, dtype=float)
    N = P.shape[0] if N is None else N
    if K < 1:
        raise InsufficientData("horizon K must be at least 1")
    mats = []
    power = np.eye(P.shape[0])
    for _ in range(K):
        power = power @ P
        mats.append(power[:N, :N].copy())
    return ObservationData(N=N, mats=tuple(mats))


def apply_fractional_conductivity(
    g: Graph, gamma, alpha: float, u, cns: float = 1.0
) -> np.ndarray:
    """``cns * sum_{y != x} sqrt(gamma(x) gamma(y)) (u(y) - u(x)) / d(x, y)**alpha``."""
    u = np.asarray(u, dtype=float).ravel()
    if u.shape != (g.n,):
        raise DimensionMismatch(f"u has length {u.size}, graph has {g.n} vertices")
    w = jump_weights(g, gamma, alpha)
    return cns * (w @ u - w.sum(axis=1) * u)


def apply_fractional_laplacian(g: Graph, alpha: float, u, cns: float = 1.0) -> np.ndarray:
    return apply_fractional_conductivity(g, np.ones(g.n), alpha, u, cns)
