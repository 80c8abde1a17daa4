"""Monte-Carlo walks, their observable record and empirical estimates of the
observable blocks of ``P**k``.

Randomness comes from ``numpy.random.default_rng(seed)`` (PCG64); the seed
fully determines every trajectory.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import EmptyObservableSet, InsufficientData, InvalidStart
from .walk_model import ObservationData, TransitionMatrix

HIDDEN = -1
DEFAULT_BURN_IN = 1000


@dataclass(frozen=True)
class ObservationStream:
    """Observable record of a walk: vertex id when seen, ``HIDDEN`` otherwise."""

    steps: np.ndarray
    N: int

    def __len__(self) -> int:
        return len(self.steps)

    def to_lines(self) -> list[str]:
        return ["-" if s == HIDDEN else str(int(s)) for s in self.steps]

    @classmethod
    def from_lines(cls, lines, N: int) -> "ObservationStream":
        steps = [HIDDEN if ln.strip() == "-" else int(ln) for ln in lines if ln.strip()]
        arr = np.asarray(steps, dtype=np.int64)
        if ((arr != HIDDEN) & ((arr < 0) | (arr >= N))).any():
            raise ValueError(f"stream contains ids outside [0, {N})")
        return cls(steps=arr, N=N)


@dataclass(frozen=True)
class EmpiricalData:
    """Estimated observation data.

    Rows of vertices never seen inside the counting window are NaN in
    every estimate and listed in ``undefined_rows``.
    """

    estimate: ObservationData
    visit_counts: np.ndarray
    K: int

    @property
    def undefined_rows(self) -> list[int]:
        return [int(v) for v in np.flatnonzero(self.visit_counts == 0)]


def simulate_walk(P, x0: int, T: int, seed=None, burn_in: int = 0) -> np.ndarray:
    """Trajectory of ``T + 1`` states.

    The chain starts at ``x0``, runs ``burn_in`` discarded steps, then the
    returned window begins (so with ``burn_in=0`` the first entry is ``x0``).
    """
    if isinstance(P, TransitionMatrix):
        P = P.P
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    if not 0 <= x0 < n:
        raise InvalidStart(f"start vertex {x0} outside [0, {n})")
    if T < 1:
        raise ValueError("T must be at least 1")
    rng = np.random.default_rng(seed)
    cum = [list(row) for row in np.cumsum(P, axis=1)]
    last = n - 1
    total = burn_in + T
    u = rng.random(total).tolist()
    out = np.empty(T + 1, dtype=np.int64)
    state = x0
    for t in range(burn_in):
        state = min(bisect_right(cum[state], u[t] * cum[state][-1]), last)
    out[0] = state
    for t in range(T):
        state = min(bisect_right(cum[state], u[burn_in + t] * cum[state][-1]), last)
        out[t + 1] = state
    return out


def observe(traj, N: int) -> ObservationStream:
    if N <= 0:
        raise EmptyObservableSet("observable set is empty")
    traj = np.asarray(traj, dtype=np.int64)
    return ObservationStream(steps=np.where(traj < N, traj, HIDDEN), N=N)


def estimate_observation_data(stream: ObservationStream, K: int) -> EmpiricalData:
    """Empirical ``(P**k)_11`` for ``k = 1..K``.

    Every lag uses the same window of start times ``t <= T - K``, so one
    visit-count vector serves as denominator for all of them.
    """
    s = np.asarray(stream.steps, dtype=np.int64)
    N = stream.N
    if K < 1:
        raise InsufficientData("horizon K must be at least 1")
    if len(s) <= K:
        raise InsufficientData(f"stream of length {len(s)} too short for K={K}")
    window = len(s) - K
    start = s[:window]
    seen = start != HIDDEN
    counts = np.bincount(start[seen], minlength=N)
    mats = []
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(1, K + 1):
            end = s[k : k + window]
            both = seen & (end != HIDDEN)
            joint = np.bincount(start[both] * N + end[both], minlength=N * N).reshape(N, N)
            est = joint / counts[:, None]
            est[counts == 0] = np.nan
            mats.append(est)
    return EmpiricalData(
        estimate=ObservationData(N=N, mats=tuple(mats)), visit_counts=counts, K=K
    )


def batch_observation_data(stream: ObservationStream, K: int, batches: int = 20) -> list:
    """Estimates from ``batches`` contiguous, equal chunks of the stream.

    Their spread is a batch-means measure of the sampling error of the
    full-stream estimate.
    """
    s = np.asarray(stream.steps)
    size = len(s) // batches
    return [
        estimate_observation_data(ObservationStream(s[i * size : (i + 1) * size], stream.N), K).estimate
        for i in range(batches)
    ]


def simulate_observations(
    P: TransitionMatrix, T: int, K: int = 3, seed=None, x0: int = 0, burn_in: int = DEFAULT_BURN_IN
):
    """Simulate, observe and estimate in one go; returns ``(stream, data)``."""
    traj = simulate_walk(P, x0, T, seed, burn_in=burn_in)
    stream = observe(traj, P.observable)
    return stream, estimate_observation_data(stream, K)
