"""Recover hop distances, edges and vertex weights from a kernel
``f(x, y) = sigma1(x) sigma2(y) / d(x, y)`` known off the diagonal.

The pipeline: pair ratios ``R_ab`` expose leaf/neighbour pairs as the only
non-integer values; one sufficiently eccentric pair decides which side is
the leaf; perfect-square tests propagate that to every pair; leaf rows of
the distance matrix follow, then every other row; the weights come from a
rank-one factorisation of ``f * d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegeneratePair,
    DegenerateTriple,
    MetricViolation,
    NonIntegerDistance,
    NonpositiveEntry,
    NotClassifiable,
    RankDefect,
)
from .graph_core import Graph, all_pairs_distances

DEFAULT_INT_TOL = 1e-6
TIE_TOL = 1e-9
SCALE_CONVENTION = "sigma1[0] = 1"


@dataclass(frozen=True)
class PairStatistics:
    R: np.ndarray
    Y: tuple
    leaves: frozenset
    neighbours: frozenset
    partner: dict
    decided_pair: tuple
    argmin_set: frozenset
    argmax_set: frozenset
    z_set: frozenset


@dataclass(frozen=True)
class ReconstructionResult:
    distances: np.ndarray
    edges: list
    leaves: frozenset
    neighbours: frozenset
    sigma1: np.ndarray
    sigma2: np.ndarray
    scale_convention: str = SCALE_CONVENTION


def as_kernel(f) -> np.ndarray:
    f = np.array(f, dtype=float)
    if f.ndim != 2 or f.shape[0] != f.shape[1]:
        raise NonpositiveEntry("kernel must be a square matrix")
    off = ~np.eye(f.shape[0], dtype=bool)
    if not (f[off] > 0).all():
        raise NonpositiveEntry("kernel must be positive off the diagonal")
    np.fill_diagonal(f, 0.0)
    return f


def kernel_from_interaction(C, alpha: float, g1=None, g2=None) -> np.ndarray:
    """``(g1(x) C(x, y) g2(y))**(1/alpha)`` off the diagonal, zero on it."""
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    g1 = np.ones(n) if g1 is None else np.asarray(g1, dtype=float)
    g2 = np.ones(n) if g2 is None else np.asarray(g2, dtype=float)
    if not ((g1 > 0).all() and (g2 > 0).all()):
        raise NonpositiveEntry("gauge weights must be positive")
    w = g1[:, None] * C * g2[None, :]
    off = ~np.eye(n, dtype=bool)
    if not (w[off] > 0).all():
        raise NonpositiveEntry("interaction must be positive off the diagonal")
    f = np.zeros_like(w)
    f[off] = w[off] ** (1.0 / alpha)
    return f


def f_ratio(fm, a: int, b: int, c: int) -> np.ndarray:
    """``f(a,x) f(b,c) / (f(b,x) f(a,c))`` for every x, NaN at ``a`` and ``b``."""
    fm = np.asarray(fm, dtype=float)
    n = fm.shape[0]
    if len({a, b, c}) < 3 or not all(0 <= v < n for v in (a, b, c)):
        raise DegenerateTriple(f"need three distinct vertices, got {(a, b, c)}")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = fm[a] * fm[b, c] / (fm[b] * fm[a, c])
    out[[a, b]] = np.nan
    return out


def _default_third(n: int, a: int, b: int) -> int:
    return next(v for v in range(n) if v not in (a, b))


def pair_ratio(fm, a: int, b: int, c: int | None = None) -> float:
    """``max F_abc / min F_abc``; independent of ``c``."""
    fm = np.asarray(fm, dtype=float)
    n = fm.shape[0]
    if a == b or n < 3:
        raise DegeneratePair(f"pair {(a, b)} leaves no third vertex")
    c = _default_third(n, a, b) if c is None else c
    F = f_ratio(fm, a, b, c)
    return float(np.nanmax(F) / np.nanmin(F))


def pair_ratio_matrix(fm) -> np.ndarray:
    """All ``R_ab`` at once, with unit diagonal.

    Uses ``F_abc(x) proportional to f(a,x) / f(b,x)``; the constant factor
    cancels in the ratio.
    """
    fm = np.asarray(fm, dtype=float)
    n = fm.shape[0]
    if n < 3:
        raise DegeneratePair("need at least three vertices")
    R = np.ones((n, n))
    for a in range(n):
        with np.errstate(divide="ignore", invalid="ignore"):
            h = fm[a][None, :] / fm
        mask = np.ones((n, n), dtype=bool)
        mask[:, a] = False
        mask[np.arange(n), np.arange(n)] = False
        hi = np.where(mask, h, -np.inf).max(axis=1)
        lo = np.where(mask, h, np.inf).min(axis=1)
        R[a] = hi / lo
        R[a, a] = 1.0
    return R


def is_integer(x: float, tol: float = DEFAULT_INT_TOL) -> bool:
    return abs(x - round(x)) <= tol * max(1.0, abs(x))


def is_perfect_square(x: float, tol: float = DEFAULT_INT_TOL) -> bool:
    if not is_integer(x, tol):
        return False
    k = int(round(x))
    return k >= 0 and math.isqrt(k) ** 2 == k


def _argmax_set(F: np.ndarray) -> frozenset:
    top = np.nanmax(F)
    return frozenset(int(v) for v in np.flatnonzero(F >= top * (1 - TIE_TOL)))


def _argmin_set(F: np.ndarray) -> frozenset:
    low = np.nanmin(F)
    return frozenset(int(v) for v in np.flatnonzero(F <= low * (1 + TIE_TOL)))


def _first_is_neighbour(fm: np.ndarray, a: int, b: int):
    """Decide the roles in a leaf/neighbour pair ``{a, b}``.

    Returns ``(a_is_neighbour, argmin_set, argmax_set, Z)``.
    """
    c = _default_third(fm.shape[0], a, b)
    F = f_ratio(fm, a, b, c)
    lows = _argmin_set(F)
    highs = _argmax_set(F)
    x_low = min(lows)
    z = set()
    for y in highs:
        if y == x_low:
            continue
        z |= _argmax_set(f_ratio(fm, y, x_low, a))
    return bool({a, b} & z), lows, highs, frozenset(z)


def classify_pairs(fm, tol_int: float = DEFAULT_INT_TOL) -> PairStatistics:
    """Split the vertices of non-integer-ratio pairs into leaves and their
    neighbours.

    Raises
    ------
    NotClassifiable
        If no leaf/neighbour pair has ``R > 4/3`` (no leaf of eccentricity
        above 3), or if the inferred roles contradict each other.
    """
    fm = as_kernel(fm)
    n = fm.shape[0]
    R = pair_ratio_matrix(fm)
    Y = tuple((a, b) for a in range(n) for b in range(a + 1, n) if not is_integer(R[a, b], tol_int))
    threshold = (4.0 / 3.0) * (1.0 + tol_int)
    candidates = sorted((p for p in Y if R[p] > threshold), key=lambda p: (-R[p], p))
    if not candidates:
        raise NotClassifiable("no leaf/neighbour pair with ratio above 4/3")

    a, b = candidates[0]
    a_nb, lows, highs, z = _first_is_neighbour(fm, a, b)
    leaf0, nb0 = (b, a) if a_nb else (a, b)

    role = {leaf0: "leaf", nb0: "neighbour"}
    for v in sorted({v for p in Y for v in p} - {leaf0, nb0}):
        sq_leaf = is_perfect_square(R[leaf0, v], tol_int)
        sq_nb = is_perfect_square(R[nb0, v], tol_int)
        if sq_leaf == sq_nb:
            raise NotClassifiable(f"vertex {v} has ambiguous role")
        role[v] = "leaf" if sq_leaf else "neighbour"

    partner = {}
    for p, q in Y:
        if {role[p], role[q]} != {"leaf", "neighbour"}:
            raise NotClassifiable(f"pair {(p, q)} is not a leaf/neighbour pair")
        leaf, nb = (p, q) if role[p] == "leaf" else (q, p)
        if partner.get(leaf, nb) != nb:
            raise NotClassifiable(f"leaf {leaf} paired with two neighbours")
        partner[leaf] = nb

    for p, q in candidates[1:]:
        p_nb = _first_is_neighbour(fm, p, q)[0]
        if (role[p] == "neighbour") != p_nb:
            raise NotClassifiable(f"pair {(p, q)} disagrees with the propagated roles")

    leaves = frozenset(v for v, r in role.items() if r == "leaf")
    return PairStatistics(
        R=R,
        Y=Y,
        leaves=leaves,
        neighbours=frozenset(role) - leaves,
        partner=partner,
        decided_pair=(a, b),
        argmin_set=lows,
        argmax_set=highs,
        z_set=z,
    )


def _round_distance(v: float, tol: float, what: str) -> int:
    if not np.isfinite(v) or v < 0.5 or not is_integer(v, tol):
        raise NonIntegerDistance(f"{what} = {v!r} is not an integer distance")
    return int(round(v))


def recover_distances(fm, stats: PairStatistics, tol_int: float = DEFAULT_INT_TOL) -> np.ndarray:
    """Full hop-distance matrix from the kernel and the leaf split."""
    fm = as_kernel(fm)
    n = fm.shape[0]
    leaves = sorted(stats.leaves)
    if len(leaves) < 2:
        raise NotClassifiable("need at least two leaves to recover distances")
    D = np.full((n, n), -1, dtype=np.int64)
    np.fill_diagonal(D, 0)

    leaf_leaf = {}
    for i, a in enumerate(leaves):
        for c in leaves[i + 1 :]:
            d = 1.0 + math.sqrt(max(stats.R[a, c], 0.0))
            leaf_leaf[a, c] = leaf_leaf[c, a] = _round_distance(d, tol_int, f"d({a},{c})")

    for a in leaves:
        b = stats.partner[a]
        c = next(v for v in leaves if v != a)
        dac = leaf_leaf[a, c]
        rho = f_ratio(fm, a, b, c) * (dac - 1) / dac
        for x in range(n):
            if x in (a, b):
                continue
            if rho[x] >= 1.0:
                raise NonIntegerDistance(f"d({a},{x}) undefined (ratio {rho[x]!r})")
            D[a, x] = _round_distance(1.0 / (1.0 - rho[x]), tol_int, f"d({a},{x})")
        D[a, b] = 1

    a, c = leaves[0], leaves[1]
    for y in range(n):
        if y in stats.leaves:
            continue
        F = f_ratio(fm, a, y, c)
        for x in range(n):
            if x == y:
                continue
            if x == a:
                D[y, x] = D[a, y]
                continue
            v = F[x] * D[c, y] * D[a, x] / D[a, c]
            D[y, x] = _round_distance(v, tol_int, f"d({y},{x})")

    if not (D == D.T).all():
        raise MetricViolation("recovered distances are not symmetric")
    for (p, q), v in leaf_leaf.items():
        if D[p, q] != v:
            raise MetricViolation(f"leaf distance d({p},{q}) inconsistent")
    g = Graph(n, n, edges_from_distances(D))
    try:
        bfs = all_pairs_distances(g)
    except Exception as exc:
        raise MetricViolation(f"unit-distance edges do not connect the graph: {exc}") from exc
    if not (bfs == D).all():
        raise MetricViolation("recovered matrix is not the hop metric of its own edges")
    return D


def edges_from_distances(D) -> list[tuple[int, int]]:
    D = np.asarray(D)
    ii, jj = np.nonzero(np.triu(D == 1, k=1))
    return [(int(i), int(j)) for i, j in zip(ii, jj)]


def rank_one_factor(sigma, tol: float = 1e-8):
    """Split ``sigma = s1 s2^T`` with ``s1[0] = 1``.

    Raises
    ------
    RankDefect
        If the relative max-abs residual of the best rank-one fit exceeds ``tol``.
    """
    sigma = np.asarray(sigma, dtype=float)
    u, s, vt = np.linalg.svd(sigma)
    s1 = u[:, 0] / u[0, 0]
    s2 = s[0] * vt[0] * u[0, 0]
    resid = np.abs(sigma - np.outer(s1, s2)).max() / np.abs(sigma).max()
    if resid > tol:
        raise RankDefect(f"rank-one residual {resid:.3g} exceeds {tol:g}")
    return s1, s2


def sigma_matrix(fm, D) -> np.ndarray:
    """``f * d`` off the diagonal, completed on the diagonal through
    ``S(x,x) = S(y,x) S(x,z) / S(y,z)`` with ``y, z`` the two smallest ids
    other than ``x``."""
    fm = as_kernel(fm)
    D = np.asarray(D, dtype=float)
    n = fm.shape[0]
    S = fm * D
    for x in range(n):
        y, z = [v for v in range(n) if v != x][:2]
        S[x, x] = S[y, x] * S[x, z] / S[y, z]
    return S


def recover_sigma(fm, D, tol: float = 1e-8):
    """Vertex weights ``(sigma1, sigma2)`` with ``sigma1[0] = 1``."""
    if np.asarray(fm).shape[0] < 3:
        raise DegeneratePair("need at least three vertices")
    return rank_one_factor(sigma_matrix(fm, D), tol)


def reconstruct_full(fm, tol_int: float = DEFAULT_INT_TOL) -> ReconstructionResult:
    fm = as_kernel(fm)
    stats = classify_pairs(fm, tol_int)
    D = recover_distances(fm, stats, tol_int)
    s1, s2 = recover_sigma(fm, D)
    return ReconstructionResult(
        distances=D,
        edges=edges_from_distances(D),
        leaves=stats.leaves,
        neighbours=stats.neighbours,
        sigma1=s1,
        sigma2=s2,
    )


def conductivity_from_sigma(result: ReconstructionResult, alpha: float) -> np.ndarray:
    """``(sigma1 * sigma2)**alpha``, proportional to the conductivity when
    the kernel came from an interaction matrix with constant gauges."""
    return (result.sigma1 * result.sigma2) ** alpha


def ratio_spread(a, b) -> float:
    """``max(a/b) / min(a/b) - 1``: zero iff ``a`` and ``b`` are proportional."""
    q = np.asarray(a, dtype=float) / np.asarray(b, dtype=float)
    return float(q.max() / q.min() - 1.0)
