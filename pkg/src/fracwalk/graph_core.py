"""Graphs with an observable vertex prefix, hop metric and admissibility.

Vertices are the integers ``0..n-1``. The observable set is always the
prefix ``0..observable-1``; the remaining ids are hidden.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DisconnectedGraph,
    InvalidAnchor,
    InvalidGraph,
    TooManyHiddenVertices,
    VertexOutOfRange,
)
from .linalg import DEFAULT_RANK_TOL, numerical_rank


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on ``n`` vertices.

    ``edges`` may be given as any iterable of pairs; it is normalised to a
    frozenset of sorted tuples. Self-loops and repeated edges raise
    :class:`InvalidGraph`. Connectivity is not enforced here, it is checked
    by :func:`all_pairs_distances` (and therefore by every operation that
    needs the metric).
    """

    n: int
    observable: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidGraph(f"vertex count must be positive, got {self.n}")
        if not 0 <= self.observable <= self.n:
            raise InvalidGraph(
                f"observable count {self.observable} outside [0, {self.n}]"
            )
        seen = set()
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise InvalidGraph(f"self-loop at vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise InvalidGraph(f"edge {(i, j)} references a vertex outside [0, {self.n})")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise InvalidGraph(f"duplicate edge {key}")
            seen.add(key)
        object.__setattr__(self, "edges", frozenset(seen))

    @property
    def hidden(self) -> int:
        return self.n - self.observable

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def neighbours(self) -> list[list[int]]:
        adj = [[] for _ in range(self.n)]
        for i, j in self.sorted_edges():
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def degree(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg


@dataclass(frozen=True)
class AdmissibilityReport:
    a1_ok: bool
    a1_rank: int
    a2_ok: bool
    leaf_set: frozenset
    max_leaf_eccentricity: int


def path_graph(n: int, observable: int) -> Graph:
    return Graph(n, observable, [(i, i + 1) for i in range(n - 1)])


def star_graph(n: int, observable: int) -> Graph:
    """Star with centre 0 and leaves ``1..n-1``."""
    return Graph(n, observable, [(0, i) for i in range(1, n)])


def complete_graph(n: int, observable: int) -> Graph:
    return Graph(n, observable, [(i, j) for i in range(n) for j in range(i + 1, n)])


def cycle_graph(n: int, observable: int) -> Graph:
    return Graph(n, observable, [(i, (i + 1) % n) for i in range(n)])


def all_pairs_distances(g: Graph) -> np.ndarray:
    """Hop-count distance matrix by breadth-first search from every vertex.

    Raises
    ------
    DisconnectedGraph
        If some pair of vertices is not joined by a path.
    """
    adj = g.neighbours()
    d = np.full((g.n, g.n), -1, dtype=np.int64)
    for src in range(g.n):
        row = d[src]
        row[src] = 0
        queue = deque([src])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if row[w] < 0:
                    row[w] = row[v] + 1
                    queue.append(w)
        if (row < 0).any():
            missing = int(np.flatnonzero(row < 0)[0])
            raise DisconnectedGraph(f"vertex {missing} unreachable from {src}")
    return d


def is_connected(g: Graph) -> bool:
    try:
        all_pairs_distances(g)
    except DisconnectedGraph:
        return False
    return True


def leaf_set(g: Graph) -> frozenset:
    """Vertices with exactly one neighbour."""
    return frozenset(int(v) for v in np.flatnonzero(g.degree() == 1))


def eccentricity(g: Graph, x: int, distances: np.ndarray | None = None) -> int:
    if not 0 <= x < g.n:
        raise VertexOutOfRange(f"vertex {x} outside [0, {g.n})")
    d = all_pairs_distances(g) if distances is None else distances
    return int(d[x].max())


def distance_kernel_block(d: np.ndarray, observable: int, alpha: float) -> np.ndarray:
    """Observable-by-hidden block of ``d(x, y)**(-alpha)``."""
    block = d[:observable, observable:].astype(float)
    return block ** (-alpha)


def check_admissibility(
    g: Graph, alpha: float, rank_tol: float = DEFAULT_RANK_TOL
) -> AdmissibilityReport:
    """Evaluate both admissibility conditions.

    The rank condition is tested on the conductivity-free distance kernel
    between observable rows and hidden columns; rescaling rows and columns
    by positive weights (which is all the conductivity and normalisation
    do) cannot change its rank.
    """
    d = all_pairs_distances(g)
    m = g.hidden
    rank = numerical_rank(distance_kernel_block(d, g.observable, alpha), rank_tol) if m else 0
    leaves = leaf_set(g)
    max_ecc = max((int(d[v].max()) for v in leaves), default=0)
    return AdmissibilityReport(
        a1_ok=rank == m,
        a1_rank=rank,
        a2_ok=len(leaves) >= 2 and max_ecc > 3,
        leaf_set=leaves,
        max_leaf_eccentricity=max_ecc,
    )


def generate_admissible_graph(
    core: Graph,
    attachments: list[tuple[Graph, int]],
    alpha: float,
    seed: int | None = None,
) -> Graph:
    """Attach one observable graph to every vertex of a hidden core.

    Each attachment ``(J_i, z_i)`` is joined to core vertex ``i`` by the edge
    ``{i, z_i}``. Observable ids come first (attachments in order), then the
    core vertices. When every core vertex has its own attachment, the
    kernel block restricted to the anchor columns has unit diagonal and
    off-diagonal entries at most ``2**-alpha``, so ``M < 1 + 2**alpha``
    makes it strictly diagonally dominant and the rank condition holds.

    ``seed`` optionally shuffles ids inside the observable and inside the
    hidden block; ``None`` keeps the construction order.
    """
    m = core.n
    if len(attachments) != m:
        raise InvalidGraph(f"core has {m} vertices but {len(attachments)} attachments were given")
    if m >= 1 + 2.0**alpha:
        raise TooManyHiddenVertices(
            f"hidden count {m} must satisfy M < 1 + 2**alpha = {1 + 2.0**alpha:g}"
        )
    offsets = []
    total = 0
    for j, z in attachments:
        if not 0 <= z < j.n:
            raise InvalidAnchor(f"anchor {z} outside [0, {j.n})")
        if not is_connected(j):
            raise DisconnectedGraph("attachment graph is not connected")
        offsets.append(total)
        total += j.n
    n_obs = total
    edges = []
    for (j, z), off in zip(attachments, offsets):
        edges.extend((a + off, b + off) for a, b in j.sorted_edges())
    edges.extend((a + n_obs, b + n_obs) for a, b in core.sorted_edges())
    edges.extend((n_obs + i, z + off) for i, ((_, z), off) in enumerate(zip(attachments, offsets)))

    if seed is not None:
        rng = np.random.default_rng(seed)
        perm = np.concatenate([rng.permutation(n_obs), n_obs + rng.permutation(m)])
        edges = [(int(perm[a]), int(perm[b])) for a, b in edges]

    g = Graph(n_obs + m, n_obs, edges)
    all_pairs_distances(g)
    return g


def random_tree(n: int, rng: np.random.Generator) -> Graph:
    """Uniform random recursive tree: vertex ``k`` joins a random earlier one."""
    return Graph(n, n, [(k, int(rng.integers(k))) for k in range(1, n)])


def random_connected_graph(
    n: int, rng: np.random.Generator, extra_edge_prob: float = 0.2, observable: int | None = None
) -> Graph:
    """Random tree plus independent extra edges."""
    edges = {(int(rng.integers(k)), k) for k in range(1, n)}
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < extra_edge_prob:
                edges.add((i, j))
    return Graph(n, n if observable is None else observable, sorted(edges))


def random_admissible_graph(
    rng: np.random.Generator,
    alpha: float,
    max_vertices: int = 25,
    max_hidden: int | None = None,
    require_a2: bool = True,
) -> Graph:
    """Random instance of the attachment construction.

    The core is a random connected graph; attachments are random trees
    anchored at a random vertex. Draws are repeated until the result has
    at most ``max_vertices`` vertices, passes the rank condition and, if
    requested, the leaf condition.
    """
    limit = int(np.ceil(1 + 2.0**alpha)) - 1
    if max_hidden is not None:
        limit = min(limit, max_hidden)
    limit = max(1, min(limit, max_vertices // 2))
    while True:
        m = int(rng.integers(1, limit + 1))
        core = random_connected_graph(m, rng, extra_edge_prob=0.4)
        budget = max_vertices - m
        if budget < m:
            continue
        sizes = [1] * m
        for _ in range(int(rng.integers(0, budget - m + 1))):
            sizes[int(rng.integers(m))] += 1
        attachments = []
        for s in sizes:
            tree = random_tree(s, rng)
            attachments.append((tree, int(rng.integers(s))))
        g = generate_admissible_graph(core, attachments, alpha, seed=int(rng.integers(2**31)))
        rep = check_admissibility(g, alpha)
        if rep.a1_ok and (rep.a2_ok or not require_a2):
            return g
