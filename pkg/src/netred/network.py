"""Weighted undirected graphs, clustering partitions, and network generators.

Vertex indices are 1-based in every public type; matrix builders translate
to 0-based rows and columns internally.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationError, NotLaplacianError
from .sys2 import validate

_WS_RETRIES = 100  # regeneration attempts before giving up on connectivity


@dataclass(frozen=True)
class WeightedGraph:
    """Simple undirected graph with positive edge weights.

    Edges are canonicalized to ``(i, j, w)`` with ``i < j`` and sorted
    lexicographically; duplicates and self-loops are rejected.
    """

    n: int
    edges: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"vertex count must be positive, got {self.n}")
        canonical = []
        seen = set()
        for edge in self.edges:
            i, j, w = edge
            i, j, w = int(i), int(j), float(w)
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if i > j:
                i, j = j, i
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            if w <= 0 or not np.isfinite(w):
                raise ValueError(f"edge ({i}, {j}) has non-positive weight {w}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            canonical.append((i, j, w))
        canonical.sort()
        object.__setattr__(self, "edges", tuple(canonical))

    @property
    def n_edges(self):
        return len(self.edges)

    def is_connected(self):
        """Breadth-first connectivity check; single vertices count as connected."""
        if self.n == 1:
            return True
        adjacency = {i: [] for i in range(1, self.n + 1)}
        for i, j, _ in self.edges:
            adjacency[i].append(j)
            adjacency[j].append(i)
        seen = {1}
        stack = [1]
        while stack:
            for neighbor in adjacency[stack.pop()]:
                if neighbor not in seen:
                    seen.add(neighbor)
                    stack.append(neighbor)
        return len(seen) == self.n


@dataclass(frozen=True)
class ClusteringPartition:
    """Ordered list of disjoint non-empty vertex clusters covering 1..n."""

    clusters: tuple

    def __post_init__(self):
        canonical = []
        union = set()
        for cluster in self.clusters:
            members = tuple(sorted(int(v) for v in cluster))
            if not members:
                raise ValueError("clusters must be non-empty")
            if union & set(members):
                raise ValueError("clusters must be pairwise disjoint")
            union.update(members)
            canonical.append(members)
        n = len(union)
        if union != set(range(1, n + 1)):
            raise ValueError("clusters must cover exactly the vertices 1..n")
        object.__setattr__(self, "clusters", tuple(canonical))

    @property
    def n(self):
        return sum(len(c) for c in self.clusters)

    @property
    def r(self):
        return len(self.clusters)


@dataclass(frozen=True)
class CharacteristicMatrix:
    """Binary n-by-r matrix whose columns are cluster indicator vectors."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 2:
            raise ValueError("characteristic matrix must be 2-D")
        if not np.isin(p, (0.0, 1.0)).all():
            raise ValueError("characteristic matrix entries must be 0 or 1")
        if not (p.sum(axis=1) == 1.0).all():
            raise ValueError("every vertex must belong to exactly one cluster")
        if not (p.sum(axis=0) >= 1.0).all():
            raise ValueError("every cluster must contain at least one vertex")
        object.__setattr__(self, "p", p)


def incidence_matrix(graph):
    """Vertex-edge incidence matrix with +1 at the lower-indexed endpoint.

    Column k of the result describes edge k of the canonical edge list:
    +1 at its head (the lower vertex index), -1 at its tail.
    """
    r = np.zeros((graph.n, graph.n_edges))
    for k, (i, j, _) in enumerate(graph.edges):
        r[i - 1, k] = 1.0
        r[j - 1, k] = -1.0
    return r


def laplacian(graph):
    """Weighted graph Laplacian ``R @ diag(w) @ R.T`` assembled edge by edge."""
    lap = np.zeros((graph.n, graph.n))
    for i, j, w in graph.edges:
        a, b = i - 1, j - 1
        lap[a, a] += w
        lap[b, b] += w
        lap[a, b] -= w
        lap[b, a] -= w
    return lap


def graph_from_laplacian(lap, tol=None):
    """Reconstruct the weighted graph whose Laplacian is ``lap``.

    Every off-diagonal entry below ``-tol`` becomes an edge of weight
    ``-lap[i, j]``; entries within ``tol`` of zero are dropped.  ``tol``
    defaults to ``1e-12`` times the spectral norm of ``lap``.

    Raises
    ------
    NotLaplacianError
        On asymmetry, a positive off-diagonal entry beyond tolerance, or a
        row sum beyond ``1e-9`` times the spectral norm.
    """
    lap = np.asarray(lap, dtype=float)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {lap.shape}")
    n = lap.shape[0]
    scale = np.linalg.norm(lap, 2) if n else 0.0
    if tol is None:
        tol = 1e-12 * scale
    row_tol = 1e-9 * scale
    if n == 1:
        # a single-vertex graph has the zero Laplacian; scale-relative
        # tolerances degenerate here, so accept anything numerically tiny
        if abs(lap[0, 0]) > 1e-9:
            raise NotLaplacianError(
                f"1x1 Laplacian must be zero, got {lap[0, 0]:.3e}"
            )
        return WeightedGraph(1, ())
    asym = np.abs(lap - lap.T).max()
    if asym > max(tol, 1e-12 * scale):
        raise NotLaplacianError(f"matrix is asymmetric by {asym:.3e}")
    worst_row = np.abs(lap.sum(axis=1)).max()
    if worst_row > row_tol:
        raise NotLaplacianError(
            f"row sums reach {worst_row:.3e}, beyond tolerance {row_tol:.3e}"
        )
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            value = lap[i, j]
            if value < -tol:
                edges.append((i + 1, j + 1, -value))
            elif value > tol:
                raise NotLaplacianError(
                    f"positive off-diagonal entry {value:.3e} at ({i + 1}, {j + 1})"
                )
    return WeightedGraph(n, tuple(edges))


def characteristic_matrix(partition, n):
    """Characteristic matrix of a clustering of ``n`` vertices.

    Column ``i`` is the indicator vector of the i-th cluster.
    """
    if partition.n != n:
        raise ValueError(
            f"partition covers {partition.n} vertices, expected {n}"
        )
    p = np.zeros((n, partition.r))
    for col, cluster in enumerate(partition.clusters):
        for v in cluster:
            p[v - 1, col] = 1.0
    return CharacteristicMatrix(p)


def watts_strogatz(n, k, beta, seed):
    """Small-world random graph: ring lattice with random rewiring.

    Each vertex starts joined to its ``k`` nearest ring neighbours; every
    lattice edge is independently rewired with probability ``beta`` to a
    uniformly random non-neighbour.  Generation is retried (continuing the
    same random stream) until the graph is connected.  All edges have unit
    weight.

    Parameters
    ----------
    n : int
        Vertex count.
    k : int
        Mean degree; must be even and satisfy ``2 <= k < n``.
    beta : float
        Rewiring probability in [0, 1].
    seed : int
        Seed for the generator; equal seeds give identical edge lists.

    Raises
    ------
    GenerationError
        If no connected graph is found within the retry budget.
    """
    if k % 2 != 0:
        raise ValueError(f"mean degree k must be even, got {k}")
    if not 2 <= k < n:
        raise ValueError(f"need 2 <= k < n, got k={k}, n={n}")
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"rewiring probability must be in [0, 1], got {beta}")
    rng = np.random.default_rng(seed)
    half = k // 2
    for _ in range(_WS_RETRIES):
        adjacency = [set() for _ in range(n)]
        for i in range(n):
            for offset in range(1, half + 1):
                j = (i + offset) % n
                adjacency[i].add(j)
                adjacency[j].add(i)
        for offset in range(1, half + 1):
            for i in range(n):
                j = (i + offset) % n
                if rng.random() >= beta:
                    continue
                if len(adjacency[i]) >= n - 1:
                    continue  # vertex saturated, no admissible target
                for _ in range(100 * n):
                    t = int(rng.integers(n))
                    if t != i and t not in adjacency[i]:
                        break
                else:
                    continue
                adjacency[i].discard(j)
                adjacency[j].discard(i)
                adjacency[i].add(t)
                adjacency[t].add(i)
        edges = tuple(
            (i + 1, j + 1, 1.0)
            for i in range(n)
            for j in adjacency[i]
            if i < j
        )
        graph = WeightedGraph(n, edges)
        if graph.is_connected():
            return graph
    raise GenerationError(
        f"no connected Watts-Strogatz graph for n={n}, k={k}, beta={beta} "
        f"within {_WS_RETRIES} attempts"
    )


@dataclass(frozen=True)
class BenchmarkConfig:
    """Parameters of the seeded mass-damper-spring benchmark generator.

    Spring and damper topologies are independent small-world draws; edge
    weights are uniform on ``[weight_min, weight_max]``; each vertex carries
    a damper of ``alpha`` times its mass, which keeps the damping matrix
    positive definite.
    """

    m: int = 5
    k: int = 4
    beta: float = 0.3
    alpha: float = 0.5
    weight_min: float = 0.5
    weight_max: float = 1.5
    damper_k: int | None = None
    damper_beta: float | None = None


def _reweight(graph, rng, low, high):
    weights = rng.uniform(low, high, graph.n_edges)
    return WeightedGraph(
        graph.n,
        tuple((i, j, float(w)) for (i, j, _), w in zip(graph.edges, weights)),
    )


def benchmark_parts(n, cfg=None, seed=0):
    """Raw pieces of the benchmark network: masses, graphs, and inputs.

    Returns ``(m_diag, spring_graph, damper_graph, f)``; the spring graph
    carries the stiffness Laplacian, the damper graph plus ``cfg.alpha``
    vertex dampers the damping matrix.
    """
    if n < 2:
        raise ValueError(f"need at least 2 vertices for a connected graph, got {n}")
    cfg = cfg or BenchmarkConfig()
    if cfg.alpha <= 0:
        raise ValueError(
            f"vertex damper coefficient must be positive to keep the damping "
            f"matrix positive definite, got alpha={cfg.alpha}"
        )
    if not 0 < cfg.weight_min <= cfg.weight_max:
        raise ValueError(
            f"need 0 < weight_min <= weight_max, got "
            f"[{cfg.weight_min}, {cfg.weight_max}]"
        )
    master = np.random.default_rng(seed)
    sub = master.integers(0, 2**63 - 1, size=3)
    spring = watts_strogatz(n, cfg.k, cfg.beta, int(sub[0]))
    damper_k = cfg.k if cfg.damper_k is None else cfg.damper_k
    damper_beta = cfg.beta if cfg.damper_beta is None else cfg.damper_beta
    damper = watts_strogatz(n, damper_k, damper_beta, int(sub[1]))

    rng = np.random.default_rng(int(sub[2]))
    spring = _reweight(spring, rng, cfg.weight_min, cfg.weight_max)
    damper = _reweight(damper, rng, cfg.weight_min, cfg.weight_max)
    f = rng.uniform(-1.0, 1.0, (n, cfg.m))
    m_diag = ((np.arange(1, n + 1) % 10) + 1).astype(float)
    return m_diag, spring, damper, f


def benchmark_system(n, cfg=None, seed=0):
    """Seeded benchmark network of ``n`` masses with small-world couplings.

    The i-th mass is ``(i mod 10) + 1`` with 1-based ``i``; stiffness and
    damping Laplacians come from independent Watts-Strogatz draws with
    uniform random edge weights; the input matrix has i.i.d. uniform [-1, 1]
    entries.  The returned model passes full structural validation.
    """
    cfg = cfg or BenchmarkConfig()
    m_diag, spring, damper, f = benchmark_parts(n, cfg, seed)
    stiffness = laplacian(spring)
    damping = laplacian(damper) + np.diag(cfg.alpha * m_diag)
    return validate(m_diag, damping, stiffness, f)
