"""Vertex dissimilarities and the clustering strategies built on them.

Dissimilarity of two vertices is the H2 norm of the difference of their
transfer-function rows, read off the deviation Gramian as a quadratic form;
the hierarchical strategy agglomerates under average linkage, recording the
full merge tree.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .network import ClusteringPartition


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Symmetric nonnegative pairwise vertex distances with zero diagonal.

    ``kind`` records whether distances compare position responses or
    velocity responses.
    """

    n: int
    d: np.ndarray
    kind: str

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.shape != (self.n, self.n):
            raise ValueError(f"distance matrix must be {self.n}x{self.n}, got {d.shape}")
        if self.kind not in ("position", "velocity"):
            raise ValueError(f"kind must be 'position' or 'velocity', got {self.kind!r}")
        if np.any(np.diag(d) != 0.0):
            raise ValueError("distance matrix must have an exactly zero diagonal")
        if np.any(d < 0.0):
            raise ValueError("distances must be nonnegative")
        if np.any(d != d.T):
            raise ValueError("distance matrix must be symmetric")
        object.__setattr__(self, "d", d)


@dataclass(frozen=True)
class Merge:
    """One agglomeration step: clusters ``a`` and ``b`` join at ``height``."""

    a: int
    b: int
    height: float
    new_id: int


@dataclass(frozen=True)
class Dendrogram:
    """Complete binary merge tree; leaves are 1..n, internal ids n+1..2n-1.

    Heights are nondecreasing along the merge sequence (average linkage
    admits no inversions).
    """

    merges: tuple

    def __post_init__(self):
        merges = tuple(self.merges)
        consumed = set()
        scale = max((abs(m.height) for m in merges), default=0.0)
        previous = -np.inf
        for m in merges:
            if m.a in consumed or m.b in consumed or m.a == m.b:
                raise ValueError(f"cluster id consumed twice in merge {m}")
            consumed.update((m.a, m.b))
            if m.height < previous - 1e-9 * max(scale, 1.0):
                raise ValueError(
                    f"merge heights decrease at {m} (previous {previous:.6g})"
                )
            previous = max(previous, m.height)
        object.__setattr__(self, "merges", merges)

    @property
    def n_leaves(self):
        return len(self.merges) + 1


def _pairwise_rows(diag, block, rows):
    squared = diag[rows, None] + diag[None, :] - (block[rows, :] + block.T[rows, :])
    return np.sqrt(np.maximum(squared, 0.0))


def _pairwise_from_block(block, threads):
    """Distance matrix of the quadratic form induced by a PSD block."""
    n = block.shape[0]
    diag = np.diag(block).copy()
    if threads <= 1 or n < 2 * threads:
        d = _pairwise_rows(diag, block, np.arange(n))
    else:
        chunks = np.array_split(np.arange(n), threads)
        d = np.empty((n, n))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for rows, result in zip(
                chunks, pool.map(lambda r: _pairwise_rows(diag, block, r), chunks)
            ):
                d[rows] = result
    np.fill_diagonal(d, 0.0)
    return d


def dissimilarity_position(sys, gram, threads=1):
    """Pairwise H2 distances between position responses of the vertices.

    ``gram`` must be the deviation Gramian of ``sys``; entry (i, j) equals
    the H2 norm of the difference of the transfer rows of vertices i and j.
    Entries are independent, so rows may be computed in parallel.
    """
    n = sys.n
    return DissimilarityMatrix(
        n=n, d=_pairwise_from_block(gram.p[:n, :n], threads), kind="position"
    )


def dissimilarity_velocity(sys, gram, threads=1):
    """Pairwise H2 distances between velocity responses of the vertices."""
    n = sys.n
    return DissimilarityMatrix(
        n=n, d=_pairwise_from_block(gram.p[n:, n:], threads), kind="velocity"
    )


def linkage(dis, ca, cb):
    """Average dissimilarity between two disjoint vertex clusters."""
    ca = sorted(set(int(v) for v in ca))
    cb = sorted(set(int(v) for v in cb))
    if not ca or not cb:
        raise ValueError("clusters must be non-empty")
    if set(ca) & set(cb):
        raise ValueError("clusters must be disjoint")
    for v in ca + cb:
        if not 1 <= v <= dis.n:
            raise ValueError(f"vertex {v} out of range 1..{dis.n}")
    rows = np.asarray(ca) - 1
    cols = np.asarray(cb) - 1
    return float(dis.d[np.ix_(rows, cols)].mean())


def _partition_from_members(members):
    clusters = sorted((tuple(sorted(group)) for group in members), key=lambda c: c[0])
    return ClusteringPartition(tuple(clusters))


def hierarchical_clustering(dis, r):
    """Greedy average-linkage agglomeration down to ``r`` clusters.

    Starting from singletons, repeatedly merges the pair of clusters with
    minimal average dissimilarity; the merged cluster takes the lower slot
    of the pair, and ties resolve to the lexicographically smallest slot
    pair, so the procedure is deterministic.  Linkage values are maintained
    with the average-linkage update
    ``delta(Ca u Cb, Cc) = (|Ca| delta_ac + |Cb| delta_bc) / (|Ca| + |Cb|)``.

    The full tree is always built; the returned partition is the state at
    ``r`` clusters (ordered by smallest member).

    Returns
    -------
    (ClusteringPartition, Dendrogram)
    """
    n = dis.n
    if not 1 <= r <= n:
        raise ValueError(f"target cluster count must be in [1, {n}], got {r}")
    link = dis.d.copy()
    np.fill_diagonal(link, np.inf)
    ids = list(range(1, n + 1))
    sizes = [1.0] * n
    members = [[v] for v in range(1, n + 1)]
    merges = []
    snapshot = _partition_from_members(members) if r == n else None
    next_id = n + 1
    k = n
    while k > 1:
        iu = np.triu_indices(k, 1)
        flat = np.argmin(link[iu])
        i, j = int(iu[0][flat]), int(iu[1][flat])
        height = float(link[i, j])
        merges.append(Merge(a=ids[i], b=ids[j], height=height, new_id=next_id))

        merged_row = (sizes[i] * link[i, :] + sizes[j] * link[j, :]) / (
            sizes[i] + sizes[j]
        )
        link[i, :] = merged_row
        link[:, i] = merged_row
        link[i, i] = np.inf
        link = np.delete(np.delete(link, j, axis=0), j, axis=1)

        ids[i] = next_id
        sizes[i] += sizes[j]
        members[i] = members[i] + members[j]
        del ids[j], sizes[j], members[j]
        next_id += 1
        k -= 1
        if k == r:
            snapshot = _partition_from_members(members)
    return snapshot, Dendrogram(tuple(merges))


def random_clustering(n, r, seed):
    """Seeded random partition of ``n`` vertices into ``r`` non-empty clusters.

    A random permutation seeds each cluster with one vertex (guaranteeing
    non-emptiness); the remaining vertices are assigned uniformly.
    """
    if not 1 <= r <= n:
        raise ValueError(f"target cluster count must be in [1, {n}], got {r}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n) + 1
    members = [[int(v)] for v in perm[:r]]
    for v in perm[r:]:
        members[int(rng.integers(r))].append(int(v))
    return _partition_from_members(members)


def greedy_clustering(dis, r):
    """Union-find agglomeration in ascending order of pairwise dissimilarity.

    Processes vertex pairs from the most to the least similar, unifying the
    clusters that currently contain the two endpoints, until ``r`` clusters
    remain.  This is exactly single-linkage agglomeration cut at ``r``.
    """
    n = dis.n
    if not 1 <= r <= n:
        raise ValueError(f"target cluster count must be in [1, {n}], got {r}")
    rows, cols = np.triu_indices(n, 1)
    order = np.lexsort((cols, rows, dis.d[rows, cols]))

    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    count = n
    for idx in order:
        if count == r:
            break
        ri, rj = find(int(rows[idx])), find(int(cols[idx]))
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
            count -= 1
    groups = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v + 1)
    return _partition_from_members(groups.values())
