"""In-corpus duplicate discovery: mutual-similarity graph + connected components.

An edge joins clips i and j only when the normalized score clears tau in
*both* directions (the score matrix is asymmetric because the bias is
query-side). Connected components of that graph with two or more members are
duplicate-cluster candidates for human review.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .descriptors import DescriptorSet
from .errors import ContractError
from .similarity import DEFAULT_BLOCK, BackgroundSet, self_similarity_blocks

DEFAULT_TAU = 0.5025
DEFAULT_MATERIALIZE_CAP = 20_000


@dataclass
class AdjacencyGraph:
    """Undirected graph over clip ids; edges stored as sorted id pairs."""

    ids: list[str]
    edges: set[tuple[str, str]] = field(default_factory=set)

    def __post_init__(self):
        known = set(self.ids)
        for a, b in self.edges:
            if a == b:
                raise ContractError(f"self-loop on {a!r}")
            if a > b:
                raise ContractError(f"edge {(a, b)} not in sorted order")
            if a not in known or b not in known:
                raise ContractError(f"edge {(a, b)} references unknown ids")

    @property
    def n(self) -> int:
        return len(self.ids)


@dataclass
class DuplicateCluster:
    members: set[str]
    component_id: int
    status: str = "candidate"


class _UnionFind:
    """Disjoint sets over clip ids with path compression."""

    def __init__(self):
        self.parent: dict[str, str] = {}

    def find(self, x: str) -> str:
        root = x
        while self.parent.setdefault(root, root) != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def build_adjacency(
    S: np.ndarray, ids: list[str], tau: float = DEFAULT_TAU
) -> AdjacencyGraph:
    """Adjacency from a zero-diagonal self-similarity matrix.

    Edge (i, j) exists iff S[i, j] > tau and S[j, i] > tau -- strictly, in
    both directions.
    """
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ContractError(f"S must be square, got shape {S.shape}")
    if len(ids) != S.shape[0]:
        raise ContractError(f"{len(ids)} ids for a {S.shape[0]}x{S.shape[0]} matrix")
    if S.size and np.any(np.diagonal(S) != 0.0):
        raise ContractError("S must have a zeroed diagonal")
    above = (S > tau) & (S.T > tau)
    edges = set()
    for i, j in zip(*np.nonzero(np.triu(above, k=1))):
        a, b = sorted((ids[int(i)], ids[int(j)]))
        edges.add((a, b))
    return AdjacencyGraph(ids=list(ids), edges=edges)


def connected_components(g: AdjacencyGraph) -> list[DuplicateCluster]:
    """Components with >= 2 members, ids assigned by smallest member."""
    uf = _UnionFind()
    for a, b in g.edges:
        uf.union(a, b)
    groups: dict[str, set[str]] = {}
    for cid in g.ids:
        if cid in uf.parent:
            groups.setdefault(uf.find(cid), set()).add(cid)
    clusters = [members for members in groups.values() if len(members) >= 2]
    clusters.sort(key=lambda members: min(members))
    return [
        DuplicateCluster(members=members, component_id=idx)
        for idx, members in enumerate(clusters)
    ]


@dataclass
class DedupReport:
    """Clusters (largest first) plus the mutual scores backing each edge."""

    clusters: list[DuplicateCluster]
    edge_scores: dict[tuple[str, str], tuple[float, float]]
    tau: float
    n_clips: int
    config: dict = field(default_factory=dict)

    @property
    def size_summary(self) -> dict[int, int]:
        """Cluster size -> number of clusters of that size."""
        return dict(sorted(Counter(len(c.members) for c in self.clusters).items()))

    def cluster_edges(self, cluster: DuplicateCluster) -> list[dict]:
        rows = []
        for (a, b), (s_ab, s_ba) in sorted(self.edge_scores.items()):
            if a in cluster.members and b in cluster.members:
                rows.append({"a": a, "b": b, "score_ab": s_ab, "score_ba": s_ba})
        return rows


def dedup_corpus(
    refs: DescriptorSet,
    bg: BackgroundSet,
    tau: float = DEFAULT_TAU,
    block_size: int = DEFAULT_BLOCK,
    materialize_cap: int = DEFAULT_MATERIALIZE_CAP,
) -> DedupReport:
    """Full dedup pass: self-similarity -> mutual adjacency -> components.

    Corpora up to ``materialize_cap`` clips go through the dense matrix
    path; larger ones stream row blocks and keep only the sparse set of
    above-tau directed pairs.
    """
    if not len(refs):
        raise ContractError("dedup needs a nonempty descriptor set")
    ids = refs.ids
    n = len(ids)

    if n <= materialize_cap:
        S = np.empty((n, n), dtype=np.float64)
        for start, block in self_similarity_blocks(refs, bg, block_size):
            S[start : start + block.shape[0]] = block
        graph = build_adjacency(S, ids, tau)
        edge_scores = {}
        index = {cid: i for i, cid in enumerate(ids)}
        for a, b in graph.edges:
            i, j = index[a], index[b]
            edge_scores[(a, b)] = (float(S[i, j]), float(S[j, i]))
    else:
        directed: dict[tuple[int, int], float] = {}
        for start, block in self_similarity_blocks(refs, bg, block_size):
            rows, cols = np.nonzero(block > tau)
            for r, c in zip(rows, cols):
                directed[(start + int(r), int(c))] = float(block[r, c])
        edges = set()
        edge_scores = {}
        for (i, j), s_ij in directed.items():
            if i < j and (j, i) in directed:
                s_ji = directed[(j, i)]
                if ids[i] <= ids[j]:
                    a, b, s_ab, s_ba = ids[i], ids[j], s_ij, s_ji
                else:
                    a, b, s_ab, s_ba = ids[j], ids[i], s_ji, s_ij
                edges.add((a, b))
                edge_scores[(a, b)] = (s_ab, s_ba)
        graph = AdjacencyGraph(ids=list(ids), edges=edges)

    clusters = connected_components(graph)
    clusters.sort(key=lambda c: (-len(c.members), c.component_id))
    return DedupReport(clusters=clusters, edge_scores=edge_scores, tau=tau, n_clips=n)
