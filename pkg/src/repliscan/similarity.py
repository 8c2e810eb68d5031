"""Cosine similarity, background-bias normalization, and exact top-k search.

Scores follow the copy-detection recipe: the raw score is the cosine between
two descriptors, and each query's scores are discounted by beta times its
background bias -- the mean cosine to its K nearest neighbors in a background
set disjoint from both corpora. Search is exact: blocked dense evaluation
over the full query x reference score matrix, never approximate.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .descriptors import DEGENERATE_NORM, DescriptorSet
from .errors import ContractError

DEFAULT_K = 5
DEFAULT_BETA = 0.5
DEFAULT_BLOCK = 1024


@dataclass(frozen=True)
class BackgroundSet:
    """Background descriptors plus the bias parameters K and beta."""

    descriptors: DescriptorSet
    k: int = DEFAULT_K
    beta: float = DEFAULT_BETA

    def __post_init__(self):
        if self.k < 1:
            raise ContractError("K must be >= 1")
        if self.beta < 0:
            raise ContractError("beta must be >= 0")
        if len(self.descriptors) < self.k:
            raise ContractError(
                f"background set has {len(self.descriptors)} members, need >= K={self.k}"
            )

    def with_params(self, k: int, beta: float) -> "BackgroundSet":
        return replace(self, k=k, beta=beta)


@dataclass(frozen=True)
class ScoredMatch:
    """One scored (query, reference) pair."""

    query: str
    reference: str
    raw: float
    bias: float
    normalized: float
    rank: int


def _unit_rows(vectors: np.ndarray) -> np.ndarray:
    """L2-normalized float64 copy; degenerate rows become zero vectors.

    Zeroing degenerate rows makes every cosine involving them exactly 0,
    which is the contract for near-zero-norm descriptors.
    """
    v = np.asarray(vectors, dtype=np.float64)
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    safe = np.where(norms < DEGENERATE_NORM, 1.0, norms)
    unit = v / safe
    unit[norms[:, 0] < DEGENERATE_NORM] = 0.0
    return unit


def _id_ranks(ids: list[str]) -> np.ndarray:
    """Lexicographic rank of each id, used as a deterministic tiebreaker."""
    ranks = np.empty(len(ids), dtype=np.int64)
    ranks[np.argsort(np.asarray(ids, dtype=object))] = np.arange(len(ids))
    return ranks


def _check_sets(queries: DescriptorSet, refs: DescriptorSet, bg: BackgroundSet) -> None:
    for name, other in (("query", queries), ("reference", refs)):
        if other.kind != bg.descriptors.kind:
            raise ContractError(
                f"{name} set kind {other.kind!r} != background kind {bg.descriptors.kind!r}"
            )
        if other.dim != bg.descriptors.dim and len(other) and len(bg.descriptors):
            raise ContractError(
                f"{name} set dim {other.dim} != background dim {bg.descriptors.dim}"
            )
        overlap = set(other.ids) & set(bg.descriptors.ids)
        if overlap:
            raise ContractError(
                f"background set must be disjoint from the {name} corpus; "
                f"shared ids: {sorted(overlap)[:5]}"
            )
    if queries.kind != refs.kind:
        raise ContractError(f"kind mismatch: queries {queries.kind!r} vs refs {refs.kind!r}")
    if len(queries) and len(refs) and queries.dim != refs.dim:
        raise ContractError(f"dim mismatch: queries {queries.dim} vs refs {refs.dim}")


def cosine(q: np.ndarray, r: np.ndarray) -> float:
    """Cosine similarity of two vectors; 0 if either norm is near zero."""
    q = np.asarray(q, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    if q.shape != r.shape:
        raise ContractError(f"dim mismatch: {q.shape} vs {r.shape}")
    if not (np.isfinite(q).all() and np.isfinite(r).all()):
        raise ContractError("cosine requires finite vectors")
    nq = np.linalg.norm(q)
    nr = np.linalg.norm(r)
    if nq < DEGENERATE_NORM or nr < DEGENERATE_NORM:
        return 0.0
    return float(np.dot(q, r) / (nq * nr))


def bias(q: np.ndarray, bg: BackgroundSet) -> float:
    """Mean cosine between q and its K nearest background neighbors.

    Ties among equally-similar neighbors cannot change the mean, so the
    value is deterministic regardless of neighbor order.
    """
    unit_bg = _unit_rows(bg.descriptors.vectors)
    q = np.asarray(q, dtype=np.float64)
    nq = np.linalg.norm(q)
    if nq < DEGENERATE_NORM:
        return 0.0
    sims = unit_bg @ (q / nq)
    top = np.sort(sims)[::-1][: bg.k]
    return float(top.mean())


def normalized_score(q: np.ndarray, r: np.ndarray, bg: BackgroundSet) -> float:
    """cosine(q, r) - beta * bias(q). Asymmetric: the bias is query-side."""
    return cosine(q, r) - bg.beta * bias(q, bg)


def _bias_vector(unit_q: np.ndarray, bg: BackgroundSet) -> np.ndarray:
    """Background bias for each (unit-normalized) query row."""
    unit_bg = _unit_rows(bg.descriptors.vectors)
    sims = unit_q @ unit_bg.T
    k = bg.k
    # top-k mean per row; partition is enough since only the values matter
    part = np.partition(sims, sims.shape[1] - k, axis=1)[:, sims.shape[1] - k:]
    return part.mean(axis=1)


def topk(
    queries: DescriptorSet,
    refs: DescriptorSet,
    bg: BackgroundSet,
    k: int,
    block_size: int = DEFAULT_BLOCK,
    exclude_same_id: bool = False,
) -> list[list[ScoredMatch]]:
    """Exact top-k references per query, ranked by normalized score.

    Ties are broken by reference clip id (ascending) so results are
    deterministic. ``exclude_same_id`` drops any reference whose id equals
    the query id, for corpus-vs-itself comparisons.
    """
    if k < 1:
        raise ContractError("k must be >= 1")
    if block_size < 1:
        raise ContractError("block_size must be >= 1")
    _check_sets(queries, refs, bg)
    if not len(queries) or not len(refs):
        return [[] for _ in range(len(queries))]

    unit_q = _unit_rows(queries.vectors)
    unit_r = _unit_rows(refs.vectors)
    ref_rank = _id_ranks(refs.ids)
    ref_index = {cid: i for i, cid in enumerate(refs.ids)}
    out: list[list[ScoredMatch]] = []

    for start in range(0, len(queries), block_size):
        stop = min(start + block_size, len(queries))
        q_block = unit_q[start:stop]
        raw = q_block @ unit_r.T
        b = _bias_vector(q_block, bg)
        scores = raw - bg.beta * b[:, None]
        for i in range(stop - start):
            qid = queries.ids[start + i]
            row = scores[i]
            mask_self = exclude_same_id and qid in ref_index
            if mask_self:
                row = row.copy()
                row[ref_index[qid]] = -np.inf
            order = np.lexsort((ref_rank, -row))
            take = min(k, len(refs) - (1 if mask_self else 0))
            matches = []
            for rank, j in enumerate(order[:take], start=1):
                matches.append(
                    ScoredMatch(
                        query=qid,
                        reference=refs.ids[j],
                        raw=float(raw[i, j]),
                        bias=float(b[i]),
                        normalized=float(scores[i, j]),
                        rank=rank,
                    )
                )
            out.append(matches)
    return out


def self_similarity(
    refs: DescriptorSet,
    bg: BackgroundSet,
    block_size: int = DEFAULT_BLOCK,
) -> np.ndarray:
    """Full normalized self-similarity matrix with a zeroed diagonal.

    S[i, j] is the normalized score of reference i (as query) against
    reference j; the matrix is asymmetric because the bias is query-side.
    """
    if not len(refs):
        raise ContractError("self_similarity needs a nonempty descriptor set")
    n = len(refs)
    S = np.empty((n, n), dtype=np.float64)
    for start, block in self_similarity_blocks(refs, bg, block_size):
        S[start : start + block.shape[0]] = block
    return S


def self_similarity_blocks(
    refs: DescriptorSet,
    bg: BackgroundSet,
    block_size: int = DEFAULT_BLOCK,
):
    """Yield (row_start, rows) blocks of the self-similarity matrix.

    Lets dedup bound memory to O(block_size * n) on large corpora instead of
    materializing the full n x n matrix.
    """
    _check_sets(refs, refs, bg)
    unit = _unit_rows(refs.vectors)
    n = len(refs)
    for start in range(0, n, block_size):
        stop = min(start + block_size, n)
        block = unit[start:stop] @ unit.T
        b = _bias_vector(unit[start:stop], bg)
        block -= bg.beta * b[:, None]
        for i in range(stop - start):
            block[i, start + i] = 0.0
        yield start, block
