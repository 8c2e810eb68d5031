"""Retrieval stage: thresholded top-1 selection, score histograms, calibration.

A query is retrieved when its best normalized similarity against the
reference set meets the threshold tau. Histograms of those top-1 scores
(queries-vs-references next to references-vs-themselves) are the raw
material for choosing tau; calibration only reports candidate separation
points -- the final choice stays with a human.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .descriptors import MEL_KIND, DescriptorSet
from .errors import ContractError
from .similarity import DEFAULT_BLOCK, BackgroundSet, ScoredMatch, topk

DEFAULT_TAU = 0.5005  # calibrated for mel descriptors
DEFAULT_BINS = 100


@dataclass(frozen=True)
class RetrievalConfig:
    tau: float = DEFAULT_TAU
    k_background: int = 5
    beta: float = 0.5
    descriptor_kind: str = MEL_KIND

    def __post_init__(self):
        if self.k_background < 1:
            raise ContractError("k_background must be >= 1")
        if self.beta < 0:
            raise ContractError("beta must be >= 0")

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "k_background": self.k_background,
            "beta": self.beta,
            "descriptor_kind": self.descriptor_kind,
        }


@dataclass
class RetrievalResult:
    """Top-1 matches for every query plus the retrieved (above-tau) subset."""

    retrieved: list[ScoredMatch]
    all_top1: list[ScoredMatch]
    config: dict = field(default_factory=dict)

    @property
    def n_queries(self) -> int:
        return len(self.all_top1)


@dataclass
class ScoreHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=np.float64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if len(self.counts) != len(self.bin_edges) - 1:
            raise ContractError(
                f"{len(self.counts)} counts for {len(self.bin_edges)} edges"
            )

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def retrieve(
    queries: DescriptorSet,
    refs: DescriptorSet,
    bg: BackgroundSet,
    cfg: RetrievalConfig = RetrievalConfig(),
    block_size: int = DEFAULT_BLOCK,
) -> RetrievalResult:
    """Select queries whose top-1 normalized score is >= cfg.tau."""
    if queries.kind != cfg.descriptor_kind:
        raise ContractError(
            f"query descriptor kind {queries.kind!r} does not match config "
            f"({cfg.descriptor_kind!r})"
        )
    if not len(refs):
        raise ContractError("retrieve needs a nonempty reference set")
    effective_bg = bg.with_params(cfg.k_background, cfg.beta)
    per_query = topk(queries, refs, effective_bg, k=1, block_size=block_size)
    all_top1 = [matches[0] for matches in per_query if matches]
    retrieved = [m for m in all_top1 if m.normalized >= cfg.tau]
    retrieved.sort(key=lambda m: (-m.normalized, m.query))
    return RetrievalResult(retrieved=retrieved, all_top1=all_top1, config=cfg.to_dict())


def top1_scores(
    a: DescriptorSet,
    b: DescriptorSet,
    bg: BackgroundSet,
    exclude_self: bool | None = None,
    block_size: int = DEFAULT_BLOCK,
) -> np.ndarray:
    """Top-1 normalized score for each member of a against b.

    When a and b are the same corpus (by corpus_id) each sample's trivial
    self-match is excluded so the scores reflect the nearest *other* sample.
    """
    if not len(a) or not len(b):
        raise ContractError("both descriptor sets must be nonempty")
    if exclude_self is None:
        exclude_self = a.corpus_id == b.corpus_id
    per_query = topk(a, b, bg, k=1, block_size=block_size, exclude_same_id=exclude_self)
    scores = [matches[0].normalized for matches in per_query if matches]
    if len(scores) != len(a):
        raise ContractError("every query needs at least one candidate reference")
    return np.asarray(scores, dtype=np.float64)


def make_edges(scores: np.ndarray, bins: int) -> np.ndarray:
    """Fixed-width bin edges spanning the scores (widened if degenerate)."""
    if bins < 1:
        raise ContractError("bins must be >= 1")
    lo = float(np.min(scores))
    hi = float(np.max(scores))
    if lo == hi:
        lo -= 0.5
        hi += 0.5
    return np.linspace(lo, hi, bins + 1)


def histogram_top1(
    a: DescriptorSet,
    b: DescriptorSet,
    bg: BackgroundSet,
    bins: int = DEFAULT_BINS,
    bin_edges: np.ndarray | None = None,
    label: str = "",
    block_size: int = DEFAULT_BLOCK,
) -> ScoreHistogram:
    """Histogram of top-1 normalized scores of a's members against b.

    Scores are clipped into the edge range, so the counts always conserve
    the number of scored queries.
    """
    scores = top1_scores(a, b, bg, block_size=block_size)
    if bin_edges is None:
        bin_edges = make_edges(scores, bins)
    else:
        bin_edges = np.asarray(bin_edges, dtype=np.float64)
        if len(bin_edges) < 2:
            raise ContractError("need at least two bin edges")
    clipped = np.clip(scores, bin_edges[0], bin_edges[-1])
    counts, _ = np.histogram(clipped, bins=bin_edges)
    return ScoreHistogram(bin_edges=bin_edges, counts=counts, label=label)


@dataclass
class CalibrationReport:
    """Per-edge retention counts for the two series, plus a suggestion.

    ``suggested_tau`` maximizes the retention margin (fraction of queries
    kept minus fraction of self-matches kept). ``full_separation`` means
    some edge keeps every query while excluding all self-matches;
    ``separable`` is False when no edge has a positive margin.

    Counts at interior edges are exact versions of "scores >= edge"; the
    final edge (the histogram maximum) reports 0 because the last bin is
    right-closed.
    """

    edges: np.ndarray
    queries_above: np.ndarray
    self_above: np.ndarray
    suggested_tau: float
    full_separation: bool
    separable: bool

    def rows(self):
        return list(zip(self.edges.tolist(), self.queries_above.tolist(), self.self_above.tolist()))


def calibrate_threshold(
    hist_query: ScoreHistogram, hist_self: ScoreHistogram
) -> CalibrationReport:
    """Report candidate tau values from a pair of top-1 score histograms."""
    if not np.array_equal(hist_query.bin_edges, hist_self.bin_edges):
        raise ContractError("histograms must share identical bin edges")
    edges = hist_query.bin_edges
    q_above = np.concatenate([np.cumsum(hist_query.counts[::-1])[::-1], [0]])
    s_above = np.concatenate([np.cumsum(hist_self.counts[::-1])[::-1], [0]])
    q_total = max(hist_query.total, 1)
    s_total = max(hist_self.total, 1)
    margin = q_above / q_total - s_above / s_total
    best = int(np.argmax(margin))
    return CalibrationReport(
        edges=edges,
        queries_above=q_above,
        self_above=s_above,
        suggested_tau=float(edges[best]),
        full_separation=bool(
            np.any((q_above == hist_query.total) & (s_above == 0))
        ),
        separable=bool(margin[best] > 0),
    )


def match_count_threshold(result: RetrievalResult, n: int) -> tuple[float, int]:
    """Find the tau whose retrieved count is closest to n (ties toward fewer).

    Used to compare descriptor kinds at equal retrieval volume: pick the
    threshold on this result that yields the same number of pairs as some
    other run.
    """
    if n < 0:
        raise ContractError("n must be >= 0")
    if not result.all_top1:
        raise ContractError("result has no scored queries")
    scores = np.sort(np.asarray([m.normalized for m in result.all_top1]))[::-1]
    # achievable counts: 0 (tau above max) plus count(>= v) for distinct v
    candidates: list[tuple[int, float]] = [(0, float(np.nextafter(scores[0], np.inf)))]
    distinct, first_idx = np.unique(scores[::-1], return_index=True)
    for v, idx in zip(distinct[::-1], first_idx[::-1]):
        count = len(scores) - int(idx)  # scores >= v
        candidates.append((count, float(v)))
    best_count, best_tau = min(candidates, key=lambda cv: (abs(cv[0] - n), cv[0]))
    return best_tau, best_count
