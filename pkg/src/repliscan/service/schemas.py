"""Request/response models for the triage HTTP API."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class ResultInfo(BaseModel):
    kind: str
    queries: int
    retrieved: int
    path: str


class Progress(BaseModel):
    pairs: int
    reviewed: int
    remaining: int
    by_label: dict[str, int]


class SessionInfo(BaseModel):
    session_dir: str
    results: list[ResultInfo]
    clusters: int
    progress: Progress
    rubric: str


class VerdictState(BaseModel):
    annotator: str
    label: str
    timestamp: str
    note: Optional[str] = None


class PairItem(BaseModel):
    query: str
    reference: str
    kind: str
    raw: float
    bias: float
    normalized: float
    rank: int
    query_caption: Optional[str] = None
    reference_caption: Optional[str] = None
    verdicts: list[VerdictState] = Field(default_factory=list)
    consensus: Optional[str] = None


class PairPage(BaseModel):
    total: int
    offset: int
    items: list[PairItem]


class PairKey(BaseModel):
    query: str
    reference: str


class VerdictIn(BaseModel):
    pair: Optional[PairKey] = None
    cluster_id: Optional[int] = None
    label: str
    annotator: str
    note: Optional[str] = None
    timestamp: Optional[str] = None


class VerdictAck(BaseModel):
    status: Literal["recorded"] = "recorded"
    key: dict
    label: str
    annotator: str
    timestamp: str


class EdgeScore(BaseModel):
    a: str
    b: str
    score_ab: float
    score_ba: float


class ClusterItem(BaseModel):
    component_id: int
    members: list[str]
    pairwise_scores: list[EdgeScore]
    status: str
    verdicts: list[VerdictState] = Field(default_factory=list)


class ClusterPage(BaseModel):
    total: int
    items: list[ClusterItem]
