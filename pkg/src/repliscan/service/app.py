"""FastAPI service for the verification stage.

All state mutation goes through the verdict log; everything else the app
serves (pairs, clusters, audio, spectrograms) is read-only session data.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles

from ..errors import ContractError
from ..triage import (
    CONSENSUS_POLICIES,
    TriageSession,
    Verdict,
    cluster_status,
    consensus_label,
    utc_now,
)
from .schemas import (
    ClusterItem,
    ClusterPage,
    PairItem,
    PairPage,
    Progress,
    ResultInfo,
    SessionInfo,
    VerdictAck,
    VerdictIn,
    VerdictState,
)

# Guidance shown to raters: what counts as a replicated pair.
RUBRIC = (
    "Mark a pair as replicated when the two clips share nearly identical "
    "complex spectro-temporal patterns. Simple content that any model can "
    "reproduce, such as stationary noise or constant tones, does not count "
    "even when it matches closely. When in doubt, choose unsure."
)

_FILTERS = ("all", "unreviewed", "reviewed", "replicated", "not_replicated", "unsure")


def create_app(session: TriageSession, static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="repliscan triage", version="0.1.0")

    def pair_item(pair) -> PairItem:
        verdicts = session.pair_state(pair)
        return PairItem(
            query=pair.match.query,
            reference=pair.match.reference,
            kind=pair.kind,
            raw=pair.match.raw,
            bias=pair.match.bias,
            normalized=pair.match.normalized,
            rank=pair.match.rank,
            query_caption=pair.query_caption,
            reference_caption=pair.reference_caption,
            verdicts=[VerdictState(**v) for v in verdicts],
            consensus=consensus_label([v["label"] for v in verdicts]),
        )

    @app.get("/api/session", response_model=SessionInfo)
    def get_session() -> SessionInfo:
        return SessionInfo(
            session_dir=str(session.session_dir),
            results=[
                ResultInfo(
                    kind=r.kind,
                    queries=r.n_queries,
                    retrieved=len(r.retrieved),
                    path=r.path,
                )
                for r in session.results
            ],
            clusters=len(session.clusters),
            progress=Progress(**session.progress()),
            rubric=RUBRIC,
        )

    @app.get("/api/pairs", response_model=PairPage)
    def get_pairs(
        offset: int = Query(0, ge=0),
        limit: int = Query(50, ge=1, le=1000),
        filter: str = Query("all"),
    ) -> PairPage:
        if filter not in _FILTERS:
            raise HTTPException(422, f"unknown filter {filter!r}; expected one of {_FILTERS}")
        items = [pair_item(p) for p in session.pairs]
        if filter == "unreviewed":
            items = [i for i in items if not i.verdicts]
        elif filter == "reviewed":
            items = [i for i in items if i.verdicts]
        elif filter != "all":
            items = [i for i in items if i.consensus == filter]
        return PairPage(total=len(items), offset=offset, items=items[offset : offset + limit])

    @app.get("/api/clips/{clip_id}/audio")
    def get_audio(clip_id: str) -> FileResponse:
        try:
            path = session.clip_path(clip_id)
        except KeyError:
            raise HTTPException(404, f"unknown clip {clip_id!r}") from None
        return FileResponse(path, media_type="audio/wav", filename=path.name)

    @app.get("/api/clips/{clip_id}/spectrogram")
    def get_spectrogram(clip_id: str) -> Response:
        try:
            png = session.spectrogram_png(clip_id)
        except KeyError:
            raise HTTPException(404, f"unknown clip {clip_id!r}") from None
        return Response(content=png, media_type="image/png")

    @app.post("/api/verdicts", response_model=VerdictAck)
    def post_verdict(body: VerdictIn) -> VerdictAck:
        if (body.pair is None) == (body.cluster_id is None):
            raise HTTPException(422, "provide exactly one of 'pair' or 'cluster_id'")
        if body.pair is not None:
            key = ("pair", body.pair.query, body.pair.reference)
        else:
            key = ("cluster", body.cluster_id)
        try:
            verdict = Verdict(
                key=key,
                label=body.label,
                annotator=body.annotator,
                timestamp=body.timestamp or utc_now(),
                note=body.note,
            )
            session.record_verdict(verdict)
        except ContractError as exc:
            raise HTTPException(422, str(exc)) from exc
        return VerdictAck(
            key=verdict.to_record()["key"],
            label=verdict.label,
            annotator=verdict.annotator,
            timestamp=verdict.timestamp,
        )

    @app.get("/api/summary")
    def get_summary(policy: str = Query("majority")) -> dict:
        if policy not in CONSENSUS_POLICIES:
            raise HTTPException(
                422, f"unknown policy {policy!r}; expected one of {CONSENSUS_POLICIES}"
            )
        return session.summary(policy)

    @app.get("/api/clusters", response_model=ClusterPage)
    def get_clusters() -> ClusterPage:
        items = []
        for cluster in session.clusters:
            cid = int(cluster["component_id"])
            verdicts = [
                VerdictState(
                    annotator=v.annotator, label=v.label, timestamp=v.timestamp, note=v.note
                )
                for v in session.verdicts.for_key(("cluster", cid))
            ]
            items.append(
                ClusterItem(
                    component_id=cid,
                    members=cluster["members"],
                    pairwise_scores=cluster.get("pairwise_scores", []),
                    status=cluster_status([v.label for v in verdicts]),
                    verdicts=verdicts,
                )
            )
        return ClusterPage(total=len(items), items=items)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="frontend")
    else:
        @app.get("/")
        def index() -> Response:
            return Response(
                content=(
                    "<!doctype html><title>repliscan triage</title>"
                    "<h1>repliscan triage service</h1>"
                    "<p>No frontend build found. The JSON API lives under /api/.</p>"
                ),
                media_type="text/html",
            )

    return app
