"""On-disk formats: manifests, the ADSC descriptor cache, and result files.

Layouts are documented in docs/FORMATS.md. Everything here is deterministic:
the same inputs always serialize to the same bytes, which is what makes
cache hits and rerun comparisons byte-exact.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .descriptors import IMPORTED_KIND, MEL_KIND, DescriptorSet
from .errors import FormatError
from .retrieval import RetrievalResult, ScoreHistogram
from .similarity import ScoredMatch

ADSC_MAGIC = b"ADSC"
ADSC_VERSION = 1
_HEADER = struct.Struct("<4sIBIQ")  # magic, version, kind, dim, count
_KIND_CODES = {MEL_KIND: 0, IMPORTED_KIND: 1}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# ---------------------------------------------------------------------------
# Manifests: one JSON record per line, {"id": ..., "path": ..., "caption": ...}
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    clip_id: str
    path: Path
    caption: str | None = None


@dataclass
class CorpusManifest:
    corpus_id: str
    entries: list[ManifestEntry] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for entry in self.entries:
            if not entry.clip_id:
                raise FormatError("manifest entries need a non-empty clip id")
            if entry.clip_id in seen:
                raise FormatError(f"duplicate clip id in manifest: {entry.clip_id!r}")
            seen.add(entry.clip_id)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def ids(self) -> list[str]:
        return [e.clip_id for e in self.entries]

    def captions(self) -> dict[str, str]:
        return {e.clip_id: e.caption for e in self.entries if e.caption}


def read_manifest(path: str | Path) -> CorpusManifest:
    """Load a line-delimited manifest; relative clip paths resolve against it.

    The ``id`` field is optional per record and falls back to the file stem.
    """
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"manifest not found: {path}")
    base = path.parent
    entries = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        if "path" not in record:
            raise FormatError(f"{path}:{lineno}: record missing 'path'")
        clip_path = Path(record["path"])
        if not clip_path.is_absolute():
            clip_path = base / clip_path
        clip_id = record.get("id") or clip_path.stem
        entries.append(ManifestEntry(clip_id=clip_id, path=clip_path, caption=record.get("caption")))
    return CorpusManifest(corpus_id=path.stem, entries=entries)


def write_manifest(manifest: CorpusManifest, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for entry in manifest.entries:
            record = {"id": entry.clip_id, "path": str(entry.path)}
            if entry.caption:
                record["caption"] = entry.caption
            fh.write(_dumps(record) + "\n")


# ---------------------------------------------------------------------------
# ADSC descriptor cache / embedding file (shared binary format)
# ---------------------------------------------------------------------------

def write_descriptors(
    dset: DescriptorSet, path: str | Path, meta: dict | None = None
) -> None:
    """Write a descriptor set as an ADSC file.

    Header (little-endian): magic "ADSC", version u32, kind u8, dim u32,
    count u64; then count rows of dim float32; then a UTF-8 JSON index block
    with the row->id mapping plus optional metadata.
    """
    path = Path(path)
    index: dict = {"ids": list(dset.ids), "corpus_id": dset.corpus_id}
    if meta:
        index["meta"] = meta
    blob = _HEADER.pack(
        ADSC_MAGIC, ADSC_VERSION, _KIND_CODES[dset.kind], dset.dim, len(dset)
    )
    blob += np.ascontiguousarray(dset.vectors, dtype="<f4").tobytes()
    blob += _dumps(index).encode("utf-8")
    path.write_bytes(blob)


def read_descriptors(path: str | Path) -> tuple[DescriptorSet, dict]:
    """Read an ADSC file; returns the descriptor set and its meta block."""
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"descriptor file not found: {path}")
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, kind_code, dim, count = _HEADER.unpack_from(blob)
    if magic != ADSC_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != ADSC_VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    if kind_code not in _CODE_KINDS:
        raise FormatError(f"{path}: unknown descriptor kind code {kind_code}")
    data_len = count * dim * 4
    body_start = _HEADER.size
    if len(blob) < body_start + data_len:
        raise FormatError(
            f"{path}: expected {data_len} bytes of row data for {count} rows "
            f"of dim {dim}, file too short"
        )
    vectors = np.frombuffer(
        blob, dtype="<f4", count=count * dim, offset=body_start
    ).reshape(count, dim)
    tail = blob[body_start + data_len :]
    try:
        index = json.loads(tail.decode("utf-8")) if tail else {"ids": []}
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FormatError(f"{path}: unreadable index block: {exc}") from exc
    if isinstance(index, list):  # bare id array is accepted
        index = {"ids": index}
    ids = index.get("ids")
    if not isinstance(ids, list) or len(ids) != count:
        raise FormatError(
            f"{path}: index block must map all {count} rows to ids"
        )
    if not np.isfinite(vectors).all():
        raise FormatError(f"{path}: descriptor rows contain non-finite values")
    dset = DescriptorSet(
        corpus_id=index.get("corpus_id", path.stem),
        kind=_CODE_KINDS[kind_code],
        ids=[str(i) for i in ids],
        vectors=vectors.copy(),
    )
    return dset, index.get("meta", {})


# ---------------------------------------------------------------------------
# Result files: line-delimited JSON with a leading meta record
# ---------------------------------------------------------------------------

def _match_record(m: ScoredMatch, retrieved: bool) -> dict:
    return {
        "record": "match",
        "query": m.query,
        "reference": m.reference,
        "raw": m.raw,
        "bias": m.bias,
        "normalized": m.normalized,
        "rank": m.rank,
        "retrieved": retrieved,
    }


def write_retrieval_result(
    result: RetrievalResult, path: str | Path, config_echo: dict | None = None
) -> None:
    """Write a retrieval result: meta line, then one line per scored query."""
    retrieved_keys = {(m.query, m.reference) for m in result.retrieved}
    meta = {
        "record": "meta",
        "type": "retrieval",
        "n_queries": result.n_queries,
        "n_retrieved": len(result.retrieved),
        "result_config": result.config,
        "config": config_echo or {},
    }
    lines = [_dumps(meta)]
    for m in sorted(result.all_top1, key=lambda m: (-m.normalized, m.query)):
        lines.append(_dumps(_match_record(m, (m.query, m.reference) in retrieved_keys)))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_retrieval_result(path: str | Path) -> tuple[dict, RetrievalResult]:
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"result file not found: {path}")
    meta: dict = {}
    all_top1: list[ScoredMatch] = []
    retrieved: list[ScoredMatch] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        kind = record.get("record")
        if kind == "meta":
            meta = record
        elif kind == "match":
            try:
                match = ScoredMatch(
                    query=record["query"],
                    reference=record["reference"],
                    raw=record["raw"],
                    bias=record["bias"],
                    normalized=record["normalized"],
                    rank=record["rank"],
                )
            except KeyError as exc:
                raise FormatError(f"{path}:{lineno}: match record missing {exc}") from exc
            all_top1.append(match)
            if record.get("retrieved"):
                retrieved.append(match)
        else:
            raise FormatError(f"{path}:{lineno}: unknown record type {kind!r}")
    retrieved.sort(key=lambda m: (-m.normalized, m.query))
    result = RetrievalResult(
        retrieved=retrieved, all_top1=all_top1, config=meta.get("result_config", {})
    )
    return meta, result


def write_histograms(
    histograms: list[ScoreHistogram], path: str | Path, config_echo: dict | None = None
) -> None:
    """One meta line, then one line per histogram: {edges, counts, label}."""
    lines = [_dumps({"record": "meta", "type": "histograms", "config": config_echo or {}})]
    for hist in histograms:
        lines.append(
            _dumps(
                {
                    "record": "histogram",
                    "label": hist.label,
                    "edges": hist.bin_edges.tolist(),
                    "counts": hist.counts.tolist(),
                }
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_histograms(path: str | Path) -> tuple[dict, list[ScoreHistogram]]:
    path = Path(path)
    meta: dict = {}
    out: list[ScoreHistogram] = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        if record.get("record") == "meta":
            meta = record
        elif record.get("record") == "histogram":
            out.append(
                ScoreHistogram(
                    bin_edges=np.asarray(record["edges"]),
                    counts=np.asarray(record["counts"]),
                    label=record.get("label", ""),
                )
            )
    return meta, out


def write_cluster_report(report, path: str | Path, config_echo: dict | None = None) -> None:
    """Meta line with the size summary, then one line per cluster."""
    meta = {
        "record": "meta",
        "type": "dedup",
        "tau": report.tau,
        "n_clips": report.n_clips,
        "n_clusters": len(report.clusters),
        "size_summary": {str(k): v for k, v in report.size_summary.items()},
        "config": config_echo or {},
    }
    lines = [_dumps(meta)]
    for cluster in report.clusters:
        lines.append(
            _dumps(
                {
                    "record": "cluster",
                    "component_id": cluster.component_id,
                    "members": sorted(cluster.members),
                    "pairwise_scores": report.cluster_edges(cluster),
                    "status": cluster.status,
                }
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_cluster_report(path: str | Path) -> tuple[dict, list[dict]]:
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"cluster report not found: {path}")
    meta: dict = {}
    clusters: list[dict] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
        if record.get("record") == "meta":
            meta = record
        elif record.get("record") == "cluster":
            clusters.append(record)
    return meta, clusters
