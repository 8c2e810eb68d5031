"""Human verification stage: sessions, verdict log, statistics, spectrograms.

A triage session wraps one or more retrieval results (one per descriptor
kind) and/or a dedup cluster report, plus the corpus manifests needed to
serve audio. Human judgments land in an append-only line-delimited log;
replaying the log reconstructs the exact service state, and the latest
verdict per (key, annotator) wins.
"""

from __future__ import annotations

import io
import json
import logging
import threading
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from PIL import Image

from . import melspec
from .corpus import load_clip
from .errors import ContractError, FormatError, IngestionError
from .formats import (
    CorpusManifest,
    read_cluster_report,
    read_manifest,
    read_retrieval_result,
)
from .similarity import ScoredMatch

logger = logging.getLogger(__name__)

PAIR_LABELS = ("replicated", "not_replicated", "unsure")
CLUSTER_LABELS = ("confirmed", "rejected")
CONSENSUS_POLICIES = ("majority", "any_positive")

SESSION_FILE = "session.json"
DEFAULT_VERDICT_LOG = "verdicts.jsonl"

SPECTROGRAM_SIZE = (856, 512)  # width, height
SPECTROGRAM_DB_RANGE = 80.0


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


@dataclass(frozen=True)
class Verdict:
    """One human judgment for a retrieved pair or a duplicate cluster."""

    key: tuple  # ("pair", query, reference) or ("cluster", component_id)
    label: str
    annotator: str
    timestamp: str
    note: str | None = None

    def __post_init__(self):
        kind = self.key[0] if self.key else None
        if kind == "pair":
            if len(self.key) != 3:
                raise ContractError(f"pair key must be ('pair', query, reference): {self.key}")
            if self.label not in PAIR_LABELS:
                raise ContractError(f"unknown pair label {self.label!r}; expected {PAIR_LABELS}")
        elif kind == "cluster":
            if len(self.key) != 2:
                raise ContractError(f"cluster key must be ('cluster', component_id): {self.key}")
            if self.label not in CLUSTER_LABELS:
                raise ContractError(
                    f"unknown cluster label {self.label!r}; expected {CLUSTER_LABELS}"
                )
        else:
            raise ContractError(f"unknown verdict key kind {kind!r}")
        if not self.annotator:
            raise ContractError("verdicts need a non-empty annotator")

    def to_record(self) -> dict:
        if self.key[0] == "pair":
            key = {"kind": "pair", "query": self.key[1], "reference": self.key[2]}
        else:
            key = {"kind": "cluster", "component_id": self.key[1]}
        record = {
            "key": key,
            "label": self.label,
            "annotator": self.annotator,
            "timestamp": self.timestamp,
        }
        if self.note:
            record["note"] = self.note
        return record

    @classmethod
    def from_record(cls, record: dict) -> "Verdict":
        key = record.get("key", {})
        if key.get("kind") == "pair":
            tup = ("pair", key["query"], key["reference"])
        elif key.get("kind") == "cluster":
            tup = ("cluster", int(key["component_id"]))
        else:
            raise FormatError(f"unknown verdict key in log: {key!r}")
        return cls(
            key=tup,
            label=record["label"],
            annotator=record["annotator"],
            timestamp=record["timestamp"],
            note=record.get("note"),
        )


class VerdictLog:
    """Append-only verdict store; state is the latest verdict per (key, annotator)."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.current: dict[tuple, Verdict] = {}
        if self.path.is_file():
            self._replay()

    def _replay(self) -> None:
        for lineno, line in enumerate(
            self.path.read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line.strip():
                continue
            try:
                verdict = Verdict.from_record(json.loads(line))
            except (json.JSONDecodeError, KeyError, ContractError) as exc:
                raise FormatError(f"{self.path}:{lineno}: bad verdict record: {exc}") from exc
            self.current[(verdict.key, verdict.annotator)] = verdict

    def record(self, verdict: Verdict) -> None:
        """Append the verdict; writes are serialized through one lock."""
        line = json.dumps(verdict.to_record(), sort_keys=True, separators=(",", ":"))
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()
            self.current[(verdict.key, verdict.annotator)] = verdict

    def for_key(self, key: tuple) -> list[Verdict]:
        return sorted(
            (v for (k, _), v in self.current.items() if k == key),
            key=lambda v: v.annotator,
        )

    def __len__(self) -> int:
        return len(self.current)


def consensus_label(labels: list[str], policy: str = "majority") -> str | None:
    """Combine one label per annotator into a single pair judgment."""
    if policy not in CONSENSUS_POLICIES:
        raise ContractError(f"unknown consensus policy {policy!r}")
    if not labels:
        return None
    if policy == "any_positive":
        if "replicated" in labels:
            return "replicated"
        if all(label == "not_replicated" for label in labels):
            return "not_replicated"
        return "unsure"
    counts = Counter(labels)
    top, top_count = counts.most_common(1)[0]
    if top_count * 2 > len(labels):
        return top
    return "unsure"


def cluster_status(labels: list[str]) -> str:
    """Cluster review status under majority; ties stay unresolved."""
    if not labels:
        return "candidate"
    counts = Counter(labels)
    confirmed = counts.get("confirmed", 0)
    rejected = counts.get("rejected", 0)
    if confirmed > rejected:
        return "confirmed"
    if rejected > confirmed:
        return "rejected"
    return "candidate"


@dataclass
class SessionPair:
    """One retrieved (query, reference) pair ready for review."""

    kind: str
    match: ScoredMatch
    query_caption: str | None = None
    reference_caption: str | None = None

    @property
    def key(self) -> tuple:
        return ("pair", self.match.query, self.match.reference)


@dataclass
class SessionResult:
    """One retrieval result tagged by descriptor kind."""

    kind: str
    n_queries: int
    retrieved: list[ScoredMatch]
    path: str


class TriageSession:
    """Immutable review inputs plus the one mutable thing: the verdict log."""

    def __init__(
        self,
        results: list[SessionResult],
        clusters: list[dict],
        manifests: dict[str, CorpusManifest],
        verdict_log: VerdictLog,
        session_dir: Path,
    ):
        self.results = results
        self.clusters = clusters
        self.manifests = manifests
        self.verdicts = verdict_log
        self.session_dir = session_dir
        self._clip_paths: dict[str, Path] = {}
        self._captions: dict[str, str] = {}
        for manifest in manifests.values():
            for entry in manifest.entries:
                self._clip_paths.setdefault(entry.clip_id, entry.path)
                if entry.caption:
                    self._captions.setdefault(entry.clip_id, entry.caption)
        self.pairs: list[SessionPair] = []
        seen: set[tuple] = set()
        for result in results:
            for match in result.retrieved:
                pair = SessionPair(
                    kind=result.kind,
                    match=match,
                    query_caption=self._captions.get(match.query),
                    reference_caption=self._captions.get(match.reference),
                )
                if pair.key not in seen:
                    seen.add(pair.key)
                    self.pairs.append(pair)
        self.pairs.sort(key=lambda p: (-p.match.normalized, p.match.query))
        self._pair_keys = {p.key for p in self.pairs}
        self._cluster_ids = {int(c["component_id"]) for c in clusters}
        self._spectrogram_cache: dict[str, bytes] = {}

    # -- loading ------------------------------------------------------------

    @classmethod
    def load(cls, session_dir: str | Path) -> "TriageSession":
        """Open a session directory; missing inputs raise one combined error."""
        session_dir = Path(session_dir)
        if not session_dir.is_dir():
            raise IngestionError(f"session directory not found: {session_dir}")
        spec_path = session_dir / SESSION_FILE
        if spec_path.is_file():
            try:
                spec = json.loads(spec_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise FormatError(f"{spec_path}: invalid JSON: {exc}") from exc
        else:
            spec = cls._discover(session_dir)

        missing: list[str] = []
        results: list[SessionResult] = []
        for item in spec.get("results", []):
            result_path = session_dir / item["path"]
            if not result_path.is_file():
                missing.append(str(result_path))
                continue
            meta, result = read_retrieval_result(result_path)
            kind = item.get("kind") or meta.get("result_config", {}).get(
                "descriptor_kind", "mel"
            )
            results.append(
                SessionResult(
                    kind=kind,
                    n_queries=result.n_queries,
                    retrieved=result.retrieved,
                    path=item["path"],
                )
            )

        clusters: list[dict] = []
        if spec.get("clusters"):
            cluster_path = session_dir / spec["clusters"]
            if not cluster_path.is_file():
                missing.append(str(cluster_path))
            else:
                _, clusters = read_cluster_report(cluster_path)

        manifests: dict[str, CorpusManifest] = {}
        for role, name in (spec.get("manifests") or {}).items():
            manifest_path = session_dir / name
            if not manifest_path.is_file():
                missing.append(str(manifest_path))
            else:
                manifests[role] = read_manifest(manifest_path)

        if not spec.get("results") and not spec.get("clusters"):
            missing.append(f"{session_dir}: no retrieval result or cluster report")
        if missing:
            raise IngestionError(
                "session is missing required inputs: " + ", ".join(missing)
            )

        log_path = session_dir / (spec.get("verdicts") or DEFAULT_VERDICT_LOG)
        return cls(
            results=results,
            clusters=clusters,
            manifests=manifests,
            verdict_log=VerdictLog(log_path),
            session_dir=session_dir,
        )

    @staticmethod
    def _discover(session_dir: Path) -> dict:
        """Conventional layout when session.json is absent."""
        spec: dict = {"results": [], "manifests": {}}
        if (session_dir / "retrieval.jsonl").is_file():
            spec["results"].append({"path": "retrieval.jsonl"})
        if (session_dir / "clusters.jsonl").is_file():
            spec["clusters"] = "clusters.jsonl"
        for role in ("queries", "references", "background"):
            name = f"{role}.jsonl"
            if (session_dir / name).is_file():
                spec["manifests"][role] = name
        return spec

    # -- review -------------------------------------------------------------

    def pair_state(self, pair: SessionPair) -> list[dict]:
        return [
            {
                "annotator": v.annotator,
                "label": v.label,
                "timestamp": v.timestamp,
                "note": v.note,
            }
            for v in self.verdicts.for_key(pair.key)
        ]

    def record_verdict(self, verdict: Verdict) -> None:
        """Validate the key against session contents, then append."""
        if verdict.key[0] == "pair":
            if verdict.key not in self._pair_keys:
                raise ContractError(
                    f"unknown pair ({verdict.key[1]}, {verdict.key[2]}) for this session"
                )
        else:
            if verdict.key[1] not in self._cluster_ids:
                raise ContractError(f"unknown cluster id {verdict.key[1]} for this session")
        self.verdicts.record(verdict)

    def progress(self) -> dict:
        reviewed = {p.key for p in self.pairs} & {
            key for (key, _) in self.verdicts.current if key[0] == "pair"
        }
        label_counts = Counter()
        for pair in self.pairs:
            labels = [v.label for v in self.verdicts.for_key(pair.key)]
            label = consensus_label(labels)
            if label:
                label_counts[label] += 1
        return {
            "pairs": len(self.pairs),
            "reviewed": len(reviewed),
            "remaining": len(self.pairs) - len(reviewed),
            "by_label": dict(label_counts),
        }

    # -- statistics -----------------------------------------------------------

    def replicated_sets(self, policy: str = "majority") -> dict[str, set[str]]:
        """Query ids judged replicated, per descriptor kind."""
        out: dict[str, set[str]] = {}
        for result in self.results:
            replicated = set()
            for match in result.retrieved:
                key = ("pair", match.query, match.reference)
                labels = [v.label for v in self.verdicts.for_key(key)]
                if consensus_label(labels, policy) == "replicated":
                    replicated.add(match.query)
            out[result.kind] = replicated
        return out

    def summary(self, policy: str = "majority") -> dict:
        """Replication statistics: counts, rates, cross-kind overlap."""
        replicated_sets = self.replicated_sets(policy)
        per_kind = {}
        for result in self.results:
            replicated = len(replicated_sets[result.kind])
            reviewed = 0
            label_counts = Counter()
            for match in result.retrieved:
                key = ("pair", match.query, match.reference)
                labels = [v.label for v in self.verdicts.for_key(key)]
                if labels:
                    reviewed += 1
                label = consensus_label(labels, policy)
                if label:
                    label_counts[label] += 1
            retrieved = len(result.retrieved)
            per_kind[result.kind] = {
                "queries": result.n_queries,
                "retrieved": retrieved,
                "reviewed": reviewed,
                "by_label": dict(label_counts),
                "replicated": replicated,
                "replicated_rate": (replicated / retrieved) if retrieved and reviewed else None,
                "replicated_per_10k_queries": (
                    replicated * 10_000.0 / result.n_queries
                    if result.n_queries and reviewed
                    else None
                ),
            }
        overlap = {}
        kinds = sorted(replicated_sets)
        for i, a in enumerate(kinds):
            for b in kinds[i + 1 :]:
                overlap[f"{a}:{b}"] = len(replicated_sets[a] & replicated_sets[b])
        cluster_counts = Counter(
            cluster_status(
                [v.label for v in self.verdicts.for_key(("cluster", int(c["component_id"])))]
            )
            for c in self.clusters
        )
        return {
            "policy": policy,
            "per_kind": per_kind,
            "overlap": overlap,
            "clusters": {
                "total": len(self.clusters),
                "confirmed": cluster_counts.get("confirmed", 0),
                "rejected": cluster_counts.get("rejected", 0),
                "candidate": cluster_counts.get("candidate", 0),
            },
            "verdicts_recorded": len(self.verdicts),
        }

    # -- media ----------------------------------------------------------------

    def clip_path(self, clip_id: str) -> Path:
        try:
            return self._clip_paths[clip_id]
        except KeyError:
            raise KeyError(clip_id) from None

    def caption(self, clip_id: str) -> str | None:
        return self._captions.get(clip_id)

    def spectrogram_png(self, clip_id: str) -> bytes:
        """Deterministic PNG spectrogram; rendered once per clip, then cached."""
        cached = self._spectrogram_cache.get(clip_id)
        if cached is None:
            clip = load_clip(self.clip_path(clip_id), clip_id=clip_id)
            cached = render_spectrogram(clip.samples)
            self._spectrogram_cache[clip_id] = cached
        return cached


# -- spectrogram rendering ----------------------------------------------------

def _heat_lut() -> np.ndarray:
    """256-entry black-red-yellow-white ramp (analytic, dependency-free)."""
    x = np.linspace(0.0, 1.0, 256)
    r = np.clip(3.0 * x, 0.0, 1.0)
    g = np.clip(3.0 * x - 1.0, 0.0, 1.0)
    b = np.clip(3.0 * x - 2.0, 0.0, 1.0)
    return (np.stack([r, g, b], axis=1) * 255.0).round().astype(np.uint8)


_LUT = _heat_lut()


def render_spectrogram(samples: np.ndarray, size: tuple[int, int] = SPECTROGRAM_SIZE) -> bytes:
    """Render a clip as a PNG: log power vs. time, color scale [-80, 0] dB.

    Frequency runs bottom (0 Hz) to top (Nyquist), linear axis. The bytes
    are a pure function of the samples, so repeated calls are identical.
    """
    spectrum = melspec.stft(samples)
    power = np.abs(spectrum) ** 2
    peak = power.max()
    if peak <= 0.0:
        db = np.full(power.shape, -SPECTROGRAM_DB_RANGE)
    else:
        with np.errstate(divide="ignore"):
            db = np.maximum(10.0 * np.log10(power / peak), -SPECTROGRAM_DB_RANGE)
    # (frames, bins) -> image rows: high frequency at the top
    img = ((db.T[::-1] + SPECTROGRAM_DB_RANGE) / SPECTROGRAM_DB_RANGE * 255.0).round()
    rgb = _LUT[img.astype(np.uint8)]
    image = Image.fromarray(rgb, mode="RGB").resize(size, Image.NEAREST)
    buf = io.BytesIO()
    image.save(buf, format="PNG")
    return buf.getvalue()


def frequency_row(freq_hz: float, size: tuple[int, int] = SPECTROGRAM_SIZE) -> int:
    """Image row (from the top) where a given frequency lands."""
    nyquist = melspec.SAMPLE_RATE / 2
    frac = min(max(freq_hz / nyquist, 0.0), 1.0)
    return int(round((1.0 - frac) * (size[1] - 1)))
