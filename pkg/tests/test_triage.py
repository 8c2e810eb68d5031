"""Verification-stage tests: verdict log, session state, stats, spectrograms."""

import numpy as np
import pytest
from PIL import Image

from repliscan.errors import ContractError, IngestionError
from repliscan.melspec import CLIP_SAMPLES
from repliscan.triage import (
    TriageSession,
    Verdict,
    VerdictLog,
    consensus_label,
    frequency_row,
    render_spectrogram,
    utc_now,
)

from tests.conftest import sine_clip
from tests.session_fixtures import build_rate_session, build_session


def pair_verdict(query, reference, label, annotator="ann", note=None):
    return Verdict(
        key=("pair", query, reference),
        label=label,
        annotator=annotator,
        timestamp=utc_now(),
        note=note,
    )


class TestVerdictLog:
    def test_append_and_replay(self, tmp_path):
        path = tmp_path / "log.jsonl"
        log = VerdictLog(path)
        for i in range(10):
            log.record(pair_verdict(f"q{i}", "r0", "replicated"))
        restored = VerdictLog(path)
        assert len(restored) == 10
        assert restored.current == log.current

    def test_latest_wins_per_annotator(self, tmp_path):
        log = VerdictLog(tmp_path / "log.jsonl")
        log.record(pair_verdict("q0", "r0", "replicated"))
        log.record(pair_verdict("q0", "r0", "not_replicated"))
        (verdict,) = log.for_key(("pair", "q0", "r0"))
        assert verdict.label == "not_replicated"

    def test_two_annotators_both_retained(self, tmp_path):
        log = VerdictLog(tmp_path / "log.jsonl")
        log.record(pair_verdict("q0", "r0", "replicated", annotator="alice"))
        log.record(pair_verdict("q0", "r0", "not_replicated", annotator="bob"))
        labels = {v.annotator: v.label for v in log.for_key(("pair", "q0", "r0"))}
        assert labels == {"alice": "replicated", "bob": "not_replicated"}

    def test_log_is_append_only(self, tmp_path):
        path = tmp_path / "log.jsonl"
        log = VerdictLog(path)
        log.record(pair_verdict("q0", "r0", "replicated"))
        first = path.read_text()
        log.record(pair_verdict("q1", "r1", "unsure"))
        assert path.read_text().startswith(first)

    def test_unknown_label_rejected(self):
        with pytest.raises(ContractError, match="label"):
            pair_verdict("q0", "r0", "maybe")

    def test_cluster_labels(self):
        v = Verdict(("cluster", 3), "confirmed", "ann", utc_now())
        assert v.to_record()["key"] == {"kind": "cluster", "component_id": 3}
        with pytest.raises(ContractError):
            Verdict(("cluster", 3), "replicated", "ann", utc_now())


class TestConsensus:
    def test_majority(self):
        assert consensus_label(["replicated", "replicated", "not_replicated"]) == "replicated"
        assert consensus_label(["replicated", "not_replicated"]) == "unsure"
        assert consensus_label([]) is None

    def test_any_positive(self):
        assert consensus_label(["not_replicated", "replicated"], "any_positive") == "replicated"
        assert consensus_label(["not_replicated", "not_replicated"], "any_positive") == "not_replicated"
        assert consensus_label(["not_replicated", "unsure"], "any_positive") == "unsure"

    def test_unknown_policy(self):
        with pytest.raises(ContractError):
            consensus_label(["replicated"], "coin_flip")


class TestTriageSession:
    def test_load_orders_pairs_by_score(self, tmp_path):
        session = TriageSession.load(build_session(tmp_path / "s", n_pairs=5))
        scores = [p.match.normalized for p in session.pairs]
        assert scores == sorted(scores, reverse=True)
        assert len(session.pairs) == 5

    def test_missing_inputs_listed(self, tmp_path):
        session_dir = build_session(tmp_path / "s")
        (session_dir / "retrieval.jsonl").unlink()
        (session_dir / "references.jsonl").unlink()
        with pytest.raises(IngestionError) as excinfo:
            TriageSession.load(session_dir)
        message = str(excinfo.value)
        assert "retrieval.jsonl" in message and "references.jsonl" in message

    def test_empty_session_dir_rejected(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        with pytest.raises(IngestionError):
            TriageSession.load(empty)

    def test_record_and_progress(self, tmp_path):
        session = TriageSession.load(build_session(tmp_path / "s", n_pairs=4))
        assert session.progress() == {"pairs": 4, "reviewed": 0, "remaining": 4, "by_label": {}}
        session.record_verdict(pair_verdict("q000", "r000", "replicated"))
        progress = session.progress()
        assert progress["reviewed"] == 1
        assert progress["by_label"] == {"replicated": 1}

    def test_unknown_pair_rejected(self, tmp_path):
        session = TriageSession.load(build_session(tmp_path / "s", n_pairs=2))
        with pytest.raises(ContractError, match="unknown pair"):
            session.record_verdict(pair_verdict("q000", "r001", "replicated"))

    def test_restart_restores_verdicts(self, tmp_path):
        session_dir = build_session(tmp_path / "s", n_pairs=10, n_extra_queries=0)
        session = TriageSession.load(session_dir)
        for i in range(10):
            session.record_verdict(
                pair_verdict(f"q{i:03d}", f"r{i:03d}", "replicated" if i % 2 else "unsure")
            )
        reloaded = TriageSession.load(session_dir)
        assert reloaded.verdicts.current == session.verdicts.current
        assert reloaded.progress() == session.progress()

    def test_resubmission_is_idempotent(self, tmp_path):
        session = TriageSession.load(build_session(tmp_path / "s", n_pairs=2))
        verdict = pair_verdict("q000", "r000", "replicated")
        session.record_verdict(verdict)
        before = session.summary()
        session.record_verdict(verdict)
        assert session.summary() == before

    def test_session_never_mutates_inputs(self, tmp_path):
        session_dir = build_session(tmp_path / "s", n_pairs=3)
        protected = [
            session_dir / "retrieval.jsonl",
            session_dir / "queries.jsonl",
            session_dir / "references.jsonl",
        ]
        snapshots = {p: p.read_bytes() for p in protected}
        session = TriageSession.load(session_dir)
        session.record_verdict(pair_verdict("q000", "r000", "replicated"))
        session.summary()
        session.spectrogram_png("q000")
        for path, blob in snapshots.items():
            assert path.read_bytes() == blob


class TestReplicationStats:
    def test_thirty_one_of_178(self, tmp_path):
        session = TriageSession.load(build_rate_session(tmp_path / "s"))
        for match in session.results[0].retrieved[:31]:
            session.record_verdict(pair_verdict(match.query, match.reference, "replicated"))
        for match in session.results[0].retrieved[31:]:
            session.record_verdict(pair_verdict(match.query, match.reference, "not_replicated"))
        stats = session.summary()["per_kind"]["mel"]
        assert stats["retrieved"] == 178
        assert stats["replicated"] == 31
        assert stats["replicated_rate"] == pytest.approx(31 / 178, abs=1e-9)
        assert stats["replicated_per_10k_queries"] == pytest.approx(31 / 178 * 10_000)

    def test_no_verdicts_rates_undefined(self, tmp_path):
        session = TriageSession.load(build_session(tmp_path / "s", n_pairs=3))
        stats = session.summary()["per_kind"]["mel"]
        assert stats["replicated"] == 0
        assert stats["replicated_rate"] is None
        assert stats["replicated_per_10k_queries"] is None

    def test_cross_kind_overlap(self, tmp_path):
        from repliscan.formats import write_retrieval_result
        from repliscan.retrieval import RetrievalResult
        from repliscan.similarity import ScoredMatch
        import json

        session_dir = build_session(tmp_path / "s", n_pairs=4, n_extra_queries=0)
        # second result of imported kind: shares query q002 and q003
        matches = [
            ScoredMatch("q002", "r002", 0.9, 0.1, 0.85, 1),
            ScoredMatch("q003", "r003", 0.8, 0.1, 0.75, 1),
            ScoredMatch("q004x", "r000", 0.7, 0.1, 0.65, 1),
        ]
        write_retrieval_result(
            RetrievalResult(matches, matches, {"descriptor_kind": "imported"}),
            session_dir / "retrieval_imported.jsonl",
        )
        spec = json.loads((session_dir / "session.json").read_text())
        spec["results"].append({"kind": "imported", "path": "retrieval_imported.jsonl"})
        (session_dir / "session.json").write_text(json.dumps(spec))

        session = TriageSession.load(session_dir)
        # mel replicated: q000, q001, q002; imported replicated: q002, q004x
        for q, r in [("q000", "r000"), ("q001", "r001"), ("q002", "r002")]:
            session.record_verdict(pair_verdict(q, r, "replicated"))
        session.record_verdict(pair_verdict("q004x", "r000", "replicated"))
        summary = session.summary()
        assert summary["overlap"] == {"imported:mel": 1}

    def test_summary_is_pure_function_of_log(self, tmp_path):
        session_dir = build_session(tmp_path / "s", n_pairs=3)
        session = TriageSession.load(session_dir)
        session.record_verdict(pair_verdict("q001", "r001", "replicated"))
        a = session.summary()
        b = TriageSession.load(session_dir).summary()
        assert a == b


class TestSpectrogram:
    def test_silent_clip_uniform_minimum_color(self):
        png = render_spectrogram(np.zeros(CLIP_SAMPLES))
        image = np.asarray(Image.open(__import__("io").BytesIO(png)))
        assert image.shape == (512, 856, 3)
        assert len(np.unique(image.reshape(-1, 3), axis=0)) == 1

    def test_sine_band_at_expected_row(self):
        png = render_spectrogram(sine_clip(1000.0))
        image = np.asarray(Image.open(__import__("io").BytesIO(png))).astype(float)
        intensity = image.sum(axis=(1, 2))
        assert abs(int(np.argmax(intensity)) - frequency_row(1000.0)) <= 4

    def test_rendering_is_deterministic(self, rng):
        clip = rng.normal(size=CLIP_SAMPLES) * 0.2
        assert render_spectrogram(clip) == render_spectrogram(clip)

    def test_unknown_clip_raises_keyerror(self, tmp_path):
        session = TriageSession.load(build_session(tmp_path / "s", n_pairs=2))
        with pytest.raises(KeyError):
            session.spectrogram_png("ghost")
