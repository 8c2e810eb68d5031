"""HTTP API tests for the triage service."""

import pytest
from fastapi.testclient import TestClient

from repliscan.service import create_app
from repliscan.triage import TriageSession

from tests.session_fixtures import build_rate_session, build_session


@pytest.fixture()
def client(tmp_path):
    clusters = [
        {
            "component_id": 0,
            "members": ["r000", "r001"],
            "pairwise_scores": [{"a": "r000", "b": "r001", "score_ab": 0.9, "score_ba": 0.88}],
            "status": "candidate",
        }
    ]
    session_dir = build_session(tmp_path / "session", n_pairs=6, clusters=clusters)
    session = TriageSession.load(session_dir)
    return TestClient(create_app(session))


class TestSessionEndpoint:
    def test_session_info(self, client):
        body = client.get("/api/session").json()
        assert body["results"][0]["kind"] == "mel"
        assert body["results"][0]["retrieved"] == 6
        assert body["results"][0]["queries"] == 8
        assert body["clusters"] == 1
        assert body["progress"]["pairs"] == 6
        assert "spectro-temporal" in body["rubric"]

    def test_empty_session(self, tmp_path):
        session_dir = build_session(tmp_path / "empty", n_pairs=0, n_extra_queries=3)
        client = TestClient(create_app(TriageSession.load(session_dir)))
        assert client.get("/api/session").json()["progress"]["pairs"] == 0
        assert client.get("/api/pairs").json()["items"] == []
        summary = client.get("/api/summary").json()
        assert summary["per_kind"]["mel"]["retrieved"] == 0


class TestPairsEndpoint:
    def test_ranked_order_and_fields(self, client):
        body = client.get("/api/pairs").json()
        assert body["total"] == 6
        scores = [item["normalized"] for item in body["items"]]
        assert scores == sorted(scores, reverse=True)
        first = body["items"][0]
        assert set(first) >= {"query", "reference", "raw", "bias", "normalized", "rank"}
        assert first["query_caption"] == "query clip 0"

    def test_pagination(self, client):
        page = client.get("/api/pairs", params={"offset": 4, "limit": 2}).json()
        assert len(page["items"]) == 2
        assert page["items"][0]["query"] == "q004"

    def test_filter_unreviewed_shrinks_after_verdict(self, client):
        assert client.get("/api/pairs", params={"filter": "unreviewed"}).json()["total"] == 6
        client.post(
            "/api/verdicts",
            json={
                "pair": {"query": "q000", "reference": "r000"},
                "label": "replicated",
                "annotator": "ann",
            },
        ).raise_for_status()
        assert client.get("/api/pairs", params={"filter": "unreviewed"}).json()["total"] == 5
        replicated = client.get("/api/pairs", params={"filter": "replicated"}).json()
        assert replicated["total"] == 1

    def test_unknown_filter_rejected(self, client):
        assert client.get("/api/pairs", params={"filter": "bogus"}).status_code == 422


class TestVerdictEndpoint:
    def test_post_then_summary_reflects_it(self, client):
        response = client.post(
            "/api/verdicts",
            json={
                "pair": {"query": "q001", "reference": "r001"},
                "label": "replicated",
                "annotator": "ann",
            },
        )
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "recorded"
        summary = client.get("/api/summary").json()
        assert summary["per_kind"]["mel"]["replicated"] == 1

    def test_unknown_pair_rejected(self, client):
        response = client.post(
            "/api/verdicts",
            json={
                "pair": {"query": "q000", "reference": "r005"},
                "label": "replicated",
                "annotator": "ann",
            },
        )
        assert response.status_code == 422

    def test_unknown_label_rejected(self, client):
        response = client.post(
            "/api/verdicts",
            json={
                "pair": {"query": "q000", "reference": "r000"},
                "label": "perhaps",
                "annotator": "ann",
            },
        )
        assert response.status_code == 422

    def test_pair_and_cluster_mutually_exclusive(self, client):
        response = client.post(
            "/api/verdicts",
            json={
                "pair": {"query": "q000", "reference": "r000"},
                "cluster_id": 0,
                "label": "replicated",
                "annotator": "ann",
            },
        )
        assert response.status_code == 422

    def test_cluster_verdict_updates_status(self, client):
        client.post(
            "/api/verdicts",
            json={"cluster_id": 0, "label": "confirmed", "annotator": "ann"},
        ).raise_for_status()
        clusters = client.get("/api/clusters").json()
        assert clusters["items"][0]["status"] == "confirmed"
        summary = client.get("/api/summary").json()
        assert summary["clusters"]["confirmed"] == 1


class TestMediaEndpoints:
    def test_audio_round_trip(self, client, tmp_path):
        response = client.get("/api/clips/q000/audio")
        assert response.status_code == 200
        assert response.headers["content-type"] == "audio/wav"
        assert response.content[:4] == b"RIFF"

    def test_audio_unknown_clip_404(self, client):
        assert client.get("/api/clips/ghost/audio").status_code == 404

    def test_spectrogram_bytes_stable_across_requests(self, client):
        a = client.get("/api/clips/q000/spectrogram")
        b = client.get("/api/clips/q000/spectrogram")
        assert a.status_code == 200
        assert a.headers["content-type"] == "image/png"
        assert a.content == b.content
        assert a.content[:8] == b"\x89PNG\r\n\x1a\n"

    def test_spectrogram_unknown_clip_404(self, client):
        assert client.get("/api/clips/ghost/spectrogram").status_code == 404


class TestSummaryEndpoint:
    def test_rate_fixture_31_of_178(self, tmp_path):
        session = TriageSession.load(build_rate_session(tmp_path / "rate"))
        client = TestClient(create_app(session))
        pairs = client.get("/api/pairs", params={"limit": 1000}).json()["items"]
        assert len(pairs) == 178
        for i, item in enumerate(pairs):
            client.post(
                "/api/verdicts",
                json={
                    "pair": {"query": item["query"], "reference": item["reference"]},
                    "label": "replicated" if i < 31 else "not_replicated",
                    "annotator": "ann",
                },
            ).raise_for_status()
        stats = client.get("/api/summary").json()["per_kind"]["mel"]
        assert stats["replicated"] == 31
        assert stats["replicated_rate"] == pytest.approx(0.1742, abs=1e-4)

    def test_policy_parameter(self, client):
        client.post(
            "/api/verdicts",
            json={
                "pair": {"query": "q000", "reference": "r000"},
                "label": "replicated",
                "annotator": "alice",
            },
        ).raise_for_status()
        client.post(
            "/api/verdicts",
            json={
                "pair": {"query": "q000", "reference": "r000"},
                "label": "not_replicated",
                "annotator": "bob",
            },
        ).raise_for_status()
        majority = client.get("/api/summary", params={"policy": "majority"}).json()
        any_pos = client.get("/api/summary", params={"policy": "any_positive"}).json()
        assert majority["per_kind"]["mel"]["replicated"] == 0
        assert any_pos["per_kind"]["mel"]["replicated"] == 1
        assert client.get("/api/summary", params={"policy": "x"}).status_code == 422

    def test_restart_preserves_state(self, tmp_path):
        session_dir = build_session(tmp_path / "restart", n_pairs=4)
        client1 = TestClient(create_app(TriageSession.load(session_dir)))
        for i in range(4):
            client1.post(
                "/api/verdicts",
                json={
                    "pair": {"query": f"q{i:03d}", "reference": f"r{i:03d}"},
                    "label": "unsure",
                    "annotator": "ann",
                },
            ).raise_for_status()
        client2 = TestClient(create_app(TriageSession.load(session_dir)))
        assert client2.get("/api/session").json()["progress"]["reviewed"] == 4
        assert client2.get("/api/summary").json() == client1.get("/api/summary").json()


class TestIndexFallback:
    def test_placeholder_served_without_frontend(self, client):
        response = client.get("/")
        assert response.status_code == 200
        assert "triage" in response.text
