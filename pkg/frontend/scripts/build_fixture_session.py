#!/usr/bin/env python3
"""Build a triage session directory for frontend tests.

Creates real wav clips, manifests, a retrieval result with the requested
number of retrieved pairs, and (optionally) a cluster report. Scores are
synthetic but follow the server's invariants (descending by rank order).

Usage:
    build_fixture_session.py OUT_DIR --pairs 20 [--extra 2] [--clusters]
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from repliscan.formats import (
    CorpusManifest,
    ManifestEntry,
    write_manifest,
    write_retrieval_result,
)
from repliscan.melspec import CLIP_SAMPLES, SAMPLE_RATE
from repliscan.retrieval import RetrievalResult
from repliscan.similarity import ScoredMatch


def sine_wav(path: Path, freq: float) -> None:
    t = np.arange(CLIP_SAMPLES) / SAMPLE_RATE
    data = 0.4 * np.sin(2.0 * np.pi * freq * t)
    wavfile.write(path, SAMPLE_RATE, (data * 32767.0).astype(np.int16))


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("out_dir", type=Path)
    parser.add_argument("--pairs", type=int, default=20)
    parser.add_argument("--extra", type=int, default=2, help="scored but unretrieved queries")
    parser.add_argument("--clusters", action="store_true")
    parser.add_argument("--shared-audio", action="store_true",
                        help="all pairs reference two shared clips (fast, for stats-only tests)")
    args = parser.parse_args()

    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    audio_dir = out / "audio"
    audio_dir.mkdir(exist_ok=True)

    total = args.pairs + args.extra
    if args.shared_audio:
        sine_wav(audio_dir / "q_shared.wav", 440.0)
        sine_wav(audio_dir / "r_shared.wav", 660.0)
        q_entries = [ManifestEntry("q_shared", audio_dir / "q_shared.wav")]
        r_entries = [ManifestEntry("r_shared", audio_dir / "r_shared.wav")]
        pair_ids = [(f"gen{i:04d}", f"ref{i:04d}") for i in range(total)]
    else:
        q_entries, r_entries, pair_ids = [], [], []
        for i in range(total):
            qid, rid = f"q{i:03d}", f"r{i:03d}"
            sine_wav(audio_dir / f"{qid}.wav", 300.0 + 25.0 * i)
            sine_wav(audio_dir / f"{rid}.wav", 300.0 + 25.0 * i)
            q_entries.append(
                ManifestEntry(qid, audio_dir / f"{qid}.wav", caption=f"clip {i} prompt")
            )
            r_entries.append(ManifestEntry(rid, audio_dir / f"{rid}.wav"))
            pair_ids.append((qid, rid))

    write_manifest(CorpusManifest("queries", q_entries), out / "queries.jsonl")
    write_manifest(CorpusManifest("references", r_entries), out / "references.jsonl")

    matches = [
        ScoredMatch(qid, rid, 0.95 - 0.001 * i, 0.3, 0.80 - 0.001 * i, 1)
        for i, (qid, rid) in enumerate(pair_ids)
    ]
    result = RetrievalResult(
        retrieved=matches[: args.pairs],
        all_top1=matches,
        config={"tau": 0.80 - 0.001 * (args.pairs - 1), "descriptor_kind": "mel"},
    )
    write_retrieval_result(result, out / "retrieval.jsonl")

    spec = {
        "results": [{"kind": "mel", "path": "retrieval.jsonl"}],
        "manifests": {"queries": "queries.jsonl", "references": "references.jsonl"},
        "verdicts": "verdicts.jsonl",
    }
    if args.clusters:
        members = [rid for _, rid in pair_ids[:3]]
        lines = [json.dumps({"record": "meta", "type": "dedup", "tau": 0.5025})]
        lines.append(
            json.dumps(
                {
                    "record": "cluster",
                    "component_id": 0,
                    "members": members,
                    "pairwise_scores": [
                        {"a": members[0], "b": members[1], "score_ab": 0.61, "score_ba": 0.59}
                    ],
                    "status": "candidate",
                }
            )
        )
        (out / "clusters.jsonl").write_text("\n".join(lines) + "\n")
        spec["clusters"] = "clusters.jsonl"

    (out / "session.json").write_text(json.dumps(spec, indent=2))
    print(f"session ready: {out} ({args.pairs} pairs, {args.extra} extra queries)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
