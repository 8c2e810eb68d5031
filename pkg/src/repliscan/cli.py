"""Command-line front end for the pipeline.

Batch stages (extract, retrieve, dedup, hist) run the core library directly
on local files; ``serve`` starts the HTTP triage service for the human
verification stage. Exit codes: 0 success, 1 input error, 2 contract or
configuration violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import dedup as dedup_mod
from . import retrieval as retrieval_mod
from .config import PipelineConfig, load_config
from .corpus import import_embeddings, ingest_corpus
from .descriptors import DescriptorSet
from .errors import (
    ConfigError,
    ContractError,
    FormatError,
    IngestionError,
    IngestionReport,
    RepliscanError,
)
from .formats import (
    read_descriptors,
    read_manifest,
    read_retrieval_result,
    write_cluster_report,
    write_descriptors,
    write_histograms,
    write_retrieval_result,
)
from .similarity import BackgroundSet

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONTRACT = 2


def _error_report(exc: Exception) -> dict:
    report = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, IngestionReport):
        report["failures"] = [
            {"id": cid, "path": path, "reason": reason} for cid, path, reason in exc.failures
        ]
    return report


def _load_background(path: str, cfg: PipelineConfig) -> BackgroundSet:
    dset, _ = read_descriptors(path)
    return BackgroundSet(descriptors=dset, k=cfg.k_background, beta=cfg.beta)


def _load_set(path: str) -> DescriptorSet:
    dset, _ = read_descriptors(path)
    return dset


def cmd_extract(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    manifest = read_manifest(args.manifest)
    ingest_corpus(
        manifest,
        cache_path=args.out,
        mel_cfg=cfg.mel,
        stft_cfg=cfg.stft,
        workers=cfg.workers,
        config_echo=cfg.provenance(),
    )
    print(f"wrote {len(manifest)} descriptors to {args.out}")
    return EXIT_OK


def cmd_import_embeddings(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    manifest = read_manifest(args.manifest)
    dset = import_embeddings(manifest, args.embeddings)
    write_descriptors(dset, args.out, meta={"config": cfg.provenance()})
    print(f"wrote {len(dset)} imported descriptors (dim {dset.dim}) to {args.out}")
    return EXIT_OK


def cmd_retrieve(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    queries = _load_set(args.queries)
    refs = _load_set(args.refs)
    bg = _load_background(args.background, cfg)
    rcfg = retrieval_mod.RetrievalConfig(
        tau=args.tau if args.tau is not None else cfg.tau_retrieve,
        k_background=cfg.k_background,
        beta=cfg.beta,
        descriptor_kind=args.kind or queries.kind,
    )
    result = retrieval_mod.retrieve(queries, refs, bg, rcfg, block_size=cfg.block_size)
    write_retrieval_result(result, args.out, config_echo=cfg.provenance())
    print(
        f"retrieved {len(result.retrieved)} of {result.n_queries} queries "
        f"at tau={rcfg.tau} -> {args.out}"
    )
    return EXIT_OK


def cmd_dedup(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    refs = _load_set(args.refs)
    bg = _load_background(args.background, cfg)
    tau = args.tau if args.tau is not None else cfg.tau_dedup
    if args.sweep:
        taus = [float(t) for t in args.sweep.split(",")]
        sweep_rows = []
        for sweep_tau in taus:
            report = dedup_mod.dedup_corpus(
                refs, bg, tau=sweep_tau,
                block_size=cfg.block_size, materialize_cap=cfg.materialize_cap,
            )
            sweep_rows.append(
                {
                    "tau": sweep_tau,
                    "edges": len(report.edge_scores),
                    "clusters": len(report.clusters),
                    "clip_count": sum(len(c.members) for c in report.clusters),
                }
            )
            print(json.dumps(sweep_rows[-1], sort_keys=True))
    report = dedup_mod.dedup_corpus(
        refs, bg, tau=tau, block_size=cfg.block_size, materialize_cap=cfg.materialize_cap
    )
    write_cluster_report(report, args.out, config_echo=cfg.provenance())
    print(
        f"found {len(report.clusters)} duplicate clusters among {len(refs)} clips "
        f"at tau={tau} -> {args.out}"
    )
    return EXIT_OK


def cmd_hist(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    set_a = _load_set(args.a)
    set_b = _load_set(args.b)
    bg = _load_background(args.background, cfg)
    bins = args.bins or cfg.histogram_bins
    scores_a = retrieval_mod.top1_scores(set_a, set_b, bg, block_size=cfg.block_size)
    scores_self = retrieval_mod.top1_scores(set_b, set_b, bg, block_size=cfg.block_size)
    edges = retrieval_mod.make_edges(np.concatenate([scores_a, scores_self]), bins)
    hist_a = retrieval_mod.histogram_top1(
        set_a, set_b, bg, bin_edges=edges,
        label=f"{set_a.corpus_id}->{set_b.corpus_id}", block_size=cfg.block_size,
    )
    hist_self = retrieval_mod.histogram_top1(
        set_b, set_b, bg, bin_edges=edges,
        label=f"{set_b.corpus_id}->{set_b.corpus_id}", block_size=cfg.block_size,
    )
    write_histograms([hist_a, hist_self], args.out, config_echo=cfg.provenance())
    calibration = retrieval_mod.calibrate_threshold(hist_a, hist_self)
    print(
        json.dumps(
            {
                "suggested_tau": calibration.suggested_tau,
                "full_separation": calibration.full_separation,
                "separable": calibration.separable,
                "out": str(args.out),
            },
            sort_keys=True,
        )
    )
    return EXIT_OK


def cmd_match_count(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    _, result = read_retrieval_result(args.result)
    if args.like is not None:
        like_meta, _ = read_retrieval_result(args.like)
        n = like_meta.get("n_retrieved", 0)
    else:
        n = args.n
    if n is None:
        raise ContractError("match-count needs --n or --like")
    tau, count = retrieval_mod.match_count_threshold(result, n)
    print(json.dumps({"tau": tau, "count": count, "target": n}, sort_keys=True))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace, cfg: PipelineConfig) -> int:
    import uvicorn

    from .service import create_app
    from .triage import TriageSession

    session = TriageSession.load(args.session_dir)
    static_dir = args.static_dir or _default_static_dir()
    app = create_app(session, static_dir=static_dir)
    host, _, port = args.addr.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="info")
    return EXIT_OK


def _default_static_dir() -> Path | None:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if candidate.is_dir():
        return candidate
    return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repliscan",
        description="Find replicated and duplicated clips in audio corpora",
    )
    parser.add_argument("--config", help="JSON pipeline config file")
    parser.add_argument("--workers", type=int, help="parallel workers for extraction")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="manifest -> mel descriptor cache")
    p.add_argument("manifest")
    p.add_argument("out")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser(
        "import-embeddings", help="external embedding file -> manifest-ordered cache"
    )
    p.add_argument("manifest")
    p.add_argument("embeddings")
    p.add_argument("out")
    p.set_defaults(func=cmd_import_embeddings)

    p = sub.add_parser("retrieve", help="thresholded top-1 retrieval")
    p.add_argument("--queries", required=True)
    p.add_argument("--refs", required=True)
    p.add_argument("--background", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tau", type=float)
    p.add_argument("--kind", choices=["mel", "imported"])
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("dedup", help="duplicate clusters within one corpus")
    p.add_argument("--refs", required=True)
    p.add_argument("--background", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tau", type=float)
    p.add_argument("--sweep", help="comma-separated taus: print cluster counts per tau")
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("hist", help="top-1 score histograms + calibration report")
    p.add_argument("--a", required=True, help="query descriptor cache")
    p.add_argument("--b", required=True, help="reference descriptor cache")
    p.add_argument("--background", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bins", type=int)
    p.set_defaults(func=cmd_hist)

    p = sub.add_parser("match-count", help="tau that yields a target retrieved count")
    p.add_argument("result")
    p.add_argument("--n", type=int)
    p.add_argument("--like", help="read the target count from another result file")
    p.set_defaults(func=cmd_match_count)

    p = sub.add_parser("serve", help="run the triage HTTP service")
    p.add_argument("session_dir")
    p.add_argument("--addr", default="127.0.0.1:8000")
    p.add_argument("--static-dir", help="frontend build to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, overrides={"workers": args.workers})
        return args.func(args, cfg)
    except (ContractError, ConfigError) as exc:
        print(json.dumps(_error_report(exc), sort_keys=True), file=sys.stderr)
        return EXIT_CONTRACT
    except (IngestionError, FormatError, RepliscanError) as exc:
        print(json.dumps(_error_report(exc), sort_keys=True), file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(json.dumps(_error_report(exc), sort_keys=True), file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
