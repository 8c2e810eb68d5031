"""repliscan: retrieve-then-verify detection of replicated and duplicated audio."""

from .config import PipelineConfig, load_config
from .corpus import AudioClip, import_embeddings, ingest_corpus, load_clip
from .dedup import AdjacencyGraph, DuplicateCluster, build_adjacency, connected_components, dedup_corpus
from .descriptors import DescriptorSet
from .formats import CorpusManifest, ManifestEntry, read_descriptors, read_manifest, write_descriptors, write_manifest
from .melspec import MelConfig, StftConfig, mel_descriptor, mel_filterbank, stft
from .retrieval import (
    RetrievalConfig,
    RetrievalResult,
    ScoreHistogram,
    calibrate_threshold,
    histogram_top1,
    match_count_threshold,
    retrieve,
)
from .similarity import BackgroundSet, ScoredMatch, bias, cosine, normalized_score, self_similarity, topk
from .triage import TriageSession, Verdict, VerdictLog, render_spectrogram

__version__ = "0.1.0"
