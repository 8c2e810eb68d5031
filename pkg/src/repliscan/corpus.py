"""Audio ingestion: manifests -> fixed-length clips -> descriptor sets.

Every clip is forced to exactly 163,872 mono samples at 16 kHz (zero-padded
or truncated), matching the fixed generation length the pipeline assumes.
Files at any other sample rate are rejected outright -- resampling would
silently change descriptors, so it is deliberately not offered.
"""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from . import melspec
from .descriptors import IMPORTED_KIND, MEL_KIND, DescriptorSet
from .errors import ContractError, FormatError, IngestionError, IngestionReport
from .formats import CorpusManifest, read_descriptors, write_descriptors
from .melspec import CLIP_SAMPLES, SAMPLE_RATE, MelConfig, StftConfig

logger = logging.getLogger(__name__)


@dataclass
class AudioClip:
    """Fixed-rate PCM sample buffer with identity and provenance."""

    id: str
    samples: np.ndarray  # float64 amplitudes in [-1, 1]
    sample_rate: int
    source_path: str


def _to_float(data: np.ndarray, path: Path) -> np.ndarray:
    if data.dtype == np.int16:
        return data.astype(np.float64) / 32768.0
    if data.dtype in (np.float32, np.float64):
        return data.astype(np.float64)
    if data.dtype == np.int32:
        return data.astype(np.float64) / 2147483648.0
    raise IngestionError(f"{path}: unsupported sample encoding {data.dtype}")


def load_clip(
    path: str | Path,
    target_samples: int = CLIP_SAMPLES,
    clip_id: str | None = None,
) -> AudioClip:
    """Load a 16 kHz PCM wav as a mono clip of exactly ``target_samples``.

    Multi-channel audio is averaged to mono. Shorter signals are zero-padded
    at the end; longer ones are truncated with a warning. A declared sample
    rate other than 16 kHz is an error, never silently resampled.
    """
    path = Path(path)
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise IngestionError(f"audio file not found: {path}") from None
    except Exception as exc:
        raise IngestionError(f"unreadable audio file {path}: {exc}") from exc
    if rate != SAMPLE_RATE:
        raise IngestionError(
            f"{path}: sample rate {rate} Hz, expected {SAMPLE_RATE} Hz "
            "(resampling is not supported)"
        )
    samples = _to_float(np.asarray(data), path)
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    elif samples.ndim != 1:
        raise IngestionError(f"{path}: unsupported array shape {samples.shape}")
    if samples.size > target_samples:
        logger.warning(
            "truncating %s: %d samples -> %d", path, samples.size, target_samples
        )
        samples = samples[:target_samples]
    elif samples.size < target_samples:
        samples = np.pad(samples, (0, target_samples - samples.size))
    samples = np.clip(samples, -1.0, 1.0)
    return AudioClip(
        id=clip_id or path.stem,
        samples=samples,
        sample_rate=SAMPLE_RATE,
        source_path=str(path),
    )


def _config_key(mel_cfg: MelConfig, stft_cfg: StftConfig) -> str:
    text = repr((mel_cfg, stft_cfg))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def _fingerprint(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _load_cache_rows(cache_path: Path, config_key: str) -> dict[str, tuple[str, np.ndarray]]:
    """id -> (source fingerprint, descriptor row) for reusable cache entries."""
    if not cache_path.is_file():
        return {}
    try:
        cached, meta = read_descriptors(cache_path)
    except FormatError as exc:
        logger.warning("ignoring unreadable descriptor cache %s: %s", cache_path, exc)
        return {}
    if cached.kind != MEL_KIND or meta.get("config_key") != config_key:
        return {}
    fingerprints = meta.get("fingerprints")
    if not isinstance(fingerprints, list) or len(fingerprints) != len(cached):
        return {}
    return {
        cid: (fp, cached.vectors[i])
        for i, (cid, fp) in enumerate(zip(cached.ids, fingerprints))
    }


def ingest_corpus(
    manifest: CorpusManifest,
    cache_path: str | Path | None = None,
    mel_cfg: MelConfig = MelConfig(),
    stft_cfg: StftConfig = StftConfig(),
    workers: int | None = None,
    config_echo: dict | None = None,
) -> DescriptorSet:
    """Compute one mel descriptor per manifest entry, in manifest order.

    With ``cache_path`` set, rows whose audio bytes and configuration are
    unchanged are reused from the cache, and the cache file is rewritten
    (byte-identically when nothing changed). Extraction runs on a thread
    pool; row order is by manifest index regardless of completion order.
    """
    filterbank = melspec.mel_filterbank(mel_cfg, stft_cfg)
    config_key = _config_key(mel_cfg, stft_cfg)
    cached_rows = _load_cache_rows(Path(cache_path), config_key) if cache_path else {}

    failures: list[tuple[str, str, str]] = []
    fingerprints: list[str | None] = [None] * len(manifest)
    rows: list[np.ndarray | None] = [None] * len(manifest)

    def build(index: int) -> None:
        entry = manifest.entries[index]
        try:
            fingerprint = _fingerprint(entry.path)
        except OSError as exc:
            failures.append((entry.clip_id, str(entry.path), str(exc)))
            return
        fingerprints[index] = fingerprint
        hit = cached_rows.get(entry.clip_id)
        if hit is not None and hit[0] == fingerprint:
            rows[index] = np.asarray(hit[1], dtype=np.float32)
            return
        try:
            clip = load_clip(entry.path, clip_id=entry.clip_id)
        except IngestionError as exc:
            failures.append((entry.clip_id, str(entry.path), str(exc)))
            return
        values = melspec.mel_descriptor(clip.samples, mel_cfg, stft_cfg, filterbank)
        if values.max() < 0:
            logger.warning("clip %s is silent; using the all-floor descriptor", entry.clip_id)
        rows[index] = values.astype(np.float32)

    n_workers = workers or min(32, max(1, len(manifest)))
    if len(manifest):
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(build, range(len(manifest))))
    if failures:
        raise IngestionReport(sorted(failures))

    dim = stft_cfg.frame_count(CLIP_SAMPLES) * mel_cfg.n_mels
    vectors = (
        np.stack(rows).astype(np.float32) if rows else np.zeros((0, dim), dtype=np.float32)
    )
    dset = DescriptorSet(
        corpus_id=manifest.corpus_id, kind=MEL_KIND, ids=manifest.ids, vectors=vectors
    )
    if cache_path is not None:
        meta = {
            "config_key": config_key,
            "fingerprints": fingerprints,
            "config": config_echo or {},
        }
        write_descriptors(dset, cache_path, meta=meta)
    return dset


def import_embeddings(
    manifest: CorpusManifest, embedding_file: str | Path
) -> DescriptorSet:
    """Select externally computed embeddings for a manifest, in its order.

    The file must follow the shared descriptor format and cover every
    manifest id; extra rows are ignored.
    """
    imported, _ = read_descriptors(embedding_file)
    if imported.kind != IMPORTED_KIND:
        raise ContractError(
            f"{embedding_file}: expected an imported-kind descriptor file, "
            f"got kind {imported.kind!r}"
        )
    index = {cid: i for i, cid in enumerate(imported.ids)}
    missing = [cid for cid in manifest.ids if cid not in index]
    if missing:
        raise IngestionError(
            f"embedding file {embedding_file} is missing {len(missing)} manifest "
            f"ids: {missing}"
        )
    order = [index[cid] for cid in manifest.ids]
    vectors = (
        imported.vectors[order]
        if order
        else np.zeros((0, imported.dim), dtype=np.float32)
    )
    return DescriptorSet(
        corpus_id=manifest.corpus_id,
        kind=IMPORTED_KIND,
        ids=manifest.ids,
        vectors=vectors,
    )
