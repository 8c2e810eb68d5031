"""Ingestion tests: clip loading, corpus extraction, embedding import."""

import logging

import numpy as np
import pytest
from scipy.io import wavfile

from repliscan.corpus import import_embeddings, ingest_corpus, load_clip
from repliscan.descriptors import DescriptorSet
from repliscan.errors import IngestionError, IngestionReport
from repliscan.formats import CorpusManifest, ManifestEntry, write_descriptors
from repliscan.melspec import CLIP_SAMPLES, SAMPLE_RATE

from tests.synthgen import write_corpus, write_wav


def wav_path(tmp_path, name, samples, rate=SAMPLE_RATE, dtype=np.float32):
    path = tmp_path / name
    if dtype == np.int16:
        wavfile.write(path, rate, (np.asarray(samples) * 32767.0).astype(np.int16))
    else:
        wavfile.write(path, rate, np.asarray(samples, dtype=dtype))
    return path


class TestLoadClip:
    def test_short_clip_zero_padded(self, tmp_path):
        path = wav_path(tmp_path, "short.wav", np.full(80_000, 0.25))
        clip = load_clip(path)
        assert clip.samples.shape == (CLIP_SAMPLES,)
        assert np.all(clip.samples[:80_000] == 0.25)
        assert not clip.samples[80_000:].any()

    def test_exact_length_untouched(self, tmp_path):
        samples = np.linspace(-0.5, 0.5, CLIP_SAMPLES).astype(np.float32)
        path = wav_path(tmp_path, "exact.wav", samples)
        clip = load_clip(path)
        assert np.array_equal(clip.samples, samples.astype(np.float64))

    def test_long_clip_truncated_with_warning(self, tmp_path, caplog):
        ramp = np.linspace(0.0, 0.99, 192_000).astype(np.float32)
        path = wav_path(tmp_path, "long.wav", ramp)
        with caplog.at_level(logging.WARNING):
            clip = load_clip(path)
        assert clip.samples.shape == (CLIP_SAMPLES,)
        assert np.array_equal(clip.samples, ramp[:CLIP_SAMPLES].astype(np.float64))
        assert any("truncating" in r.message for r in caplog.records)

    def test_stereo_mean_downmixed(self, tmp_path):
        left = np.full(1000, 0.5, dtype=np.float32)
        right = np.full(1000, -0.1, dtype=np.float32)
        path = wav_path(tmp_path, "stereo.wav", np.stack([left, right], axis=1))
        clip = load_clip(path)
        assert clip.samples[:1000] == pytest.approx(0.2)

    def test_int16_scaling(self, tmp_path):
        path = tmp_path / "i16.wav"
        wavfile.write(path, SAMPLE_RATE, np.array([16384, -16384, 0], dtype=np.int16))
        clip = load_clip(path)
        assert clip.samples[:3] == pytest.approx([0.5, -0.5, 0.0])

    def test_wrong_sample_rate_rejected(self, tmp_path):
        path = wav_path(tmp_path, "wrong_rate.wav", np.zeros(1000), rate=44_100)
        with pytest.raises(IngestionError, match="44100"):
            load_clip(path)

    def test_unreadable_file_names_path(self, tmp_path):
        path = tmp_path / "garbage.wav"
        path.write_bytes(b"not a wav at all")
        with pytest.raises(IngestionError, match="garbage.wav"):
            load_clip(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IngestionError, match="nope.wav"):
            load_clip(tmp_path / "nope.wav")

    def test_default_id_is_file_stem(self, tmp_path):
        path = wav_path(tmp_path, "my_clip.wav", np.zeros(100))
        assert load_clip(path).id == "my_clip"


class TestIngestCorpus:
    def test_three_clips_three_rows_dim_1712(self, tmp_path, rng):
        manifest = write_corpus(
            tmp_path, {f"clip{i}": rng.normal(size=CLIP_SAMPLES) * 0.2 for i in range(3)}, "c3"
        )
        dset = ingest_corpus(manifest)
        assert dset.kind == "mel"
        assert dset.vectors.shape == (3, 1712)
        assert dset.ids == ["clip0", "clip1", "clip2"]

    def test_empty_manifest(self):
        dset = ingest_corpus(CorpusManifest(corpus_id="empty", entries=[]))
        assert len(dset) == 0
        assert dset.dim == 1712

    def test_silent_clip_gets_all_floor_row(self, tmp_path):
        manifest = write_corpus(tmp_path, {"silent": np.zeros(CLIP_SAMPLES)}, "s1")
        dset = ingest_corpus(manifest)
        assert np.all(dset.vectors[0] == -40.0)

    def test_failures_collected_into_one_report(self, tmp_path, rng):
        manifest = write_corpus(tmp_path, {"good": rng.normal(size=1000) * 0.1}, "bad")
        bad1 = tmp_path / "missing.wav"
        bad2 = wav_path(tmp_path, "rate.wav", np.zeros(100), rate=8000)
        entries = manifest.entries + [
            ManifestEntry("missing", bad1),
            ManifestEntry("offrate", bad2),
        ]
        with pytest.raises(IngestionReport) as excinfo:
            ingest_corpus(CorpusManifest(corpus_id="bad", entries=entries))
        failed_ids = [cid for cid, _, _ in excinfo.value.failures]
        assert failed_ids == ["missing", "offrate"]

    def test_cache_hit_is_byte_identical(self, tmp_path, rng):
        manifest = write_corpus(
            tmp_path / "audio", {f"c{i}": rng.normal(size=CLIP_SAMPLES) * 0.2 for i in range(2)}, "cc"
        )
        cache = tmp_path / "cache.adsc"
        ingest_corpus(manifest, cache_path=cache)
        first = cache.read_bytes()
        ingest_corpus(manifest, cache_path=cache)
        assert cache.read_bytes() == first

    def test_row_order_follows_manifest_regardless_of_workers(self, tmp_path, rng):
        clips = {f"w{i}": rng.normal(size=CLIP_SAMPLES) * 0.2 for i in range(6)}
        manifest = write_corpus(tmp_path, clips, "order")
        serial = ingest_corpus(manifest, workers=1)
        parallel = ingest_corpus(manifest, workers=4)
        assert serial.ids == parallel.ids == list(clips)
        assert np.array_equal(serial.vectors, parallel.vectors)


class TestImportEmbeddings:
    def build_embedding_file(self, tmp_path, ids, dim=512):
        rng = np.random.default_rng(9)
        dset = DescriptorSet(
            "export", "imported", list(ids), rng.normal(size=(len(ids), dim)).astype(np.float32)
        )
        path = tmp_path / "emb.adsc"
        write_descriptors(dset, path)
        return path, dset

    def manifest_for(self, tmp_path, ids):
        return CorpusManifest(
            corpus_id="m",
            entries=[ManifestEntry(cid, tmp_path / f"{cid}.wav") for cid in ids],
        )

    def test_subset_selected_in_manifest_order(self, tmp_path):
        path, source = self.build_embedding_file(tmp_path, ["a", "b", "c", "d"])
        manifest = self.manifest_for(tmp_path, ["c", "a", "d"])
        dset = import_embeddings(manifest, path)
        assert dset.ids == ["c", "a", "d"]
        assert np.array_equal(dset.vectors[0], source.vectors[2])
        assert np.array_equal(dset.vectors[1], source.vectors[0])

    def test_missing_id_is_named(self, tmp_path):
        path, _ = self.build_embedding_file(tmp_path, ["a", "b"])
        manifest = self.manifest_for(tmp_path, ["a", "ghost"])
        with pytest.raises(IngestionError, match="ghost"):
            import_embeddings(manifest, path)

    def test_clap_style_export(self, tmp_path):
        path, _ = self.build_embedding_file(tmp_path, ["x", "y"], dim=512)
        dset = import_embeddings(self.manifest_for(tmp_path, ["x", "y"]), path)
        assert dset.kind == "imported"
        assert dset.dim == 512
        assert len(dset) == 2


class TestDescriptorSetDegeneracy:
    def test_all_zero_imported_set_flagged(self):
        dset = DescriptorSet("z", "imported", ["a", "b"], np.zeros((2, 4), dtype=np.float32))
        assert dset.is_degenerate

    def test_silent_mel_corpus_is_not_degenerate(self, tmp_path):
        # the all-floor descriptor has a large norm; cosine stays well-defined
        manifest = write_corpus(tmp_path, {"silent": np.zeros(CLIP_SAMPLES)}, "s")
        assert not ingest_corpus(manifest).is_degenerate

    def test_mixed_set_not_degenerate(self):
        vectors = np.zeros((2, 4), dtype=np.float32)
        vectors[1, 0] = 1.0
        assert not DescriptorSet("m", "imported", ["a", "b"], vectors).is_degenerate
