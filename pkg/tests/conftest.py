"""Shared fixtures: deterministic synthetic clips and descriptor sets."""

from __future__ import annotations

import numpy as np
import pytest

from repliscan.descriptors import DescriptorSet
from repliscan.melspec import CLIP_SAMPLES, SAMPLE_RATE
from repliscan.similarity import BackgroundSet


def sine_clip(freq_hz: float, amplitude: float = 0.9) -> np.ndarray:
    t = np.arange(CLIP_SAMPLES) / SAMPLE_RATE
    return amplitude * np.sin(2.0 * np.pi * freq_hz * t)


def unit_axes(n: int, dim: int, prefix: str, corpus_id: str, kind: str = "mel") -> DescriptorSet:
    """n orthonormal basis vectors e_0..e_{n-1} as a descriptor set."""
    vectors = np.eye(dim, dtype=np.float32)[:n]
    return DescriptorSet(corpus_id, kind, [f"{prefix}{i:03d}" for i in range(n)], vectors)


def make_set(corpus_id: str, prefix: str, vectors, kind: str = "mel") -> DescriptorSet:
    vectors = np.asarray(vectors, dtype=np.float32)
    return DescriptorSet(
        corpus_id, kind, [f"{prefix}{i:03d}" for i in range(len(vectors))], vectors
    )


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture()
def zero_bias_background() -> BackgroundSet:
    """Six background vectors orthogonal to everything the tests build.

    Tests construct their vectors in dims < 58, so every background cosine
    is 0 and the bias vanishes for any K up to 6.
    """
    vectors = np.zeros((6, 64), dtype=np.float32)
    for i in range(6):
        vectors[i, 58 + i] = 1.0
    ids = [f"zz{i:03d}" for i in range(6)]
    return BackgroundSet(DescriptorSet("bg-ortho", "mel", ids, vectors), k=2, beta=0.5)
