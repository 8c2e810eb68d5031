"""Descriptor sets: ordered (clip id, vector) collections with a kind tag."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError

MEL_KIND = "mel"
IMPORTED_KIND = "imported"
KINDS = (MEL_KIND, IMPORTED_KIND)

# Vectors with a norm below this are treated as degenerate and score 0
# against everything (silent clips must never surface as matches).
DEGENERATE_NORM = 1e-12


@dataclass
class DescriptorSet:
    """One descriptor vector per clip, in corpus manifest order.

    ``vectors`` is an (n, dim) float32 matrix; row i belongs to ``ids[i]``.
    """

    corpus_id: str
    kind: str
    ids: list[str] = field(default_factory=list)
    vectors: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=np.float32))

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractError(f"unknown descriptor kind {self.kind!r}; expected one of {KINDS}")
        self.vectors = np.asarray(self.vectors, dtype=np.float32)
        if self.vectors.ndim != 2:
            raise ContractError(f"vectors must be 2-D, got shape {self.vectors.shape}")
        if len(self.ids) != self.vectors.shape[0]:
            raise ContractError(
                f"{len(self.ids)} ids for {self.vectors.shape[0]} descriptor rows"
            )
        if len(set(self.ids)) != len(self.ids):
            dupes = sorted({i for i in self.ids if self.ids.count(i) > 1})
            raise ContractError(f"duplicate clip ids in descriptor set: {dupes}")
        if self.vectors.size and not np.isfinite(self.vectors).all():
            raise ContractError("descriptor vectors must be finite-valued")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def is_degenerate(self) -> bool:
        """True if no vector has a usable norm (e.g. an all-silent corpus)."""
        if not len(self):
            return False
        norms = np.linalg.norm(self.vectors.astype(np.float64), axis=1)
        return bool((norms < DEGENERATE_NORM).all())

    def row(self, clip_id: str) -> np.ndarray:
        try:
            return self.vectors[self.ids.index(clip_id)]
        except ValueError:
            raise KeyError(clip_id) from None
