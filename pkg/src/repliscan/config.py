"""Pipeline configuration: one JSON file, defaults matching the method's constants.

The zero-flag path reproduces the reference protocol exactly: 16 mel bins,
128 ms Hann window with 25% overlap, K=5 background neighbors, beta=0.5,
retrieval tau 0.5005, dedup tau 0.5025. Execution knobs (workers, block
size, materialize cap) affect speed and memory only, never values, so they
are excluded from the provenance echo embedded in output artifacts.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .dedup import DEFAULT_MATERIALIZE_CAP, DEFAULT_TAU as DEFAULT_TAU_DEDUP
from .errors import ConfigError
from .melspec import MelConfig, StftConfig
from .retrieval import DEFAULT_BINS, DEFAULT_TAU as DEFAULT_TAU_RETRIEVE
from .similarity import DEFAULT_BETA, DEFAULT_BLOCK, DEFAULT_K


@dataclass(frozen=True)
class PipelineConfig:
    stft: StftConfig = field(default_factory=StftConfig)
    mel: MelConfig = field(default_factory=MelConfig)
    k_background: int = DEFAULT_K
    beta: float = DEFAULT_BETA
    tau_retrieve: float = DEFAULT_TAU_RETRIEVE
    tau_dedup: float = DEFAULT_TAU_DEDUP
    histogram_bins: int = DEFAULT_BINS
    block_size: int = DEFAULT_BLOCK
    materialize_cap: int = DEFAULT_MATERIALIZE_CAP
    workers: int | None = None

    def provenance(self) -> dict:
        """Semantic configuration echoed into output artifacts."""
        return {
            "stft": dataclasses.asdict(self.stft),
            "mel": dataclasses.asdict(self.mel),
            "k_background": self.k_background,
            "beta": self.beta,
            "tau_retrieve": self.tau_retrieve,
            "tau_dedup": self.tau_dedup,
            "histogram_bins": self.histogram_bins,
        }

    def to_dict(self) -> dict:
        return {
            **self.provenance(),
            "block_size": self.block_size,
            "materialize_cap": self.materialize_cap,
            "workers": self.workers,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def _build_section(cls, data: dict, section: str):
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in '{section}' config: {sorted(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"invalid '{section}' config: {exc}") from exc


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> PipelineConfig:
    """Load a config file and apply overrides; unknown keys are rejected."""
    data: dict = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
    if overrides:
        data = {**data, **{k: v for k, v in overrides.items() if v is not None}}

    top_fields = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = set(data) - top_fields
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    kwargs: dict = {}
    if "stft" in data:
        kwargs["stft"] = _build_section(StftConfig, dict(data["stft"]), "stft")
    if "mel" in data:
        kwargs["mel"] = _build_section(MelConfig, dict(data["mel"]), "mel")
    for key in top_fields - {"stft", "mel"}:
        if key in data:
            kwargs[key] = data[key]
    return PipelineConfig(**kwargs)
