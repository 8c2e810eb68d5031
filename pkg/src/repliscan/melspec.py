"""Low-dimensional log-mel descriptor for fixed-length 16 kHz clips.

The descriptor is a 107-frame x 16-band log-mel spectrogram, flattened
frame-major into a 1712-element vector. The pipeline is fixed:

    power spectrogram -> mel projection -> divide by global max
    -> 10*log10 -> clip at the floor -> flatten

so the loudest time-frequency cell of every non-silent clip sits exactly at
0 dB and everything else lands in [floor_db, 0]. All-zero input has no
maximum to normalize by; such clips get the all-floor descriptor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError

SAMPLE_RATE = 16_000
CLIP_SAMPLES = 163_872  # 10.242 s at 16 kHz


@dataclass(frozen=True)
class StftConfig:
    """Short-time transform parameters (defaults: 128 ms Hann, 25% overlap)."""

    window_len: int = 2048
    hop: int = 1536
    fft_len: int = 2048
    centered: bool = True

    def __post_init__(self):
        if self.window_len <= 0 or self.hop <= 0 or self.fft_len <= 0:
            raise ConfigError("window_len, hop and fft_len must be positive")
        if self.hop * 4 != self.window_len * 3:
            raise ConfigError(
                f"hop must be 3/4 of window_len (25% overlap); got hop={self.hop}, "
                f"window_len={self.window_len}"
            )
        if self.fft_len < self.window_len:
            raise ConfigError("fft_len must be >= window_len")

    @property
    def n_bins(self) -> int:
        return self.fft_len // 2 + 1

    def frame_count(self, n_samples: int) -> int:
        padded = n_samples + (self.window_len if self.centered else 0)
        return 1 + (padded - self.window_len) // self.hop


@dataclass(frozen=True)
class MelConfig:
    """Mel projection and dB compression parameters."""

    n_mels: int = 16
    f_min: float = 0.0
    f_max: float = 8000.0
    floor_db: float = -40.0
    spectrogram_power: int = 2
    scale: str = "slaney"

    def __post_init__(self):
        if self.n_mels < 1:
            raise ConfigError("n_mels must be >= 1")
        if not 0.0 <= self.f_min < self.f_max:
            raise ConfigError("need 0 <= f_min < f_max")
        if self.floor_db >= 0.0:
            raise ConfigError("floor_db must be negative")
        if self.scale != "slaney":
            raise ConfigError(f"unsupported mel scale variant: {self.scale!r}")
        if self.spectrogram_power not in (1, 2):
            raise ConfigError("spectrogram_power must be 1 (magnitude) or 2 (power)")


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window of length n."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def hz_to_mel(freq):
    """Hz -> mel, Slaney variant (linear below 1 kHz, logarithmic above)."""
    freq = np.asarray(freq, dtype=np.float64)
    mels = 3.0 * freq / 200.0
    log_region = freq >= 1000.0
    mels = np.where(
        log_region,
        15.0 + np.log(np.maximum(freq, 1000.0) / 1000.0) * (27.0 / np.log(6.4)),
        mels,
    )
    return mels


def mel_to_hz(mels):
    """Inverse of :func:`hz_to_mel`."""
    mels = np.asarray(mels, dtype=np.float64)
    freq = 200.0 * mels / 3.0
    log_region = mels >= 15.0
    freq = np.where(
        log_region,
        1000.0 * np.exp((np.log(6.4) / 27.0) * (mels - 15.0)),
        freq,
    )
    return freq


def stft(samples: np.ndarray, cfg: StftConfig = StftConfig()) -> np.ndarray:
    """Complex spectrogram of a contract-length clip, shape (frames, fft_len/2+1).

    Centered framing reflect-pads the signal by window_len/2 on both ends,
    which yields exactly 107 frames for the default 163,872-sample clip.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1:
        raise ContractError(f"expected a mono sample vector, got shape {samples.shape}")
    if samples.size != CLIP_SAMPLES:
        raise ContractError(
            f"clip must have exactly {CLIP_SAMPLES} samples, got {samples.size}"
        )
    if cfg.centered:
        x = np.pad(samples, cfg.window_len // 2, mode="reflect")
    else:
        x = samples
    n_frames = 1 + (x.size - cfg.window_len) // cfg.hop
    offsets = cfg.hop * np.arange(n_frames)[:, None]
    frames = x[offsets + np.arange(cfg.window_len)[None, :]]
    frames = frames * hann_window(cfg.window_len)
    return np.fft.rfft(frames, n=cfg.fft_len, axis=1)


def mel_filterbank(
    cfg: MelConfig = MelConfig(),
    stft_cfg: StftConfig = StftConfig(),
    sample_rate: int = SAMPLE_RATE,
) -> np.ndarray:
    """Triangular mel filterbank, shape (n_mels, fft_len/2+1).

    Filter centers are equally spaced on the mel scale between f_min and
    f_max; triangles peak at 1 (no area normalization).
    """
    if cfg.f_max > sample_rate / 2:
        raise ConfigError(f"f_max={cfg.f_max} exceeds Nyquist ({sample_rate / 2})")
    mel_points = np.linspace(hz_to_mel(cfg.f_min), hz_to_mel(cfg.f_max), cfg.n_mels + 2)
    hz_points = mel_to_hz(mel_points)
    fft_freqs = np.arange(stft_cfg.n_bins) * sample_rate / stft_cfg.fft_len

    fb = np.zeros((cfg.n_mels, stft_cfg.n_bins))
    for m in range(cfg.n_mels):
        lower, center, upper = hz_points[m], hz_points[m + 1], hz_points[m + 2]
        up = (fft_freqs - lower) / (center - lower)
        down = (upper - fft_freqs) / (upper - center)
        fb[m] = np.maximum(0.0, np.minimum(up, down))

    empty = np.where(~(fb > 0).any(axis=1))[0]
    if empty.size:
        raise ConfigError(
            f"n_mels={cfg.n_mels} too large for the FFT resolution: filters "
            f"{empty.tolist()} have no positive entries"
        )
    return fb


def mel_descriptor(
    samples: np.ndarray,
    cfg: MelConfig = MelConfig(),
    stft_cfg: StftConfig = StftConfig(),
    filterbank: np.ndarray | None = None,
) -> np.ndarray:
    """Flattened frame-major log-mel descriptor (length frames * n_mels).

    For the default configuration the result has exactly 1712 elements,
    each in [floor_db, 0], with the maximum equal to 0 unless the input is
    all-zero (then every element is the floor). Max-normalization before the
    dB conversion makes the descriptor invariant to positive gain.

    An already-built ``filterbank`` can be passed to amortize its
    construction over a corpus.
    """
    spectrum = stft(samples, stft_cfg)
    power = np.abs(spectrum) ** cfg.spectrogram_power
    fb = filterbank if filterbank is not None else mel_filterbank(cfg, stft_cfg)
    mel_power = power @ fb.T  # (frames, n_mels)
    peak = mel_power.max() if mel_power.size else 0.0
    if peak <= 0.0:
        # degenerate all-zero clip: no maximum to normalize by
        return np.full(mel_power.size, cfg.floor_db, dtype=np.float64)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(mel_power / peak)
    return np.maximum(db, cfg.floor_db).ravel()
