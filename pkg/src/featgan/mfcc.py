"""64-coefficient MFCC extraction from 16 kHz mono audio.

Pipeline: pre-emphasis -> framing (Hann window, no clip-level padding) ->
magnitude FFT (radix-2, per-frame zero-pad to fft_size) -> HTK mel
filterbank -> natural log with floor -> orthonormal DCT-II, keeping the
first n_coeffs coefficients. T = 1 + floor((len - frame_length)/hop).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from featgan.audio import AudioClip
from featgan.errors import ConfigError
from featgan.features import FeatureSequence


@dataclass
class MfccConfig:
    n_coeffs: int = 64
    n_mels: int = 64
    frame_length: int = 400   # 25 ms at 16 kHz
    hop: int = 160            # 10 ms
    fft_size: int = 512
    fmin: float = 0.0
    fmax: float = 8000.0
    preemphasis: float = 0.97
    log_floor: float = 1e-10

    def validate(self, sample_rate: int) -> None:
        if self.fft_size & (self.fft_size - 1) or self.fft_size < 2:
            raise ConfigError(f"fft_size must be a power of two, got {self.fft_size}")
        if not self.n_coeffs <= self.n_mels <= self.fft_size // 2 + 1:
            raise ConfigError(
                f"need n_coeffs <= n_mels <= fft_size/2+1, got "
                f"{self.n_coeffs} / {self.n_mels} / {self.fft_size // 2 + 1}")
        if not 0 <= self.fmin < self.fmax <= sample_rate / 2:
            raise ConfigError(
                f"need 0 <= fmin < fmax <= sr/2, got fmin={self.fmin} "
                f"fmax={self.fmax} sr={sample_rate}")
        if self.frame_length > self.fft_size:
            raise ConfigError(
                f"frame_length {self.frame_length} exceeds fft_size {self.fft_size}")
        if self.hop < 1:
            raise ConfigError(f"hop must be >= 1, got {self.hop}")

    def to_dict(self) -> dict:
        return asdict(self)


def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def fft_radix2(x: np.ndarray) -> np.ndarray:
    """Iterative Cooley-Tukey FFT over the last axis; length must be 2^k."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[-1]
    if n & (n - 1) or n < 1:
        raise ValueError(f"FFT length must be a power of two, got {n}")
    out = x[..., _bit_reverse_indices(n)].copy()
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = out.reshape(*out.shape[:-1], n // size, size)
        even = blocks[..., :half].copy()
        odd = blocks[..., half:] * twiddle
        blocks[..., :half] = even + odd
        blocks[..., half:] = even - odd
        size *= 2
    return out


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, fft_size: int, sample_rate: int,
                   fmin: float, fmax: float) -> np.ndarray:
    """Triangular filters (peak 1) on the HTK mel scale, n_mels x (fft_size/2+1)."""
    n_bins = fft_size // 2 + 1
    bin_hz = np.arange(n_bins) * sample_rate / fft_size
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    bank = np.zeros((n_mels, n_bins))
    for i in range(n_mels):
        left, center, right = edges[i], edges[i + 1], edges[i + 2]
        up = (bin_hz - left) / (center - left)
        down = (right - bin_hz) / (right - center)
        bank[i] = np.maximum(0.0, np.minimum(up, down))
    return bank


def dct_matrix(n_out: int, n_in: int) -> np.ndarray:
    """Orthonormal DCT-II rows (n_out x n_in)."""
    k = np.arange(n_out)[:, None]
    n = np.arange(n_in)[None, :]
    mat = np.cos(np.pi * k * (2 * n + 1) / (2 * n_in))
    mat *= np.sqrt(2.0 / n_in)
    mat[0] /= np.sqrt(2.0)
    return mat


def frame_signal(samples: np.ndarray, frame_length: int, hop: int) -> np.ndarray:
    n = len(samples)
    if n < frame_length:
        raise ValueError(
            f"clip of {n} samples shorter than one frame ({frame_length})")
    count = 1 + (n - frame_length) // hop
    idx = np.arange(frame_length)[None, :] + hop * np.arange(count)[:, None]
    return samples[idx]


def mfcc(clip: AudioClip, cfg: MfccConfig | None = None,
         utterance_id: str = "") -> FeatureSequence:
    """Compute the T x n_coeffs MFCC sequence for one clip."""
    if cfg is None:
        cfg = MfccConfig()
    cfg.validate(clip.sample_rate)

    x = clip.samples.astype(np.float64)
    emphasized = np.concatenate([x[:1], x[1:] - cfg.preemphasis * x[:-1]])
    frames = frame_signal(emphasized, cfg.frame_length, cfg.hop)
    window = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(cfg.frame_length)
                                / cfg.frame_length)  # periodic Hann
    frames = frames * window

    padded = np.zeros((frames.shape[0], cfg.fft_size))
    padded[:, :cfg.frame_length] = frames
    spectrum = fft_radix2(padded)[:, :cfg.fft_size // 2 + 1]
    magnitude = np.abs(spectrum)

    bank = mel_filterbank(cfg.n_mels, cfg.fft_size, clip.sample_rate,
                          cfg.fmin, cfg.fmax)
    mel_energy = magnitude @ bank.T
    log_mel = np.log(np.maximum(mel_energy, cfg.log_floor))

    coeffs = log_mel @ dct_matrix(cfg.n_coeffs, cfg.n_mels).T
    return FeatureSequence(utterance_id, coeffs.astype(np.float32))
