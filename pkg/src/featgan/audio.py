"""Minimal WAV audio I/O (PCM16 mono) built on the stdlib wave module."""

from __future__ import annotations

import wave
from dataclasses import dataclass

import numpy as np


@dataclass
class AudioClip:
    sample_rate: int
    samples: np.ndarray  # float32 in [-1, 1]

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float32)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def read_wav(path) -> AudioClip:
    with wave.open(str(path), "rb") as fh:
        if fh.getsampwidth() != 2:
            raise ValueError(f"{path}: only PCM16 WAV is supported")
        rate = fh.getframerate()
        channels = fh.getnchannels()
        raw = fh.readframes(fh.getnframes())
    data = np.frombuffer(raw, dtype="<i2").astype(np.float32) / 32768.0
    if channels > 1:
        data = data.reshape(-1, channels).mean(axis=1)
    return AudioClip(rate, data)


def write_wav(clip: AudioClip, path) -> None:
    pcm = np.clip(clip.samples, -1.0, 1.0)
    pcm = (pcm * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(clip.sample_rate)
        fh.writeframes(pcm.tobytes())
