"""Feature sequences, statistic pooling and min-max feature scaling.

A feature sequence is a T x D matrix of frame-level features (768-d SSL
vectors or 64-d MFCCs). Statistic pooling collapses it into a 2D vector:
per-dimension mean concatenated with per-dimension population standard
deviation. The scaler affinely maps pooled features into the reach of a
tanh-output generator and back.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from featgan.errors import DimensionError


@dataclass
class FeatureSequence:
    """Frame-level features for one utterance."""

    utterance_id: str
    values: np.ndarray  # T x D float32

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ValueError(f"values must be T x D, got shape {self.values.shape}")

    @property
    def frames(self) -> int:
        return self.values.shape[0]

    @property
    def dims(self) -> int:
        return self.values.shape[1]


@dataclass
class PooledVector:
    """Mean ++ std summary of one feature sequence (length 2*D)."""

    utterance_id: str
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)


def pool_values(values: np.ndarray) -> np.ndarray:
    """mean_1..D ++ population-std_1..D over the frame axis."""
    values = np.asarray(values)
    if values.ndim != 2 or values.shape[0] < 1:
        raise ValueError(f"cannot pool sequence of shape {values.shape}")
    acc = values.astype(np.float64)
    mean = acc.mean(axis=0)
    std = acc.std(axis=0)  # population convention: divide by T, legal for T=1
    return np.concatenate([mean, std]).astype(np.float32)


def stat_pool(seq: FeatureSequence) -> PooledVector:
    return PooledVector(seq.utterance_id, pool_values(seq.values))


class FeatureScaler:
    """Per-dimension affine map into [-1+margin, 1-margin].

    Fitted on a reference pool's min/max. Out-of-range inputs extrapolate
    linearly (no clamping). Dimensions with max == min are mapped to 0 and
    unscale back to the constant.
    """

    def __init__(self, lo: np.ndarray, hi: np.ndarray, margin: float):
        self.lo = np.asarray(lo, dtype=np.float32)
        self.hi = np.asarray(hi, dtype=np.float32)
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise DimensionError(
                f"scaler bounds must be matching vectors, got {self.lo.shape} "
                f"and {self.hi.shape}")
        if not 0.0 <= margin < 1.0:
            raise ValueError(f"margin must be in [0, 1), got {margin}")
        self.margin = float(margin)
        span = (self.hi - self.lo).astype(np.float64)
        self._degenerate = span <= 0.0
        span[self._degenerate] = 1.0  # keeps the arithmetic finite
        self._span = span
        self._reach = 1.0 - self.margin

    @property
    def dims(self) -> int:
        return self.lo.shape[0]

    def _check(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values)
        if values.shape[-1] != self.dims:
            raise DimensionError(
                f"vector dim {values.shape[-1]} vs scaler dim {self.dims}")
        return values

    def scale(self, values: np.ndarray) -> np.ndarray:
        values = self._check(values)
        unit = (values.astype(np.float64) - self.lo) / self._span  # 0..1 on pool
        out = (2.0 * unit - 1.0) * self._reach
        out = np.where(self._degenerate, 0.0, out)
        return out.astype(np.float32)

    def unscale(self, values: np.ndarray) -> np.ndarray:
        values = self._check(values)
        unit = (values.astype(np.float64) / self._reach + 1.0) / 2.0
        out = self.lo + unit * self._span
        out = np.where(self._degenerate, self.lo, out)
        return out.astype(np.float32)

    def state(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist(),
                "margin": self.margin}

    @classmethod
    def from_state(cls, state: dict) -> "FeatureScaler":
        return cls(np.array(state["lo"], dtype=np.float32),
                   np.array(state["hi"], dtype=np.float32),
                   float(state["margin"]))


def fit_scaler(pool: np.ndarray, margin: float = 0.05) -> FeatureScaler:
    """Record per-dimension min/max over an N x D pool of vectors."""
    pool = np.asarray(pool)
    if pool.ndim != 2 or pool.shape[0] < 1:
        raise ValueError(f"cannot fit scaler on pool of shape {pool.shape}")
    return FeatureScaler(pool.min(axis=0), pool.max(axis=0), margin)
