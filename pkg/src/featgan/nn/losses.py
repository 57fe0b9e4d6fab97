"""Losses returning (batch-mean scalar, gradient w.r.t. predictions).

Reduction convention: mse and l1 average over every element of the batch,
cross_entropy averages over rows (one loss value per example). Targets for
cross_entropy may be integer class indices or one-hot rows.
"""

from __future__ import annotations

import numpy as np

from featgan.errors import DimensionError


def mse(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    if pred.shape != target.shape:
        raise DimensionError(f"mse: pred {pred.shape} vs target {target.shape}")
    diff = pred - target
    value = float(np.mean(diff.astype(np.float64) ** 2))
    grad = (2.0 / diff.size) * diff
    return value, grad


def l1(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    if pred.shape != target.shape:
        raise DimensionError(f"l1: pred {pred.shape} vs target {target.shape}")
    diff = pred - target
    value = float(np.mean(np.abs(diff.astype(np.float64))))
    grad = np.sign(diff) / diff.size
    return value, grad


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _one_hot(target: np.ndarray, n_classes: int, dtype) -> np.ndarray:
    idx = np.asarray(target)
    if idx.ndim == 2 and idx.shape[1] == n_classes:
        return idx.astype(dtype)
    idx = idx.reshape(-1).astype(np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= n_classes):
        raise ValueError(
            f"cross_entropy: class index out of range 0..{n_classes - 1}: "
            f"{int(idx.min())}..{int(idx.max())}")
    hot = np.zeros((idx.size, n_classes), dtype=dtype)
    hot[np.arange(idx.size), idx] = 1.0
    return hot


def cross_entropy(logits: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Softmax cross-entropy; target is class indices or one-hot rows."""
    hot = _one_hot(target, logits.shape[1], logits.dtype)
    if hot.shape != logits.shape:
        raise DimensionError(
            f"cross_entropy: logits {logits.shape} vs target {hot.shape}")
    p = softmax(logits.astype(np.float64))
    batch = logits.shape[0]
    value = float(-np.sum(hot * np.log(p + 1e-300)) / batch)
    grad = ((p - hot) / batch).astype(logits.dtype)
    return value, grad


_LOSSES = {"mse": mse, "l1": l1, "cross_entropy": cross_entropy}


def loss(kind: str, pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Dispatch by kind; see the individual loss functions."""
    try:
        fn = _LOSSES[kind]
    except KeyError:
        raise ValueError(f"unknown loss kind {kind!r}") from None
    return fn(pred, target)
