"""Central finite-difference gradient verification.

The checker perturbs every parameter entry of a float64 network and
compares the resulting loss slope against the analytic gradients produced
by the hand-written backward passes. Networks under test should be built
with dtype=np.float64 so both routes run in 64-bit.
"""

from __future__ import annotations

from typing import Callable

import numpy as np


def numeric_gradients(loss_fn: Callable[[], float], params: list[np.ndarray],
                      eps: float = 1e-3) -> list[np.ndarray]:
    """Central differences of loss_fn w.r.t. every entry of every parameter.

    loss_fn re-evaluates the full forward pass from current parameter
    values; parameters are restored exactly after probing.
    """
    out = []
    for p in params:
        g = np.zeros_like(p, dtype=np.float64)
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            hi = loss_fn()
            flat[i] = orig - eps
            lo = loss_fn()
            flat[i] = orig
            gflat[i] = (hi - lo) / (2.0 * eps)
        out.append(g)
    return out


def max_relative_error(analytic: list[np.ndarray], numeric: list[np.ndarray],
                       floor: float = 1e-6) -> float:
    """max |a - n| / max(|a|, |n|, floor) over all entries of all parameters."""
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst
