"""Deterministic per-stage seed derivation.

A single global seed drives every pipeline stage. Each stage obtains its
own stream via ``derive_seed(global_seed, stage_name)``: the stage name is
hashed with FNV-1a, xor-folded into the global seed, and passed through one
splitmix64 round. Stages are therefore independently reproducible: rerunning
one stage never perturbs another stage's randomness.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def _fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & _MASK64
    return h


def splitmix64(x: int) -> int:
    """One round of the splitmix64 mixer (public-domain constants)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(global_seed: int, stage: str) -> int:
    """Derive the 64-bit seed for a named stage from the global seed."""
    return splitmix64((global_seed ^ _fnv1a64(stage.encode("utf-8"))) & _MASK64)


def rng_for(global_seed: int, stage: str) -> np.random.Generator:
    """Generator seeded for one stage; identical inputs give identical streams."""
    return np.random.Generator(np.random.PCG64(derive_seed(global_seed, stage)))
