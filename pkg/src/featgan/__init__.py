"""Feature-space toolkit for synthetic speech command experiments.

Pipeline stages: MFCC extraction, statistic pooling, ASR-agreement
filtering of generated audio, feature-space CycleGAN domain adaptation,
linear-head classification and PCA-based real-vs-synthetic analysis.
All neural numerics are implemented from scratch on top of numpy.
"""

__version__ = "0.1.0"

CLASSES = (
    "yes", "no", "up", "down", "left", "right", "on", "off", "stop", "go",
    "unknown",
)
"""Closed label set: the ten command words, in canonical order, plus `unknown`."""
