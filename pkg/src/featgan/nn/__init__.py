"""Minimal dense neural-network engine.

Hand-differentiated layers over numpy arrays: linear layers, elementwise
activations, the three losses used by the toolkit, Adam, and a
finite-difference gradient checker. Parameters live in float32; the
gradient-check path rebuilds networks in float64 so the oracle is
trustworthy.
"""

from featgan.nn.layers import Activation, Layer, Linear, Mlp
from featgan.nn.losses import cross_entropy, l1, loss, mse, softmax
from featgan.nn.optim import Adam
from featgan.nn.gradcheck import max_relative_error, numeric_gradients

__all__ = [
    "Activation",
    "Adam",
    "Layer",
    "Linear",
    "Mlp",
    "cross_entropy",
    "l1",
    "loss",
    "max_relative_error",
    "mse",
    "numeric_gradients",
    "softmax",
]
