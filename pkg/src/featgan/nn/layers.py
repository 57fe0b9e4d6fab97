"""Layers with explicit forward caches and hand-written backward passes.

Every forward() pushes its input onto a per-layer cache stack and every
backward() pops the most recent entry, so a network may be run several
times inside one training step (the CycleGAN graph evaluates each
generator three times) as long as backward calls happen in exact reverse
forward order. Parameter gradients accumulate across backward calls until
zero_grad().
"""

from __future__ import annotations

import numpy as np

from featgan.errors import DimensionError, StaleCacheError


def init_weight(out_dim: int, in_dim: int, rng: np.random.Generator,
                dtype=np.float32) -> np.ndarray:
    """Fan-in uniform init in [-sqrt(1/in_dim), +sqrt(1/in_dim)]."""
    bound = np.sqrt(1.0 / in_dim)
    return rng.uniform(-bound, bound, size=(out_dim, in_dim)).astype(dtype)


class Layer:
    """Base layer: forward/backward plus parameter bookkeeping."""

    name: str = ""

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def parameters(self) -> list[np.ndarray]:
        return []

    def gradients(self) -> list[np.ndarray]:
        return []

    def parameter_names(self) -> list[str]:
        return []

    def zero_grad(self) -> None:
        for g in self.gradients():
            g.fill(0.0)

    def clear_cache(self) -> None:
        pass

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)


class Linear(Layer):
    """Dense layer out = x @ W.T + b with weight [out x in], bias [out]."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator | None = None,
                 dtype=np.float32, name: str = "linear"):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.name = name
        if rng is None:
            rng = np.random.Generator(np.random.PCG64(0))
        self.weight = init_weight(out_dim, in_dim, rng, dtype)
        self.bias = np.zeros(out_dim, dtype=dtype)
        self.grad_weight = np.zeros_like(self.weight)
        self.grad_bias = np.zeros_like(self.bias)
        self._inputs: list[np.ndarray] = []

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise DimensionError(
                f"{self.name}: input shape {x.shape} incompatible with "
                f"weight shape {self.weight.shape}")
        self._inputs.append(x)
        return x @ self.weight.T + self.bias

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        if not self._inputs:
            raise StaleCacheError(f"{self.name}: backward without forward")
        x = self._inputs.pop()
        if grad_out.shape != (x.shape[0], self.out_dim):
            raise DimensionError(
                f"{self.name}: grad shape {grad_out.shape} incompatible with "
                f"output shape {(x.shape[0], self.out_dim)}")
        self.grad_weight += grad_out.T @ x
        self.grad_bias += grad_out.sum(axis=0)
        return grad_out @ self.weight

    def parameters(self) -> list[np.ndarray]:
        return [self.weight, self.bias]

    def gradients(self) -> list[np.ndarray]:
        return [self.grad_weight, self.grad_bias]

    def parameter_names(self) -> list[str]:
        return [f"{self.name}.weight", f"{self.name}.bias"]

    def clear_cache(self) -> None:
        self._inputs.clear()


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # Split by sign so exp() never overflows; clamp into the open interval
    # (0, 1) that saturated floats would otherwise leave.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    info = np.finfo(out.dtype)
    return np.clip(out, info.tiny, 1.0 - info.epsneg)


class Activation(Layer):
    """Elementwise activation: kind in {relu, tanh, sigmoid}."""

    KINDS = ("relu", "tanh", "sigmoid")

    def __init__(self, kind: str, name: str = ""):
        if kind not in self.KINDS:
            raise ValueError(f"unknown activation kind {kind!r}")
        self.kind = kind
        self.name = name or kind
        self._cache: list[np.ndarray] = []

    def forward(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "relu":
            out = np.maximum(x, 0.0)
            self._cache.append(x)
        elif self.kind == "tanh":
            out = np.tanh(x)
            self._cache.append(out)
        else:
            out = _sigmoid(x)
            self._cache.append(out)
        return out

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        if not self._cache:
            raise StaleCacheError(f"{self.name}: backward without forward")
        cached = self._cache.pop()
        if self.kind == "relu":
            return grad_out * (cached > 0)
        if self.kind == "tanh":
            return grad_out * (1.0 - cached * cached)
        return grad_out * cached * (1.0 - cached)

    def clear_cache(self) -> None:
        self._cache.clear()


class Mlp(Layer):
    """Fixed stack of layers applied in sequence."""

    def __init__(self, layers: list[Layer], name: str = "mlp"):
        self.layers = layers
        self.name = name
        for i, layer in enumerate(self.layers):
            if not layer.name or layer.name in Activation.KINDS or layer.name == "linear":
                layer.name = f"{name}.{i}_{layer.name or layer.__class__.__name__.lower()}"

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            grad_out = layer.backward(grad_out)
        return grad_out

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.parameters()]

    def gradients(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.gradients()]

    def parameter_names(self) -> list[str]:
        return [n for layer in self.layers for n in layer.parameter_names()]

    def zero_grad(self) -> None:
        for layer in self.layers:
            layer.zero_grad()

    def clear_cache(self) -> None:
        for layer in self.layers:
            layer.clear_cache()

    def linears(self) -> list[Linear]:
        return [l for l in self.layers if isinstance(l, Linear)]


def mlp(dims: list[int], activations: list[str], rng: np.random.Generator,
        dtype=np.float32, name: str = "mlp") -> Mlp:
    """Build an alternating Linear/Activation stack.

    dims has one more entry than activations; activations[i] follows the
    i-th linear layer ("" means no activation after that layer).
    """
    if len(dims) != len(activations) + 1:
        raise ValueError("need len(dims) == len(activations) + 1")
    layers: list[Layer] = []
    for i, act in enumerate(activations):
        layers.append(Linear(dims[i], dims[i + 1], rng, dtype))
        if act:
            layers.append(Activation(act))
    return Mlp(layers, name=name)
