"""Adam optimizer with per-parameter moment accumulators.

Defaults follow the adversarial-training convention used throughout this
toolkit: beta1=0.5, beta2=0.999, eps=1e-8. A zero gradient is an exact
no-op on the parameter (bias-corrected moments stay zero).
"""

from __future__ import annotations

import numpy as np

from featgan.errors import NonFiniteError


class Adam:
    def __init__(self, params: list[np.ndarray], grads: list[np.ndarray],
                 lr: float, beta1: float = 0.5, beta2: float = 0.999,
                 eps: float = 1e-8, names: list[str] | None = None):
        if len(params) != len(grads):
            raise ValueError("params and grads must pair up")
        self.params = params
        self.grads = grads
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.names = names or [f"param{i}" for i in range(len(params))]
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for p, g, m, v, name in zip(self.params, self.grads, self.m, self.v,
                                    self.names):
            if not np.all(np.isfinite(g)):
                raise NonFiniteError(f"non-finite gradient for {name}")
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)

    @classmethod
    def for_layers(cls, layers, lr: float, **kw) -> "Adam":
        """Adam over the parameters of one or more Layer objects."""
        params, grads, names = [], [], []
        for layer in layers:
            params.extend(layer.parameters())
            grads.extend(layer.gradients())
            names.extend(layer.parameter_names())
        return cls(params, grads, lr, names=names, **kw)
