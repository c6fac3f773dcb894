"""In-place deterministic parameter updates (SGD and Adam)."""

import numpy as np

from .autodiff import Parameter
from .errors import GradientError


def _gradient_of(param: Parameter) -> np.ndarray:
    g = param.grad
    if g is None:
        return np.zeros_like(param.data)
    if g.shape != param.data.shape:
        raise GradientError(
            f"gradient shape {g.shape} does not match parameter '{param.name}' {param.data.shape}"
        )
    if not np.all(np.isfinite(g)):
        raise GradientError(f"non-finite gradient for parameter '{param.name}'")
    return g


class Sgd:
    def __init__(self, params, lr=1e-2):
        self.params = list(params)
        self.lr = float(lr)

    def step(self):
        for p in self.params:
            p.data -= self.lr * _gradient_of(p)


class Adam:
    """Adam with bias correction; moments keyed by parameter name."""

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self.m = {p.name: np.zeros_like(p.data) for p in self.params}
        self.v = {p.name: np.zeros_like(p.data) for p in self.params}

    def step(self):
        self.t += 1
        b1t = 1.0 - self.beta1**self.t
        b2t = 1.0 - self.beta2**self.t
        for p in self.params:
            g = _gradient_of(p)
            m = self.m[p.name]
            v = self.v[p.name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p.data -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)


def make_optimizer(name: str, params, lr: float):
    if name == "adam":
        return Adam(params, lr=lr)
    if name == "sgd":
        return Sgd(params, lr=lr)
    raise ValueError(f"unknown optimizer '{name}'")
