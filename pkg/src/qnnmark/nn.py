"""Minimal dense-network pieces: affine layers, activations, BCE, Adam.

The model shapes in this project are fixed and small, so gradients are
hand-chained rather than taped. Every backward here is the exact reverse
of its forward.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_P_FLOOR = 1e-7


@dataclass
class DenseLayer:
    weights: np.ndarray  # (n_out, n_in)
    bias: np.ndarray  # (n_out,)

    @staticmethod
    def initialize(n_in: int, n_out: int, rng: np.random.Generator) -> "DenseLayer":
        # uniform in +/- 1/sqrt(fan_in)
        bound = 1.0 / math.sqrt(n_in)
        return DenseLayer(
            weights=rng.uniform(-bound, bound, size=(n_out, n_in)),
            bias=rng.uniform(-bound, bound, size=n_out),
        )


def dense_forward(layer: DenseLayer, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (layer.weights.shape[1],):
        raise ValueError(
            f"input must have shape ({layer.weights.shape[1]},), got {x.shape}"
        )
    return layer.weights @ x + layer.bias


def dense_backward(layer: DenseLayer, x: np.ndarray, grad_out: np.ndarray):
    """Returns (dL/dx, dL/dW, dL/db) for y = Wx + b."""
    x = np.asarray(x, dtype=np.float64)
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if grad_out.shape != (layer.weights.shape[0],):
        raise ValueError(
            f"grad must have shape ({layer.weights.shape[0]},), got {grad_out.shape}"
        )
    return layer.weights.T @ grad_out, np.outer(grad_out, x), grad_out.copy()


def tanh_forward(x):
    return np.tanh(x)

def tanh_backward(y, grad_out):
    """Derivative from the forward output y = tanh(x)."""
    return grad_out * (1.0 - y * y)

def sigmoid_forward(x):
    return 1.0 / (1.0 + np.exp(-x))

def sigmoid_backward(y, grad_out):
    return grad_out * y * (1.0 - y)

def scale_by_pi(x):
    return math.pi * x


def bce_loss(p: float, y: int) -> tuple[float, float]:
    """Binary cross entropy and dL/dp, with p clamped away from {0, 1}."""
    if y not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {y!r}")
    p = min(max(float(p), _P_FLOOR), 1.0 - _P_FLOOR)
    loss = -(y * math.log(p) + (1 - y) * math.log(1.0 - p))
    grad = (p - y) / (p * (1.0 - p))
    return loss, grad


@dataclass
class Adam:
    """Adam with bias correction. Updates are elementwise per array, so the
    result does not depend on how parameters are grouped into arrays."""

    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    _m: list = field(default_factory=list)
    _v: list = field(default_factory=list)

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        """One update, mutating each array in ``params`` in place."""
        if len(params) != len(grads):
            raise ValueError("params and grads must pair up")
        if not self._m:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        if len(self._m) != len(params):
            raise ValueError("parameter group count changed between steps")
        self.step_count += 1
        t = self.step_count
        for p, g, m, v in zip(params, grads, self._m, self._v):
            if p.shape != g.shape:
                raise ValueError(f"shape mismatch: param {p.shape} vs grad {g.shape}")
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            m_hat = m / (1.0 - self.beta1**t)
            v_hat = v / (1.0 - self.beta2**t)
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.epsilon)
