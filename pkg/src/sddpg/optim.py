"""Gradient-descent optimizers and target-network soft updates.

Optimizers update parameter arrays in place, which keeps the dataclasses
holding them (``SanParams``, ``CriticParams``, ...) valid across steps.
"""

from __future__ import annotations

import numpy as np


class Optimizer:
    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        raise NotImplementedError

    def state_arrays(self) -> list[np.ndarray]:
        return []


class SGD(Optimizer):
    def __init__(self, lr: float):
        self.lr = lr

    def step(self, params, grads):
        for p, g in zip(params, grads):
            p -= self.lr * g


class Adam(Optimizer):
    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: list[np.ndarray] | None = None
        self.v: list[np.ndarray] | None = None

    def step(self, params, grads):
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        scale = self.lr * np.sqrt(1.0 - b2 ** self.t) / (1.0 - b1 ** self.t)
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= scale * m / (np.sqrt(v) + self.eps)

    def state_arrays(self):
        return [] if self.m is None else self.m + self.v


def make_optimizer(name: str, lr: float) -> Optimizer:
    if name == "adam":
        return Adam(lr)
    if name == "sgd":
        return SGD(lr)
    raise ValueError(f"unknown optimizer {name!r}")


def soft_update(target: list[np.ndarray], online: list[np.ndarray], tau: float) -> None:
    """``target <- (1 - tau) * target + tau * online``, in place."""
    for t, o in zip(target, online):
        t *= 1.0 - tau
        t += tau * o
