"""Deep-actor baselines: plain DDPG and DDPG fed Poisson-resampled observations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class DeepActorParams:
    """ReLU hidden layers and a sigmoid output layer; ``W[k]`` is ``(n_out, n_in)``."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def arrays(self) -> list[np.ndarray]:
        return [a for pair in zip(self.weights, self.biases) for a in pair]

    def copy(self) -> DeepActorParams:
        return DeepActorParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def init_deep_actor(sizes, rng: np.random.Generator) -> DeepActorParams:
    weights, biases = [], []
    for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        bound = 3e-3 if i == len(sizes) - 2 else 1.0 / np.sqrt(n_in)
        weights.append(rng.uniform(-bound, bound, size=(n_out, n_in)))
        biases.append(rng.uniform(-bound, bound, size=n_out))
    return DeepActorParams(weights, biases)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def deep_actor_forward(params: DeepActorParams, observation, return_hidden: bool = False):
    """Action in (0, 1)^n_out. With ``return_hidden`` also the post-ReLU activations."""
    h = np.asarray(observation, dtype=np.float64)
    hidden = []
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        h = np.maximum(h @ w.T + b, 0.0)
        hidden.append(h)
    out = _sigmoid(h @ params.weights[-1].T + params.biases[-1])
    return (out, hidden) if return_hidden else out


def deep_actor_backward(params: DeepActorParams, observation, grad_action) -> list[np.ndarray]:
    """Gradients (summed over the batch) matching ``params.arrays()``."""
    x = np.asarray(observation, dtype=np.float64)
    out, hidden = deep_actor_forward(params, x, return_hidden=True)
    inputs = [x] + hidden
    g = np.asarray(grad_action, dtype=np.float64) * out * (1.0 - out)
    grads: list[np.ndarray] = [None] * (2 * params.n_layers)
    for k in reversed(range(params.n_layers)):
        a = inputs[k]
        grads[2 * k] = g.reshape(-1, g.shape[-1]).T @ a.reshape(-1, a.shape[-1])
        grads[2 * k + 1] = g.reshape(-1, g.shape[-1]).sum(axis=0)
        if k:
            g = (g @ params.weights[k]) * (inputs[k] > 0.0)
    return grads


def poissonize_observation(observation, T: int, rng: np.random.Generator) -> np.ndarray:
    """Replace each channel ``p`` by ``Binomial(T, p) / T``: encode to spikes, decode by counting."""
    p = np.asarray(observation, dtype=np.float64)
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("observation channels must lie in [0, 1]")
    return rng.binomial(T, p) / T
