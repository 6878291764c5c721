"""Deep critic Q(s, a): a ReLU multilayer perceptron with the action
concatenated onto the input of one hidden layer."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .optim import Optimizer


@dataclass
class CriticParams:
    """Dense layers ``W[i] (n_out, n_in)``, ``b[i]``; the action joins layer ``action_layer``.

    With ``action_layer == 0`` the action is concatenated to the state itself.
    The last layer is linear with a single output.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    action_layer: int = 1
    action_dim: int = 2

    def __post_init__(self):
        if not 0 <= self.action_layer < len(self.weights):
            raise ValueError(f"action_layer {self.action_layer} out of range")
        if self.weights[-1].shape[0] != 1:
            raise ValueError("critic output layer must have a single unit")
        k = self.action_layer
        if k and self.weights[k].shape[1] != self.weights[k - 1].shape[0] + self.action_dim:
            raise ValueError(f"layer {k} width does not account for the {self.action_dim}-d action")

    @property
    def state_dim(self) -> int:
        n = self.weights[0].shape[1]
        return n - self.action_dim if self.action_layer == 0 else n

    def arrays(self) -> list[np.ndarray]:
        return [a for pair in zip(self.weights, self.biases) for a in pair]

    def copy(self) -> CriticParams:
        return CriticParams(
            [w.copy() for w in self.weights], [b.copy() for b in self.biases],
            self.action_layer, self.action_dim,
        )


def init_critic(state_dim: int, action_dim: int, hidden, rng: np.random.Generator,
                action_layer: int = 1) -> CriticParams:
    """Fan-in uniform initialization; the final layer starts small (+-3e-3)."""
    sizes = [state_dim] + list(hidden) + [1]
    weights, biases = [], []
    for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        if i == action_layer:
            n_in += action_dim
        bound = 3e-3 if i == len(sizes) - 2 else 1.0 / np.sqrt(n_in)
        weights.append(rng.uniform(-bound, bound, size=(n_out, n_in)))
        biases.append(rng.uniform(-bound, bound, size=n_out))
    return CriticParams(weights, biases, action_layer, action_dim)


@dataclass
class _CriticCache:
    layer_inputs: list[np.ndarray]
    pre: list[np.ndarray]
    n_hidden_in: int


def _forward(params: CriticParams, state, action):
    state = np.asarray(state, dtype=np.float64)
    action = np.asarray(action, dtype=np.float64)
    h = state
    layer_inputs, pre = [], []
    n_last = len(params.weights) - 1
    n_hidden_in = 0
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        if i == params.action_layer:
            n_hidden_in = h.shape[-1]
            h = np.concatenate([h, action], axis=-1)
        if h.shape[-1] != w.shape[1]:
            raise ValueError(f"critic layer {i} expects {w.shape[1]} inputs, got {h.shape[-1]}")
        layer_inputs.append(h)
        a = h @ w.T + b
        pre.append(a)
        h = a if i == n_last else np.maximum(a, 0.0)
    return h[..., 0], _CriticCache(layer_inputs, pre, n_hidden_in)


def critic_forward(params: CriticParams, state, action) -> np.ndarray:
    """Q value(s); a scalar for a single state, shape ``(B,)`` for a batch."""
    q, _ = _forward(params, state, action)
    return q


def critic_backward(params: CriticParams, state, action, upstream):
    """Backpropagate ``upstream = dL/dQ`` through the critic.

    Returns ``(param_grads, grad_state, grad_action)``. ``param_grads`` is a
    flat list matching ``params.arrays()``; batch gradients are summed over
    the batch, so pass ``upstream / B`` for a mean loss.
    """
    _, cache = _forward(params, state, action)
    return _backward(params, cache, upstream)


def _backward(params: CriticParams, cache: _CriticCache, upstream):
    upstream = np.asarray(upstream, dtype=np.float64)
    g = upstream[..., None]
    n = len(params.weights)
    grads: list[np.ndarray] = [None] * (2 * n)
    grad_action = grad_state = None
    for i in reversed(range(n)):
        if i < n - 1:
            g = g * (cache.pre[i] > 0.0)
        x = cache.layer_inputs[i]
        grads[2 * i] = g.reshape(-1, g.shape[-1]).T @ x.reshape(-1, x.shape[-1])
        grads[2 * i + 1] = g.reshape(-1, g.shape[-1]).sum(axis=0)
        g = g @ params.weights[i]
        if i == params.action_layer:
            grad_action = g[..., cache.n_hidden_in:]
            g = g[..., : cache.n_hidden_in]
    grad_state = g
    return grads, grad_state, grad_action


def td_targets(rewards, dones, next_q, gamma: float) -> np.ndarray:
    """``r + gamma * Q'`` for non-terminal transitions, ``r`` for terminal ones."""
    rewards = np.asarray(rewards, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    return rewards + gamma * np.where(dones, 0.0, next_q)


def critic_train_step(params: CriticParams, states, actions, targets,
                      optimizer: Optimizer) -> float:
    """One optimizer step on the mean squared TD error; returns the pre-step loss.

    ``params`` is updated in place through ``optimizer``.
    """
    states = np.asarray(states, dtype=np.float64)
    if states.ndim != 2 or states.shape[0] == 0:
        raise ValueError("critic_train_step needs a non-empty batch of states")
    q, cache = _forward(params, states, actions)
    err = q - np.asarray(targets, dtype=np.float64)
    loss = float(np.mean(err ** 2))
    grads, _, _ = _backward(params, cache, 2.0 * err / err.shape[0])
    optimizer.step(params.arrays(), grads)
    return loss
