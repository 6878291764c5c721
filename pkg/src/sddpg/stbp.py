"""Spatiotemporal backpropagation through the two-state LIF actor.

The spike nonlinearity gets a rectangular pseudo-derivative around the
threshold. The reset gate ``(1 - o)`` is treated as a constant, so the only
path from a spike back to a voltage is the pseudo-derivative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .critic import CriticParams, critic_backward
from .errors import ConfigError
from .lif import ForwardTrace, LifConfig, SanParams


@dataclass(frozen=True)
class PseudoGradConfig:
    """Rectangular window: height ``a1``, half-width ``a2`` around the threshold.

    ``current_grad_from_next_voltage`` swaps the current adjoint
    ``dL/dc(t) = dL/dv(t) + d_c dL/dc(t+1)`` for the variant that reads
    ``dL/dv(t+1)`` instead of ``dL/dv(t)``. The default is the exact gradient
    of the unrolled graph.
    """

    a1: float = 1.0
    a2: float = 0.5
    current_grad_from_next_voltage: bool = False

    def __post_init__(self):
        if not self.a1 > 0 or not self.a2 > 0:
            raise ConfigError(f"a1 and a2 must be positive, got {self.a1}, {self.a2}")


@dataclass
class SanGradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def arrays(self) -> list[np.ndarray]:
        return [a for pair in zip(self.weights, self.biases) for a in pair]


def pseudo_grad(v, cfg: PseudoGradConfig, v_th: float) -> np.ndarray:
    """``a1`` where ``|v - v_th| < a2`` (strict), else 0."""
    v = np.asarray(v, dtype=np.float64)
    return np.where(np.abs(v - v_th) < cfg.a2, cfg.a1, 0.0)


def action_grad(critic: CriticParams, state, action) -> np.ndarray:
    """Gradient of ``L = -Q(s, a)`` with respect to the action."""
    q_shape = np.shape(np.asarray(state))[:-1]
    _, _, g_action = critic_backward(critic, state, action, -np.ones(q_shape))
    return g_action


def san_backward(trace: ForwardTrace, params: SanParams, grad_action, cfg: LifConfig,
                 pg: PseudoGradConfig) -> SanGradients:
    """Parameter gradients of a loss whose gradient w.r.t. the action is ``grad_action``.

    For a batched trace ``grad_action`` has shape ``(*batch, n_out)`` and the
    returned gradients are summed over the batch.
    """
    T = trace.T
    if T != cfg.T or len(trace.v) != params.n_layers:
        raise ValueError("trace does not match the network/config it is being differentiated against")
    for k, w in enumerate(params.weights):
        if trace.v[k].shape[-1] != w.shape[0]:
            raise ValueError(f"trace layer {k} has {trace.v[k].shape[-1]} neurons, weights say {w.shape[0]}")
    grad_action = np.asarray(grad_action, dtype=np.float64)
    if grad_action.shape != trace.o[-1].shape[1:]:
        raise ValueError(f"grad_action shape {grad_action.shape} does not match action {trace.o[-1].shape[1:]}")

    n = params.n_layers
    d_c, d_v = cfg.d_c, cfg.d_v
    batch_shape = grad_action.shape[:-1]
    grad_w = [np.zeros_like(w) for w in params.weights]
    grad_b = [np.zeros_like(b) for b in params.biases]
    # adjoints carried from step t+1 to step t, per layer
    next_gv = [np.zeros(batch_shape + (w.shape[0],)) for w in params.weights]
    next_gc = [np.zeros(batch_shape + (w.shape[0],)) for w in params.weights]
    grad_out = grad_action / T

    for t in reversed(range(T)):
        g_o = grad_out
        for k in reversed(range(n)):
            v = trace.v[k][t]
            o = trace.o[k][t]
            g_v = pseudo_grad(v, pg, cfg.v_th) * g_o + d_v * (1.0 - o) * next_gv[k]
            if pg.current_grad_from_next_voltage:
                g_c = (next_gv[k] + d_c * next_gc[k]) if t < T - 1 else g_v
            else:
                g_c = g_v + d_c * next_gc[k]
            x = trace.layer_input(k)[t]
            grad_w[k] += g_c.reshape(-1, g_c.shape[-1]).T @ x.reshape(-1, x.shape[-1])
            grad_b[k] += g_c.reshape(-1, g_c.shape[-1]).sum(axis=0)
            if k:
                g_o = g_c @ params.weights[k]
            next_gv[k], next_gc[k] = g_v, g_c
    return SanGradients(grad_w, grad_b)
