"""Uniform wrappers over the spiking and deep actors for the training loop."""

from __future__ import annotations

import numpy as np

from .baselines import (
    DeepActorParams, deep_actor_backward, deep_actor_forward, poissonize_observation,
)
from .lif import LifConfig, SanParams, poisson_encode, san_forward
from .quantize import QuantizedSan, quantized_forward
from .stbp import PseudoGradConfig, san_backward


class SpikingActor:
    kind = "san"

    def __init__(self, params: SanParams, lif: LifConfig, pg: PseudoGradConfig):
        self.params = params
        self.lif = lif
        self.pg = pg

    def act(self, obs, rng):
        _, action = san_forward(self.params, poisson_encode(obs, self.lif.T, rng), self.lif)
        return action

    def forward_batch(self, obs, rng):
        trace, action = san_forward(self.params, poisson_encode(obs, self.lif.T, rng), self.lif)
        return action, trace

    def gradients(self, cache, grad_action):
        return san_backward(cache, self.params, grad_action, self.lif, self.pg).arrays()

    def arrays(self):
        return self.params.arrays()

    def copy(self):
        return SpikingActor(self.params.copy(), self.lif, self.pg)


class DeepActor:
    """``poisson_T`` set: observations pass through spike encode/decode first."""

    def __init__(self, params: DeepActorParams, poisson_T: int | None = None):
        self.params = params
        self.poisson_T = poisson_T

    @property
    def kind(self):
        return "ddpg" if self.poisson_T is None else "ddpg-poisson"

    def _input(self, obs, rng):
        if self.poisson_T is None:
            return np.asarray(obs, dtype=np.float64)
        return poissonize_observation(obs, self.poisson_T, rng)

    def act(self, obs, rng):
        return deep_actor_forward(self.params, self._input(obs, rng))

    def forward_batch(self, obs, rng):
        x = self._input(obs, rng)
        return deep_actor_forward(self.params, x), x

    def gradients(self, cache, grad_action):
        return deep_actor_backward(self.params, cache, grad_action)

    def arrays(self):
        return self.params.arrays()

    def copy(self):
        return DeepActor(self.params.copy(), self.poisson_T)


class QuantizedActor:
    """Inference-only policy running the fixed-point engine."""

    kind = "san-quantized"

    def __init__(self, q):
        self.q = q

    def act(self, obs, rng):
        return quantized_forward(self.q, poisson_encode(obs, self.q.lif.T, rng), self.q.lif)


def as_policy(model):
    """Anything ``load_model`` returns for an actor, as an object with ``act(obs, rng)``."""
    if isinstance(model, QuantizedSan):
        return QuantizedActor(model)
    if not hasattr(model, "act"):
        raise TypeError(f"{type(model).__name__} is not a policy")
    return model
