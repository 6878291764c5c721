"""Spiking actor network forward dynamics.

Two-state leaky integrate-and-fire neurons (synaptic current ``c`` and
membrane voltage ``v``), Poisson rate encoding of the observation and
spike-count decoding of the action.

Arrays follow a ``(T, *batch, channels)`` layout so a single state and a
minibatch of states share the same code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericFaultError


@dataclass(frozen=True)
class LifConfig:
    v_th: float = 0.5
    d_c: float = 0.5
    d_v: float = 0.75
    T: int = 5

    def __post_init__(self):
        if not self.v_th > 0:
            raise ConfigError(f"v_th must be positive, got {self.v_th}")
        if not 0.0 <= self.d_c <= 1.0:
            raise ConfigError(f"d_c must lie in [0, 1], got {self.d_c}")
        if not 0.0 <= self.d_v <= 1.0:
            raise ConfigError(f"d_v must lie in [0, 1], got {self.d_v}")
        if int(self.T) != self.T or self.T < 1:
            raise ConfigError(f"T must be a positive integer, got {self.T}")


@dataclass
class SanParams:
    """Weights ``W[k]`` of shape ``(n_out, n_in)`` and biases ``b[k]`` per layer."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        if len(self.weights) < 1 or len(self.weights) != len(self.biases):
            raise ValueError("need at least one layer and one bias per weight matrix")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ValueError(f"layer {k}: weight {w.shape} / bias {b.shape} mismatch")
            if k and w.shape[1] != self.weights[k - 1].shape[0]:
                raise ValueError(
                    f"layer {k} expects {w.shape[1]} inputs, previous layer has "
                    f"{self.weights[k - 1].shape[0]} neurons"
                )

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def arrays(self) -> list[np.ndarray]:
        """Flat parameter list, in the order optimizers and serializers use."""
        return [a for pair in zip(self.weights, self.biases) for a in pair]

    def copy(self) -> SanParams:
        return SanParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def all_finite(self) -> bool:
        return all(np.isfinite(a).all() for a in self.arrays())


def init_san(sizes, rng: np.random.Generator) -> SanParams:
    """Uniform initialization in +-1/sqrt(fan_in) for weights and biases."""
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(n_in)
        weights.append(rng.uniform(-bound, bound, size=(n_out, n_in)))
        biases.append(rng.uniform(-bound, bound, size=n_out))
    return SanParams(weights, biases)


@dataclass
class LayerState:
    """State of one layer at one timestep.

    ``v`` is the voltage produced by the integration step, before reset.
    A spike (``o == 1``) zeroes the voltage's contribution to the next step
    through the ``(1 - o)`` gate, which is the only reset mechanism.
    """

    c: np.ndarray
    v: np.ndarray
    o: np.ndarray

    @classmethod
    def rest(cls, shape) -> LayerState:
        return cls(np.zeros(shape), np.zeros(shape), np.zeros(shape))

    @property
    def v_after_reset(self) -> np.ndarray:
        return self.v * (1.0 - self.o)


@dataclass
class ForwardTrace:
    """Everything the backward pass needs: inputs, currents, voltages, spikes.

    ``c[k]``, ``v[k]`` and ``o[k]`` have shape ``(T, *batch, n_k)`` for layer
    ``k`` (0-based, layer 0 is the first hidden layer).
    """

    inputs: np.ndarray
    c: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)
    o: list[np.ndarray] = field(default_factory=list)

    @property
    def T(self) -> int:
        return self.inputs.shape[0]

    @property
    def spike_count(self) -> np.ndarray:
        return self.o[-1].sum(axis=0)

    def layer_input(self, k: int) -> np.ndarray:
        return self.inputs if k == 0 else self.o[k - 1]


def poisson_encode(state, T: int, rng: np.random.Generator) -> np.ndarray:
    """Bernoulli spike train, one independent draw per timestep and channel.

    Returns an array of shape ``(T, *state.shape)`` with entries in {0, 1}.
    """
    state = np.asarray(state, dtype=np.float64)
    if np.any(~np.isfinite(state)) or np.any(state < 0.0) or np.any(state > 1.0):
        raise ValueError("spike probabilities must lie in [0, 1]")
    if T < 1:
        raise ValueError("T must be >= 1")
    return (rng.random((T,) + state.shape) < state).astype(np.float64)


def lif_layer_step(prev: LayerState, input_spikes, W, b, cfg: LifConfig) -> LayerState:
    c = cfg.d_c * prev.c + input_spikes @ W.T + b
    v = cfg.d_v * prev.v * (1.0 - prev.o) + c
    if not (np.isfinite(c).all() and np.isfinite(v).all()):
        raise NumericFaultError("non-finite current or voltage in LIF update")
    o = (v > cfg.v_th).astype(np.float64)
    return LayerState(c, v, o)


def san_forward(params: SanParams, train, cfg: LifConfig) -> tuple[ForwardTrace, np.ndarray]:
    """Run the spiking actor for ``cfg.T`` timesteps.

    Returns the full trace and the action ``SpikeCount / T`` of shape
    ``(*batch, n_out)``.
    """
    train = np.asarray(train, dtype=np.float64)
    if train.shape[0] != cfg.T:
        raise ValueError(f"spike train has {train.shape[0]} timesteps, config says {cfg.T}")
    if train.shape[-1] != params.sizes[0]:
        raise ValueError(f"spike train has {train.shape[-1]} channels, network expects {params.sizes[0]}")
    batch = train.shape[1:-1]
    trace = ForwardTrace(inputs=train)
    for w in params.weights:
        shape = (cfg.T,) + batch + (w.shape[0],)
        trace.c.append(np.empty(shape))
        trace.v.append(np.empty(shape))
        trace.o.append(np.empty(shape))

    states = [LayerState.rest(batch + (w.shape[0],)) for w in params.weights]
    d_c, d_v, v_th = cfg.d_c, cfg.d_v, cfg.v_th
    for t in range(cfg.T):
        x = train[t]
        for k, (w, b) in enumerate(zip(params.weights, params.biases)):
            prev = states[k]
            c = d_c * prev.c + x @ w.T + b
            v = d_v * prev.v * (1.0 - prev.o) + c
            o = (v > v_th).astype(np.float64)
            states[k] = LayerState(c, v, o)
            trace.c[k][t], trace.v[k][t], trace.o[k][t] = c, v, o
            x = o
    if not all(np.isfinite(v).all() for v in trace.v):
        raise NumericFaultError("non-finite voltage in spiking actor forward pass")
    return trace, trace.spike_count / cfg.T


def decode_action(action, v_min: float, v_max: float) -> tuple[float, float]:
    """Affine map of the two action entries onto wheel speeds (left, right)."""
    if not v_min < v_max:
        raise ConfigError(f"need v_min < v_max, got {v_min} >= {v_max}")
    a = np.asarray(action, dtype=np.float64)
    if np.any(a < 0.0) or np.any(a > 1.0):
        raise ValueError(f"action entries must lie in [0, 1], got {a}")
    speeds = a * (v_max - v_min) + v_min
    return float(speeds[0]), float(speeds[1])
