"""Integer deployment of a trained spiking actor, and DNN-to-SNN conversion.

Layer-wise rescaling multiplies a layer's weights, bias and threshold by one
ratio ``r = W_max_int / max|W|`` and rounds, so the weight/threshold ratio
(and therefore spiking) is preserved up to rounding.

The fixed-point engine keeps currents and voltages in int64 with
``FRAC_BITS`` fractional bits. Decay factors become 12-bit numerators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baselines import DeepActorParams, deep_actor_forward
from .errors import DegenerateLayerError
from .lif import LifConfig, SanParams, poisson_encode, san_forward

FRAC_BITS = 24
DECAY_BITS = 12
_INT64_MAX = np.iinfo(np.int64).max


@dataclass
class QuantizedSan:
    weights: list[np.ndarray]  # int8 in [-w_max_int, w_max_int]
    biases: list[np.ndarray]  # int64
    v_th: list[int]
    ratios: list[float]
    lif: LifConfig
    w_max_int: int = 127

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def decay_numerators(self) -> tuple[int, int]:
        scale = 1 << DECAY_BITS
        return int(round(self.lif.d_c * scale)), int(round(self.lif.d_v * scale))


def quantize_san(params: SanParams, v_th: float, w_max_int: int = 127,
                 lif: LifConfig | None = None) -> QuantizedSan:
    if not 0 < w_max_int <= 127:
        raise ValueError("w_max_int must fit a signed 8-bit weight")
    lif = lif or LifConfig(v_th=v_th)
    weights, biases, thresholds, ratios = [], [], [], []
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        w_max = float(np.abs(w).max())
        if w_max == 0.0:
            raise DegenerateLayerError(f"layer {k} has all-zero weights")
        r = w_max_int / w_max
        th = int(np.round(r * v_th))
        if th < 1:
            raise DegenerateLayerError(f"layer {k}: rescaled threshold rounds to {th}")
        weights.append(np.clip(np.round(r * w), -w_max_int, w_max_int).astype(np.int8))
        biases.append(np.round(r * b).astype(np.int64))
        thresholds.append(th)
        ratios.append(r)
    return QuantizedSan(weights, biases, thresholds, ratios, lif, w_max_int)


def _check_headroom(q: QuantizedSan, T: int) -> None:
    """Refuse to run when the worst-case state could overflow the int64 accumulators."""
    dc = q.lif.d_c
    dv = q.lif.d_v
    c_gain = sum(dc ** t for t in range(T))
    v_gain = sum(dv ** t for t in range(T))
    for k, (w, b) in enumerate(zip(q.weights, q.biases)):
        drive = np.abs(w.astype(np.int64)).sum(axis=1) + np.abs(b)
        bound = float(drive.max()) * c_gain * v_gain * 2.0 ** (FRAC_BITS + DECAY_BITS)
        if bound >= _INT64_MAX:
            raise OverflowError(f"layer {k}: state bound {bound:.3g} exceeds int64 accumulators")


def quantized_forward(q: QuantizedSan, train, cfg: LifConfig, return_spikes: bool = False):
    """Fixed-point rerun of the LIF recurrence on integer weights and thresholds.

    Returns the action ``SpikeCount / T``; with ``return_spikes`` also the
    per-layer spike arrays of shape ``(T, *batch, n_k)``.
    """
    train = np.asarray(train)
    T = cfg.T
    if train.shape[0] != T:
        raise ValueError(f"spike train has {train.shape[0]} timesteps, config says {T}")
    _check_headroom(q, T)
    num_c, num_v = q.decay_numerators
    x_shape = train.shape[1:-1]
    one = np.int64(1) << FRAC_BITS
    ws = [w.astype(np.int64) for w in q.weights]
    bs = [b << FRAC_BITS for b in q.biases]
    ths = [np.int64(th) << FRAC_BITS for th in q.v_th]
    c = [np.zeros(x_shape + (w.shape[0],), dtype=np.int64) for w in ws]
    v = [np.zeros_like(a) for a in c]
    o = [np.zeros_like(a) for a in c]
    spikes = [np.zeros((T,) + a.shape, dtype=np.int8) for a in c] if return_spikes else None
    count = np.zeros(x_shape + (ws[-1].shape[0],), dtype=np.int64)
    for t in range(T):
        x = train[t].astype(np.int64)
        for k, w in enumerate(ws):
            c[k] = ((c[k] * num_c) >> DECAY_BITS) + (x @ w.T) * one + bs[k]
            v[k] = ((v[k] * num_v) >> DECAY_BITS) * (1 - o[k]) + c[k]
            o[k] = (v[k] > ths[k]).astype(np.int64)
            if return_spikes:
                spikes[k][t] = o[k]
            x = o[k]
        count += o[-1]
    action = count / T
    return (action, spikes) if return_spikes else action


# -- DNN to SNN conversion ------------------------------------------------------

DEFAULT_GRID = (0.5, 0.7, 0.85, 1.0, 1.2, 1.4, 2.0)


def _layer_maxima(params: DeepActorParams, states) -> list[float]:
    _, hidden = deep_actor_forward(params, states, return_hidden=True)
    # inputs are spike probabilities, at most 1
    return [1.0] + [max(float(h.max()), 1e-12) for h in hidden]


def _scaled_san(params: DeepActorParams, maxima, lif: LifConfig, scales) -> SanParams:
    gain = lif.v_th * (1.0 - lif.d_c) if lif.d_c < 1.0 else lif.v_th
    weights, biases = [], []
    n = params.n_layers
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        if k < n - 1:
            w_rate = w * maxima[k] / maxima[k + 1]
            b_rate = b / maxima[k + 1]
        else:
            # output: first-order sigmoid 0.5 + z/4, clipped to [0, 1] by rate saturation
            w_rate = w * maxima[k] / 4.0
            b_rate = b / 4.0 + 0.5
        weights.append(w_rate * gain * scales[k])
        biases.append(b_rate * gain * scales[k])
    return SanParams(weights, biases)


def conversion_error(san: SanParams, deep: DeepActorParams, states, lif: LifConfig,
                     trains=None, seed: int = 0) -> float:
    """Mean absolute action difference between the SNN and its source network."""
    target = deep_actor_forward(deep, states)
    if trains is None:
        trains = poisson_encode(states, lif.T, np.random.default_rng(seed))
    _, action = san_forward(san, trains, lif)
    return float(np.mean(np.abs(action - target)))


@dataclass
class ConversionResult:
    params: SanParams
    scales: list[float]
    error: float
    evaluated: list[tuple[tuple[float, ...], float]]


def dnn_snn_convert(deep: DeepActorParams, lif: LifConfig, calibration_states,
                    grid=DEFAULT_GRID, seed: int = 0, sweeps: int = 2) -> ConversionResult:
    """Convert a ReLU/sigmoid deep actor into spiking-actor weights.

    Each layer is normalized by the largest activation it produces on the
    calibration states; then per-layer multipliers from ``grid`` are chosen by
    coordinate search on the mean action error (same Poisson draws for every
    candidate). The returned error is the smallest error evaluated.
    """
    states = np.asarray(calibration_states, dtype=np.float64)
    if states.ndim != 2 or len(states) == 0:
        raise ValueError("calibration set must be a non-empty (N, channels) array")
    grid = tuple(float(g) for g in grid)
    maxima = _layer_maxima(deep, states)
    trains = poisson_encode(states, lif.T, np.random.default_rng(seed))
    evaluated: dict[tuple[float, ...], float] = {}

    def score(scales) -> float:
        key = tuple(scales)
        if key not in evaluated:
            san = _scaled_san(deep, maxima, lif, key)
            evaluated[key] = conversion_error(san, deep, states, lif, trains=trains)
        return evaluated[key]

    best = [1.0 if 1.0 in grid else grid[0]] * deep.n_layers
    score(best)
    for _ in range(sweeps):
        for k in range(deep.n_layers):
            for g in grid:
                trial = list(best)
                trial[k] = g
                score(trial)
            best = list(min(evaluated, key=evaluated.get))
    key = min(evaluated, key=evaluated.get)
    return ConversionResult(_scaled_san(deep, maxima, lif, key), list(key), evaluated[key],
                            list(evaluated.items()))
