"""Model and checkpoint files.

Models are ``.npz`` archives: one array per weight/bias (IEEE-754 float64,
exact round trip) plus a JSON ``__meta__`` entry holding the format
version, model kind, layer sizes and neuron/optimizer settings.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .actors import DeepActor, SpikingActor
from .baselines import DeepActorParams
from .critic import CriticParams
from .errors import ConfigError
from .lif import LifConfig, SanParams
from .optim import Adam
from .quantize import QuantizedSan
from .stbp import PseudoGradConfig

MODEL_FORMAT = "sddpg-model/1"
CHECKPOINT_FORMAT = "sddpg-checkpoint/1"


def _pack(prefix, weights, biases) -> dict:
    out = {}
    for k, (w, b) in enumerate(zip(weights, biases)):
        out[f"{prefix}W{k}"] = w
        out[f"{prefix}b{k}"] = b
    return out


def _unpack(data, prefix, n):
    return ([np.array(data[f"{prefix}W{k}"]) for k in range(n)],
            [np.array(data[f"{prefix}b{k}"]) for k in range(n)])


def _write(path, meta: dict, arrays: dict) -> None:
    meta = {"format": MODEL_FORMAT, **meta}
    with open(path, "wb") as fh:
        np.savez(fh, __meta__=np.array(json.dumps(meta, sort_keys=True)), **arrays)


def save_model(path, model) -> None:
    """Write a ``SpikingActor``, ``DeepActor``, ``CriticParams`` or ``QuantizedSan``."""
    if isinstance(model, SpikingActor):
        p = model.params
        meta = {"kind": "san", "sizes": p.sizes, "lif": asdict(model.lif),
                "pseudo_grad": asdict(model.pg)}
        arrays = _pack("", p.weights, p.biases)
    elif isinstance(model, DeepActor):
        p = model.params
        meta = {"kind": "deep_actor", "sizes": p.sizes, "poisson_T": model.poisson_T}
        arrays = _pack("", p.weights, p.biases)
    elif isinstance(model, CriticParams):
        meta = {"kind": "critic", "n_layers": len(model.weights),
                "action_layer": model.action_layer, "action_dim": model.action_dim}
        arrays = _pack("", model.weights, model.biases)
    elif isinstance(model, QuantizedSan):
        meta = {"kind": "quantized_san", "sizes": model.sizes, "lif": asdict(model.lif),
                "v_th": model.v_th, "ratios": model.ratios, "w_max_int": model.w_max_int}
        arrays = _pack("", model.weights, model.biases)
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    _write(path, meta, arrays)


def load_model(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"model file {path} does not exist")
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["__meta__"]))
        if meta.get("format") != MODEL_FORMAT:
            raise ConfigError(f"{path}: expected {MODEL_FORMAT!r}, got {meta.get('format')!r}")
        kind = meta["kind"]
        n = meta.get("n_layers", len(meta.get("sizes", [])) - 1)
        weights, biases = _unpack(data, "", n)
    if kind == "san":
        return SpikingActor(SanParams(weights, biases), LifConfig(**meta["lif"]),
                            PseudoGradConfig(**meta["pseudo_grad"]))
    if kind == "deep_actor":
        return DeepActor(DeepActorParams(weights, biases), meta["poisson_T"])
    if kind == "critic":
        return CriticParams(weights, biases, meta["action_layer"], meta["action_dim"])
    if kind == "quantized_san":
        return QuantizedSan(weights, biases, list(meta["v_th"]), list(meta["ratios"]),
                            LifConfig(**meta["lif"]), meta["w_max_int"])
    raise ConfigError(f"{path}: unknown model kind {kind!r}")


def save_agent_models(out_dir, agent, cfg) -> None:
    out = Path(out_dir)
    save_model(out / "actor.npz", agent.actor)
    save_model(out / "critic.npz", agent.critic)


# -- full training checkpoints -------------------------------------------------

def _adam_arrays(prefix, opt) -> dict:
    if not isinstance(opt, Adam) or opt.m is None:
        return {}
    out = {}
    for i, (m, v) in enumerate(zip(opt.m, opt.v)):
        out[f"{prefix}m{i}"] = m
        out[f"{prefix}v{i}"] = v
    return out


def _restore_adam(prefix, opt, data, n, t) -> None:
    if not isinstance(opt, Adam) or f"{prefix}m0" not in data:
        return
    opt.m = [np.array(data[f"{prefix}m{i}"]) for i in range(n)]
    opt.v = [np.array(data[f"{prefix}v{i}"]) for i in range(n)]
    opt.t = t


def save_training_checkpoint(path, next_stage, agent, buffer, streams, result, cfg) -> None:
    arrays = {}
    for name, params in (("actor", agent.actor.arrays()), ("target_actor", agent.target_actor.arrays()),
                         ("critic", agent.critic.arrays()), ("target_critic", agent.target_critic.arrays())):
        for i, a in enumerate(params):
            arrays[f"{name}{i}"] = a
    arrays.update(_adam_arrays("aopt_", agent.actor_opt))
    arrays.update(_adam_arrays("copt_", agent.critic_opt))
    arrays.update({f"buf_{k}": v for k, v in buffer.state_dict().items()})
    meta = {
        "format": CHECKPOINT_FORMAT,
        "next_stage": next_stage,
        "total_steps": result.total_steps,
        "log_rows": result.log_rows,
        "streams": streams.state(),
        "actor_opt_t": getattr(agent.actor_opt, "t", 0),
        "critic_opt_t": getattr(agent.critic_opt, "t", 0),
        "config": cfg.to_dict(),
    }
    with open(path, "wb") as fh:
        np.savez(fh, __meta__=np.array(json.dumps(meta)), **arrays)


def load_training_checkpoint(path, agent, buffer, streams, result) -> int:
    """Restore everything in place; returns the index of the next stage to run."""
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["__meta__"]))
        if meta.get("format") != CHECKPOINT_FORMAT:
            raise ConfigError(f"{path}: not a training checkpoint")
        for name, params in (("actor", agent.actor.arrays()), ("target_actor", agent.target_actor.arrays()),
                             ("critic", agent.critic.arrays()), ("target_critic", agent.target_critic.arrays())):
            for i, a in enumerate(params):
                a[...] = data[f"{name}{i}"]
        _restore_adam("aopt_", agent.actor_opt, data, len(agent.actor.arrays()), meta["actor_opt_t"])
        _restore_adam("copt_", agent.critic_opt, data, len(agent.critic.arrays()), meta["critic_opt_t"])
        buffer.load_state_dict({k[4:]: data[k] for k in data.files if k.startswith("buf_")})
    streams.load_state(meta["streams"])
    result.total_steps = meta["total_steps"]
    result.log_rows = meta["log_rows"]
    return meta["next_stage"]
