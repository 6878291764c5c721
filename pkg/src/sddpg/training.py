"""Actor-critic training loop: exploration, replay, joint updates, curriculum.

One execution step is one observation, one actor inference and one wheel
command. After the warm-up period every execution step is followed by one
joint critic/actor update on a replay minibatch.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .actors import DeepActor, SpikingActor
from .baselines import init_deep_actor
from .config import TrainConfig
from .critic import CriticParams, critic_train_step, critic_forward, init_critic, td_targets
from .env import NavEnv
from .lif import init_san
from .optim import Optimizer, make_optimizer, soft_update
from .replay import Batch, ReplayBuffer, Transition
from .simworld import resolve_world
from .stbp import action_grad

log = logging.getLogger(__name__)

TRAINLOG_HEADER = "# sddpg-trainlog/1"
TRAINLOG_FIELDS = ["episode", "stage", "world", "outcome", "steps", "return", "total_steps"]
N_OBS = 24
N_ACT = 2


@dataclass
class NoiseSchedule:
    """Gaussian action-noise scale, linear from ``start`` to ``end`` over ``steps``."""

    start: float
    end: float
    steps: int

    def sigma(self, step: int) -> float:
        if self.steps <= 0:
            return self.end
        frac = min(max(step / self.steps, 0.0), 1.0)
        return self.start + (self.end - self.start) * frac


def explore_action(action, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Additive Gaussian perturbation clamped back into [0, 1]."""
    action = np.asarray(action, dtype=np.float64)
    if sigma <= 0:
        return action.copy()
    return np.clip(action + rng.normal(0.0, sigma, size=action.shape), 0.0, 1.0)


def make_actor(cfg: TrainConfig, rng: np.random.Generator):
    sizes = [N_OBS] + list(cfg.actor_hidden) + [N_ACT]
    if cfg.actor == "san":
        return SpikingActor(init_san(sizes, rng), cfg.lif, cfg.pseudo_grad)
    poisson_T = cfg.T if cfg.actor == "ddpg-poisson" else None
    return DeepActor(init_deep_actor(sizes, rng), poisson_T)


@dataclass
class Agent:
    actor: SpikingActor | DeepActor
    critic: CriticParams
    target_actor: SpikingActor | DeepActor
    target_critic: CriticParams
    actor_opt: Optimizer
    critic_opt: Optimizer

    @classmethod
    def create(cls, cfg: TrainConfig, rng: np.random.Generator) -> Agent:
        actor = make_actor(cfg, rng)
        critic = init_critic(N_OBS, N_ACT, cfg.critic_hidden, rng, cfg.critic_action_layer)
        return cls(actor, critic, actor.copy(), critic.copy(),
                   make_optimizer(cfg.optimizer, cfg.actor_lr),
                   make_optimizer(cfg.optimizer, cfg.critic_lr))

    def all_finite(self) -> bool:
        arrays = self.actor.arrays() + self.critic.arrays()
        return all(np.isfinite(a).all() for a in arrays)


def sddpg_update(agent: Agent, batch: Batch, cfg: TrainConfig, rng: np.random.Generator,
                 update_actor: bool = True) -> dict:
    """One critic step on the TD error, one actor step on ``-Q``, then soft target updates."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    next_actions, _ = agent.target_actor.forward_batch(batch.next_states, rng)
    next_q = critic_forward(agent.target_critic, batch.next_states, next_actions)
    y = td_targets(batch.rewards, batch.terminals, next_q, cfg.gamma)
    critic_loss = critic_train_step(agent.critic, batch.states, batch.actions, y, agent.critic_opt)

    soft_update(agent.target_critic.arrays(), agent.critic.arrays(), cfg.tau)
    if not update_actor:
        return {"critic_loss": critic_loss, "mean_action": float("nan"), "actor_grad_norm": 0.0}
    actions, cache = agent.actor.forward_batch(batch.states, rng)
    g_action = action_grad(agent.critic, batch.states, actions) / len(batch)
    grads = agent.actor.gradients(cache, g_action)
    agent.actor_opt.step(agent.actor.arrays(), grads)
    soft_update(agent.target_actor.arrays(), agent.actor.arrays(), cfg.tau)
    return {"critic_loss": critic_loss, "mean_action": float(actions.mean()),
            "actor_grad_norm": float(np.sqrt(sum((g * g).sum() for g in grads)))}


@dataclass
class TrainResult:
    agent: Agent
    log_rows: list[dict] = field(default_factory=list)
    total_steps: int = 0

    def log_csv(self) -> str:
        return format_trainlog(self.log_rows)


def format_trainlog(rows) -> str:
    buf = io.StringIO()
    buf.write(TRAINLOG_HEADER + "\n")
    writer = csv.DictWriter(buf, fieldnames=TRAINLOG_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({**row, "return": repr(float(row["return"]))})
    return buf.getvalue()


def read_trainlog(path) -> list[dict]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != TRAINLOG_HEADER:
        raise ValueError(f"{path} is not a training log ({TRAINLOG_HEADER!r} header missing)")
    return list(csv.DictReader(lines[1:]))


class _Streams:
    """Independent random streams derived from one seed."""

    names = ("init", "env", "act", "sample", "update")

    def __init__(self, seed: int):
        children = np.random.SeedSequence(seed).spawn(len(self.names))
        for name, child in zip(self.names, children):
            setattr(self, name, np.random.default_rng(child))

    def state(self) -> dict:
        return {n: getattr(self, n).bit_generator.state for n in self.names}

    def load_state(self, state: dict) -> None:
        for n in self.names:
            getattr(self, n).bit_generator.state = state[n]


def run_training(cfg: TrainConfig, seed: int, out_dir=None, resume_from=None,
                 progress=None) -> TrainResult:
    """Train through the curriculum; returns the agent and the per-episode log.

    With ``out_dir`` a full checkpoint is written after every stage, plus the
    actor/critic model files and ``train_log.csv``. ``resume_from`` names a
    stage checkpoint to continue from. An episode still running when a stage's
    step budget is used up is abandoned and not logged.
    """
    from . import serialize  # local import: serialize depends on this module's types

    streams = _Streams(seed)
    agent = Agent.create(cfg, streams.init)
    buffer = ReplayBuffer(cfg.replay_capacity, N_OBS, N_ACT)
    noise = NoiseSchedule(cfg.noise_sigma_start, cfg.noise_sigma_end, cfg.total_steps)
    result = TrainResult(agent)
    first_stage = 0
    if resume_from is not None:
        first_stage = serialize.load_training_checkpoint(resume_from, agent, buffer, streams, result)
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    worlds = [resolve_world(ref) for ref, _ in cfg.curriculum]
    for stage, ((ref, budget), world) in enumerate(zip(cfg.curriculum, worlds)):
        if stage < first_stage:
            continue
        env = NavEnv(world, cfg.kinematics, cfg.reward, cfg.observation, cfg.max_episode_steps)
        used = 0
        budget = int(budget)
        while used < budget:
            obs = env.reset(streams.env)
            ep_return, ep_steps, outcome = 0.0, 0, None
            while used < budget:
                step = result.total_steps
                if step < cfg.warmup_steps and cfg.warmup_random_actions:
                    action = streams.act.random(N_ACT)
                else:
                    action = explore_action(agent.actor.act(obs, streams.act),
                                            noise.sigma(step), streams.act)
                next_obs, reward, done, info = env.step(action, streams.env)
                buffer.push(Transition(obs, action, reward, next_obs, done, info["outcome"]))
                result.total_steps += 1
                used += 1
                ep_return += reward
                ep_steps += 1
                if result.total_steps > cfg.warmup_steps:
                    batch = buffer.sample(cfg.batch_size, streams.sample)
                    sddpg_update(agent, batch, cfg, streams.update,
                                 update_actor=result.total_steps > cfg.actor_delay_steps)
                obs = next_obs
                if done:
                    outcome = info["outcome"]
                    break
            if outcome is None:
                break
            result.log_rows.append({
                "episode": len(result.log_rows), "stage": stage, "world": world.name,
                "outcome": outcome, "steps": ep_steps, "return": ep_return,
                "total_steps": result.total_steps,
            })
            if progress is not None:
                progress(result.log_rows[-1])
        if not agent.all_finite():
            raise FloatingPointError(f"non-finite parameters after stage {stage}")
        log.info("seed %d stage %d (%s) done at step %d, %d episodes",
                 seed, stage, ref, result.total_steps, len(result.log_rows))
        if out is not None:
            serialize.save_training_checkpoint(out / f"stage{stage}.ckpt.npz", stage + 1,
                                               agent, buffer, streams, result, cfg)
    if out is not None:
        serialize.save_agent_models(out, agent, cfg)
        (out / "train_log.csv").write_text(result.log_csv())
        cfg.save(out / "config.json")
        (out / "seed.json").write_text(json.dumps({"seed": seed}) + "\n")
    return result
