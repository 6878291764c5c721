"""Training/evaluation configuration and the two named presets.

``paper`` carries the full-scale hyperparameters; ``desk`` is the reduced
protocol that runs on a laptop CPU in minutes per seed.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .lif import LifConfig
from .reward import RewardConfig
from .simworld import KinematicsConfig, ObservationConfig
from .stbp import PseudoGradConfig

CONFIG_FORMAT = "sddpg-config/1"


@dataclass
class TrainConfig:
    preset: str = "paper"
    actor: str = "san"

    # spiking actor
    v_th: float = 0.5
    d_c: float = 0.5
    d_v: float = 0.75
    T: int = 5
    a1: float = 1.0
    a2: float = 0.5
    current_grad_from_next_voltage: bool = False
    actor_hidden: list[int] = field(default_factory=lambda: [256, 256])

    # critic
    critic_hidden: list[int] = field(default_factory=lambda: [512, 512])
    critic_action_layer: int = 1

    # optimization
    batch_size: int = 256
    actor_lr: float = 1e-5
    critic_lr: float = 1e-4
    optimizer: str = "adam"
    gamma: float = 0.99
    tau: float = 0.01
    replay_capacity: int = 100_000
    warmup_steps: int = 1000
    warmup_random_actions: bool = True
    # critic-only updates until this step, so the actor follows a critic that has seen data
    actor_delay_steps: int = 0
    noise_sigma_start: float = 0.5
    noise_sigma_end: float = 0.05

    # reward
    r_goal: float = 30.0
    r_obstacle: float = -20.0
    amplification: float = 15.0
    g_th: float = 0.5
    o_th: float = 0.35
    progress_sign: str = "approach"

    # robot and sensing
    v_min: float = 0.05
    v_max: float = 0.5
    wheel_separation: float = 0.23
    robot_radius: float = 0.175
    dt: float = 0.1
    range_min: float = 0.2
    range_max: float = 40.0
    scan_cap: float | None = None
    g_dis_cap: float | None = None
    max_episode_steps: int = 1000

    # curriculum: [world name or path, execution steps]
    curriculum: list[list] = field(default_factory=lambda: [
        ["paper_env1", 25_000], ["paper_env2", 35_000], ["paper_env3", 60_000], ["paper_env4", 80_000],
    ])

    # evaluation
    eval_world: str = "paper_test"
    eval_episodes: int = 200
    eval_min_separation: float = 6.0

    def __post_init__(self):
        if self.actor not in ("san", "ddpg", "ddpg-poisson"):
            raise ConfigError(f"actor must be san, ddpg or ddpg-poisson, got {self.actor!r}")
        if self.batch_size < 1 or self.replay_capacity < 1:
            raise ConfigError("batch_size and replay_capacity must be positive")
        if not 0.0 < self.tau <= 1.0 or not 0.0 <= self.gamma <= 1.0:
            raise ConfigError("need 0 < tau <= 1 and 0 <= gamma <= 1")
        for entry in self.curriculum:
            if len(entry) != 2 or int(entry[1]) < 0:
                raise ConfigError(f"curriculum entries are [world, steps >= 0], got {entry}")
        if self.actor_delay_steps < 0:
            raise ConfigError("actor_delay_steps must be >= 0")
        if self.eval_episodes < 1:
            raise ConfigError("eval_episodes must be >= 1")
        # sub-configs validate their own fields
        self.lif, self.pseudo_grad, self.reward, self.kinematics

    @property
    def lif(self) -> LifConfig:
        return LifConfig(self.v_th, self.d_c, self.d_v, self.T)

    @property
    def pseudo_grad(self) -> PseudoGradConfig:
        return PseudoGradConfig(self.a1, self.a2, self.current_grad_from_next_voltage)

    @property
    def reward(self) -> RewardConfig:
        return RewardConfig(self.r_goal, self.r_obstacle, self.amplification,
                            self.g_th, self.o_th, self.progress_sign)

    @property
    def kinematics(self) -> KinematicsConfig:
        return KinematicsConfig(self.wheel_separation, self.robot_radius, self.dt,
                                range_min=self.range_min, range_max=self.range_max,
                                v_min=self.v_min, v_max=self.v_max)

    @property
    def observation(self) -> ObservationConfig:
        return ObservationConfig(self.g_dis_cap, self.scan_cap)

    @property
    def total_steps(self) -> int:
        return sum(int(s) for _, s in self.curriculum)

    def replace(self, **changes) -> TrainConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = {"format": CONFIG_FORMAT}
        d.update(dataclasses.asdict(self))
        return d

    @classmethod
    def from_dict(cls, d) -> TrainConfig:
        d = dict(d)
        fmt = d.pop("format", CONFIG_FORMAT)
        if fmt != CONFIG_FORMAT:
            raise ConfigError(f"expected config format {CONFIG_FORMAT!r}, got {fmt!r}")
        base = preset(d.get("preset", "paper"))
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return base.replace(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> TrainConfig:
        try:
            d = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(d)


def preset(name: str) -> TrainConfig:
    if name == "paper":
        return TrainConfig()
    if name == "desk":
        return TrainConfig(
            preset="desk",
            actor_hidden=[64, 64],
            critic_hidden=[128, 128],
            batch_size=128,
            actor_lr=1e-4,
            critic_lr=1e-3,
            replay_capacity=30_000,
            scan_cap=2.5,
            actor_delay_steps=4000,
            curriculum=[["desk_env1", 10_000], ["desk_env2", 20_000]],
            eval_world="desk_test",
            eval_episodes=50,
            eval_min_separation=4.0,
        )
    raise ConfigError(f"unknown preset {name!r} (expected 'paper' or 'desk')")
