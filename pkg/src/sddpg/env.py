"""Episode-level navigation environment with a reset/step interface."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lif import decode_action
from .reward import TIMEOUT, RewardConfig, compute_reward
from .simworld import (
    KinematicsConfig, ObservationConfig, RobotState, WorldSpec, check_collision,
    goal_relative, make_observation, raycast, sample_episode, step_kinematics,
)


@dataclass
class StepRecord:
    t: int
    x: float
    y: float
    theta: float
    v_left: float
    v_right: float
    reward: float
    outcome: str


@dataclass
class NavEnv:
    world: WorldSpec
    kin: KinematicsConfig = field(default_factory=KinematicsConfig)
    reward_cfg: RewardConfig = field(default_factory=RewardConfig)
    obs_cfg: ObservationConfig = field(default_factory=ObservationConfig)
    max_steps: int = 1000
    record: bool = False

    def __post_init__(self):
        self.state: RobotState | None = None
        self.goal = (0.0, 0.0)
        self.steps = 0
        self.clipped_observations = 0
        self.trajectory: list[StepRecord] = []

    def reset(self, rng: np.random.Generator | None = None, start=None, goal=None) -> np.ndarray:
        """Start a new episode from a given or sampled ``(x, y, theta)`` / ``(x, y)``."""
        if start is None or goal is None:
            start, goal = sample_episode(self.world, rng)
        x, y, theta = start
        self.goal = tuple(goal)
        self.steps = 0
        self.trajectory = []
        self.state = self._sense(x, y, theta, 0.0, 0.0, rng)
        return self.observation()

    def _sense(self, x, y, theta, v, w, rng) -> RobotState:
        g_dis, g_dir = goal_relative(x, y, theta, self.goal)
        scan = raycast(x, y, theta, self.world, self.kin, rng)
        _, o_dis = check_collision(x, y, self.world, self.reward_cfg.o_th)
        return RobotState(x, y, theta, v, w, g_dis, g_dir, scan, o_dis)

    def observation(self) -> np.ndarray:
        obs, clipped = make_observation(self.state, self.kin, self.obs_cfg, self.world.diagonal)
        self.clipped_observations += clipped
        return obs

    def step(self, action, rng: np.random.Generator | None = None):
        """Apply an action in [0, 1]^2; returns ``(obs, reward, done, info)``."""
        v_left, v_right = decode_action(action, self.kin.v_min, self.kin.v_max)
        prev = self.state
        x, y, theta, v, w = step_kinematics(prev.x, prev.y, prev.theta, v_left, v_right, self.kin)
        self.state = self._sense(x, y, theta, v, w, rng)
        self.steps += 1
        reward, outcome = compute_reward(prev.g_dis, self.state.g_dis, self.state.o_dis, self.reward_cfg)
        if outcome is None and self.steps >= self.max_steps:
            outcome = TIMEOUT
        if self.record:
            self.trajectory.append(StepRecord(self.steps, x, y, theta, v_left, v_right, reward, outcome or ""))
        info = {"outcome": outcome, "g_dis": self.state.g_dis, "o_dis": self.state.o_dis}
        return self.observation(), reward, outcome is not None, info

    def start_goal_distance(self, start) -> float:
        return math.dist(start[:2], self.goal)
