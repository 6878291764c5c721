"""Navigation reward: terminal bonuses plus amplified progress toward the goal."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

GOAL = "goal"
COLLISION = "collision"
TIMEOUT = "timeout"
OUTCOMES = (GOAL, COLLISION, TIMEOUT)


@dataclass(frozen=True)
class RewardConfig:
    """``progress_sign="approach"`` rewards ``A * (G_dis(t-1) - G_dis(t))``;
    ``"literal"`` uses ``A * (G_dis(t) - G_dis(t-1))``, which pays for moving away."""

    r_goal: float = 30.0
    r_obstacle: float = -20.0
    amplification: float = 15.0
    g_th: float = 0.5
    o_th: float = 0.35
    progress_sign: str = "approach"

    def __post_init__(self):
        if not self.r_goal > 0 > self.r_obstacle:
            raise ConfigError("need r_goal > 0 > r_obstacle")
        if not (self.g_th > 0 and self.o_th > 0):
            raise ConfigError("reward thresholds must be positive")
        if self.progress_sign not in ("approach", "literal"):
            raise ConfigError(f"progress_sign must be 'approach' or 'literal', got {self.progress_sign!r}")


def compute_reward(prev_g_dis: float, g_dis: float, o_dis: float,
                   cfg: RewardConfig) -> tuple[float, str | None]:
    """Reward for one execution step and the terminal cause, if any.

    The goal check runs first, so reaching the goal while brushing an
    obstacle counts as success.
    """
    if g_dis < cfg.g_th:
        return cfg.r_goal, GOAL
    if o_dis < cfg.o_th:
        return cfg.r_obstacle, COLLISION
    delta = prev_g_dis - g_dis if cfg.progress_sign == "approach" else g_dis - prev_g_dis
    return cfg.amplification * delta, None
