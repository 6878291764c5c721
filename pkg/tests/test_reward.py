import pytest
from hypothesis import given, strategies as st

from sddpg.errors import ConfigError
from sddpg.reward import COLLISION, GOAL, RewardConfig, compute_reward

CFG = RewardConfig()


def test_table_constants():
    assert (CFG.r_goal, CFG.r_obstacle, CFG.amplification, CFG.g_th, CFG.o_th) == (30.0, -20.0, 15.0, 0.5, 0.35)


def test_goal_branch():
    assert compute_reward(0.6, 0.4, 5.0, CFG) == (30.0, GOAL)


def test_collision_branch():
    assert compute_reward(3.0, 2.9, 0.3, CFG) == (-20.0, COLLISION)


def test_progress_branch_rewards_approach():
    r, cause = compute_reward(5.00, 4.98, 2.0, CFG)
    assert cause is None
    assert r == pytest.approx(0.3)


def test_literal_sign_rewards_retreat():
    r, _ = compute_reward(5.00, 4.98, 2.0, RewardConfig(progress_sign="literal"))
    assert r == pytest.approx(-0.3)


def test_goal_beats_collision():
    assert compute_reward(0.6, 0.4, 0.1, CFG) == (30.0, GOAL)


def test_thresholds_are_strict():
    assert compute_reward(0.6, 0.5, 1.0, CFG)[1] is None
    assert compute_reward(1.0, 0.9, 0.35, CFG)[1] is None


@pytest.mark.parametrize("kwargs", [
    {"r_goal": -1.0}, {"r_obstacle": 5.0}, {"g_th": 0.0}, {"o_th": -0.1}, {"progress_sign": "up"},
])
def test_invalid_config(kwargs):
    with pytest.raises(ConfigError):
        RewardConfig(**kwargs)


@given(st.floats(0, 30), st.floats(0, 30), st.floats(0, 30))
def test_exactly_one_branch(prev, cur, o_dis):
    r, cause = compute_reward(prev, cur, o_dis, CFG)
    if cur < CFG.g_th:
        assert cause == GOAL
    elif o_dis < CFG.o_th:
        assert cause == COLLISION
    else:
        assert cause is None and r == pytest.approx(15 * (prev - cur))
