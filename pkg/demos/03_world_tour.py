"""Drive a hand-written homing controller through the desk test world.

Shows the 24-channel observation, the episode outcome and saves the path
next to the obstacles as ``world_tour.svg``. The controller ignores the
lidar, so with most other seeds it drives into an obstacle; that gap is
what the learned actors fill.

    python3 demos/03_world_tour.py
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from sddpg.env import NavEnv
from sddpg.reward import RewardConfig
from sddpg.simworld import KinematicsConfig, ObservationConfig, bundled_world


def homing(obs):
    # obs[1], obs[2]: positive and negative parts of the goal bearing
    turn = np.clip((obs[1] - obs[2]) * 4, -1, 1)
    return np.clip([0.6 - 0.5 * turn, 0.6 + 0.5 * turn], 0, 1)


world = bundled_world("desk_test")
env = NavEnv(world, KinematicsConfig(), RewardConfig(), ObservationConfig(scan_cap=2.5),
             max_steps=1000, record=True)
rng = np.random.default_rng(6)
obs = env.reset(rng)
print("first observation (goal distance, goal left/right, v, w left/right, 18 scans):")
print(np.round(obs, 3) + 0.0)

done, ret = False, 0.0
while not done:
    obs, r, done, info = env.step(homing(obs), rng)
    ret += r
print(f"outcome {info['outcome']} after {len(env.trajectory)} steps, return {ret:.1f}")

fig, ax = plt.subplots(figsize=(5, 5))
for x0, y0, x1, y1 in world.segments:
    ax.plot([x0, x1], [y0, y1], color="black", lw=1)
xy = np.array([[rec.x, rec.y] for rec in env.trajectory])
ax.plot(xy[:, 0], xy[:, 1], color="tab:green")
ax.plot(*env.goal, marker="*", color="tab:red", ms=12)
ax.set_aspect("equal")
fig.savefig("world_tour.svg")
print("saved world_tour.svg")
