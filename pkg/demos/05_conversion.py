"""Rate conversion of a deep actor into a spiking one, and why short windows hurt.

Trains a plain DDPG actor briefly, normalizes each layer by its largest
activation on visited states, grid-searches per-layer scales and reports the
mean action error of the spiking copy for several windows T. With leaky
neurons that reset to zero the rate code is coarse, so the error stays well
above zero; it is largest at the short windows used for direct training.

    python3 demos/05_conversion.py [--steps N]
"""

import argparse

from sddpg.config import preset
from sddpg.evaluate import collect_states
from sddpg.lif import LifConfig
from sddpg.quantize import dnn_snn_convert
from sddpg.simworld import bundled_world
from sddpg.training import run_training

parser = argparse.ArgumentParser()
parser.add_argument("--steps", type=int, default=10_000)
args = parser.parse_args()

cfg = preset("desk").replace(actor="ddpg", curriculum=[["desk_env1", args.steps]],
                             actor_delay_steps=min(4000, args.steps // 2))
deep = run_training(cfg, seed=0).agent.actor
states = collect_states(deep, bundled_world("desk_env1"), 1000, 0, cfg.kinematics, cfg.reward,
                        cfg.observation)
for T in (5, 10, 20, 50):
    res = dnn_snn_convert(deep.params, LifConfig(T=T), states, seed=0)
    print(f"T={T:2d}  layer scales {res.scales}  mean action error {res.error:.4f}")
