"""Train a small spiking actor, quantize it to 8-bit weights and compare both.

The full desk preset needs about four and a half minutes per run; this
script shrinks it (default 6000 steps) so the whole pipeline finishes in
about a minute. A run that short barely learns to navigate; the point is
the float and integer actors behaving alike. Pass ``--steps 30000 --full``
for a real desk run.

    python3 demos/04_train_quantize_eval.py [--steps N] [--full]
"""

import argparse

import numpy as np

from sddpg.config import preset
from sddpg.evaluate import evaluate, generate_pairs
from sddpg.quantize import QuantizedSan, quantize_san
from sddpg.actors import as_policy
from sddpg.simworld import bundled_world
from sddpg.training import run_training

parser = argparse.ArgumentParser()
parser.add_argument("--steps", type=int, default=6000)
parser.add_argument("--full", action="store_true", help="keep desk network widths")
parser.add_argument("--seed", type=int, default=0)
args = parser.parse_args()

cfg = preset("desk")
half = args.steps // 3
cfg = cfg.replace(curriculum=[["desk_env1", half], ["desk_env2", args.steps - half]],
                  actor_delay_steps=min(cfg.actor_delay_steps, half))
if not args.full:
    cfg = cfg.replace(actor_hidden=[32, 32], critic_hidden=[64, 64], batch_size=64)


def progress(row):
    if row["episode"] % 10 == 9:
        print(f"episode {row['episode'] + 1}: {row['outcome']} after {row['steps']} steps "
              f"(total {row['total_steps']})")


res = run_training(cfg, args.seed, progress=progress)
san = res.agent.actor
q: QuantizedSan = quantize_san(san.params, san.lif.v_th, 127, san.lif)
print("rescale ratios per layer", [round(r, 1) for r in q.ratios], "integer thresholds", q.v_th)

world = bundled_world(cfg.eval_world)
pairs = generate_pairs(world, 20, cfg.eval_min_separation, seed=0)
for name, policy in (("float", san), ("int8", as_policy(q))):
    rep = evaluate(policy, name, world, pairs, 0, cfg.kinematics, cfg.reward, cfg.observation,
                   cfg.max_episode_steps)
    rates = {k: round(v, 2) for k, v in rep.rates().items()}
    print(f"{name:5s} on {world.name}: {rates}")
