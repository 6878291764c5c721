"""Surrogate gradients through a small spiking actor.

The spike threshold has no useful derivative, so the backward pass uses a
rectangular window around the threshold. This script trains a 4-8-2
network with plain gradient steps to make its output rates hit a target,
which only works because those window gradients carry signal through time.

    python3 demos/02_gradients.py
"""

import numpy as np

from sddpg.lif import LifConfig, init_san, poisson_encode, san_forward
from sddpg.stbp import PseudoGradConfig, san_backward

cfg = LifConfig(T=10)
pg = PseudoGradConfig()
rng = np.random.default_rng(1)
params = init_san([4, 8, 2], rng)
for w in params.weights:
    w *= 3.0

states = rng.random((64, 4))
target = np.stack([states[:, 0], 1 - states[:, 1]], axis=1)

for it in range(301):
    train = poisson_encode(states, cfg.T, rng)
    trace, action = san_forward(params, train, cfg)
    err = action - target
    grads = san_backward(trace, params, err / len(states), cfg, pg)
    for p, g in zip(params.arrays(), grads.arrays()):
        p -= 2.0 * g
    if it % 50 == 0:
        print(f"step {it:3d}  mean squared error {np.mean(err ** 2):.4f}")
