"""One LIF neuron driven by a Poisson spike train.

Prints the current, voltage and spike of every timestep, then shows how a
two-neuron output layer's spike counts become wheel speeds.

    python3 demos/01_lif_neuron.py
"""

import numpy as np

from sddpg.lif import LayerState, LifConfig, decode_action, lif_layer_step, poisson_encode

cfg = LifConfig(T=12)
rng = np.random.default_rng(0)

# three input channels firing with probability 0.9, 0.5 and 0.1
train = poisson_encode(np.array([0.9, 0.5, 0.1]), cfg.T, rng)
W = np.array([[0.12, 0.08, 0.2]])
b = np.array([0.0])

state = LayerState.rest(1)
print(" t  input    current  voltage  spike")
for t in range(cfg.T):
    state = lif_layer_step(state, train[t], W, b, cfg)
    print(f"{t:2d}  {train[t].astype(int)}  {state.c[0]:7.3f}  {state.v[0]:7.3f}  {int(state.o[0])}")

# an action is the output spike count over T; each channel scales to a wheel speed
counts = np.array([3, 5])
action = counts / 5
print("\naction", action, "-> wheel speeds (m/s)", decode_action(action, 0.05, 0.5))
