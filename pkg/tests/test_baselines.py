import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sddpg.actors import DeepActor, SpikingActor
from sddpg.baselines import (
    DeepActorParams, deep_actor_backward, deep_actor_forward, init_deep_actor, poissonize_observation,
)
from sddpg.lif import LifConfig, init_san
from sddpg.stbp import PseudoGradConfig


def reference_forward(params, x):
    h = list(x)
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = [sum(wi * hi for wi, hi in zip(row, h)) + bi for row, bi in zip(w.tolist(), b.tolist())]
        h = [max(v, 0.0) for v in z] if k < params.n_layers - 1 else [1 / (1 + np.exp(-v)) for v in z]
    return h


def test_zero_params_give_half(rng):
    p = init_deep_actor([24, 8, 8, 2], rng)
    for a in p.arrays():
        a[...] = 0
    np.testing.assert_array_equal(deep_actor_forward(p, rng.random(24)), [0.5, 0.5])


def test_matches_reference(rng):
    p = init_deep_actor([6, 5, 4, 2], rng)
    p.weights[-1] = rng.normal(size=(2, 4))
    for _ in range(10):
        x = rng.random(6)
        np.testing.assert_allclose(deep_actor_forward(p, x), reference_forward(p, x), rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.1, 20))
def test_output_range(seed, scale):
    rng = np.random.default_rng(seed)
    p = init_deep_actor([6, 5, 2], rng)
    for w in p.weights:
        w *= scale
    out = deep_actor_forward(p, rng.random((20, 6)))
    assert np.all((out >= 0) & (out <= 1))


def test_backward_finite_differences(rng):
    p = init_deep_actor([5, 6, 4, 2], rng)
    p.weights[-1] = rng.normal(size=(2, 4))
    x = rng.random((3, 5))
    g = rng.normal(size=(3, 2))
    grads = deep_actor_backward(p, x, g)
    f = lambda: float(np.sum(deep_actor_forward(p, x) * g))
    h = 1e-6
    for arr, grad in zip(p.arrays(), grads):
        for idx in np.ndindex(arr.shape):
            old = arr[idx]
            arr[idx] = old + h
            up = f()
            arr[idx] = old - h
            down = f()
            arr[idx] = old
            fd = (up - down) / (2 * h)
            assert abs(grad[idx] - fd) <= 1e-4 * max(abs(fd), 1e-6)


class TestPoissonize:
    def test_degenerate(self, rng):
        np.testing.assert_array_equal(poissonize_observation(np.array([0.0, 1.0]), 5, rng), [0.0, 1.0])

    def test_grid(self, rng):
        out = poissonize_observation(rng.random(100), 7, rng)
        np.testing.assert_allclose(out * 7, np.round(out * 7))

    def test_mean(self, rng):
        p = 0.3
        out = poissonize_observation(np.full(10_000, p), 5, rng)
        sigma = np.sqrt(p * (1 - p) / 5 / 10_000)
        assert abs(out.mean() - p) < 3 * sigma

    def test_large_T_approaches_plain(self, rng):
        p = init_deep_actor([24, 16, 2], rng)
        p.weights[-1] = rng.normal(size=(2, 16))
        obs = rng.random(24)
        err = [np.abs(deep_actor_forward(p, poissonize_observation(obs, T, rng)) - deep_actor_forward(p, obs)).mean()
               for T in (5, 50_000)]
        assert err[1] < err[0] and err[1] < 1e-2

    def test_out_of_range(self, rng):
        with pytest.raises(ValueError):
            poissonize_observation(np.array([1.5]), 5, rng)


def test_actor_kinds(rng):
    deep = DeepActor(init_deep_actor([24, 8, 2], rng))
    noisy = DeepActor(init_deep_actor([24, 8, 2], rng), poisson_T=5)
    san = SpikingActor(init_san([24, 8, 2], rng), LifConfig(), PseudoGradConfig())
    assert (deep.kind, noisy.kind, san.kind) == ("ddpg", "ddpg-poisson", "san")
    for actor in (deep, noisy, san):
        a = actor.act(rng.random(24), rng)
        assert a.shape == (2,) and np.all((a >= 0) & (a <= 1))
        clone = actor.copy()
        assert all(x is not y and np.array_equal(x, y) for x, y in zip(clone.arrays(), actor.arrays()))
