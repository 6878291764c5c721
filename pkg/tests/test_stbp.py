import numpy as np
import pytest

from sddpg.critic import CriticParams, critic_forward, init_critic
from sddpg.lif import LifConfig, init_san, poisson_encode, san_forward
from sddpg.stbp import PseudoGradConfig, action_grad, pseudo_grad, san_backward

from oracles import tape_gradients

PG = PseudoGradConfig(a1=1.0, a2=0.5)


def flat(grads):
    return np.concatenate([g.ravel() for g in grads.arrays()])


def busy_net(sizes, rng, gain=3.0):
    """Random net scaled so that voltages often land inside the window."""
    p = init_san(sizes, rng)
    for w in p.weights:
        w *= gain
    return p


class TestPseudoGrad:
    def test_window_centre(self):
        assert pseudo_grad(0.5, PG, 0.5) == 1.0

    def test_boundary_excluded(self):
        assert pseudo_grad(1.0, PG, 0.5) == 0.0
        assert pseudo_grad(0.0, PG, 0.5) == 0.0

    def test_inside_outside(self):
        np.testing.assert_array_equal(pseudo_grad([0.99, 1.01, 0.01, -0.01], PG, 0.5), [1, 0, 1, 0])

    def test_amplifier(self):
        assert pseudo_grad(0.6, PseudoGradConfig(a1=2.5, a2=0.5), 0.5) == 2.5


class TestActionGrad:
    def test_zero_output_layer(self, rng):
        c = init_critic(4, 2, [8, 8], rng)
        c.weights[-1][:] = 0
        np.testing.assert_array_equal(action_grad(c, rng.random(4), rng.random(2)), [0.0, 0.0])

    def test_linear_critic(self):
        w = np.array([[0.0, 0.0, 1.5, -2.0]])
        c = CriticParams([w], [np.zeros(1)], action_layer=0)
        np.testing.assert_allclose(action_grad(c, np.array([0.3, 0.1]), np.array([0.2, 0.9])), [-1.5, 2.0])

    def test_finite_differences(self, rng):
        c = init_critic(6, 2, [16, 16], rng)
        for w in c.weights:
            w *= 3
        s, a = rng.random(6), rng.random(2)
        g = action_grad(c, s, a)
        h = 1e-6
        for i in range(2):
            e = np.zeros(2)
            e[i] = h
            fd = -(critic_forward(c, s, a + e) - critic_forward(c, s, a - e)) / (2 * h)
            assert abs(g[i] - fd) <= 1e-4 * max(abs(fd), 1e-8)


class TestSanBackward:
    def test_zero_adjoint(self, rng):
        p = busy_net([4, 6, 2], rng)
        cfg = LifConfig(T=5)
        trace, _ = san_forward(p, poisson_encode(rng.random(4), 5, rng), cfg)
        g = san_backward(trace, p, np.zeros(2), cfg, PG)
        assert not flat(g).any()

    @pytest.mark.parametrize("T", [1, 5, 10])
    def test_matches_tape(self, rng, T):
        cfg = LifConfig(T=T)
        for _ in range(5):
            p = busy_net([4, 6, 5, 2], rng)
            train = poisson_encode(rng.random(4), T, rng)
            trace, _ = san_forward(p, train, cfg)
            g_act = rng.normal(size=2)
            got = san_backward(trace, p, g_act, cfg, PG)
            gw, gb = tape_gradients(p.weights, p.biases, train, g_act, 0.5, 0.5, 0.75, 1.0, 0.5)
            for a, b in zip(got.weights + got.biases, gw + gb):
                np.testing.assert_allclose(a, b, rtol=0, atol=1e-10)

    def test_single_step_has_no_temporal_terms(self, rng):
        cfg = LifConfig(T=1)
        p = busy_net([4, 6, 2], rng)
        train = poisson_encode(rng.random(4), 1, rng)
        trace, _ = san_forward(p, train, cfg)
        g_act = rng.normal(size=2)
        got = san_backward(trace, p, g_act, cfg, PG)
        # spatial chain only: dv = z * do, dc = dv, do_below = W^T dc
        x, h = train[0], trace.o[0][0]
        gc2 = pseudo_grad(trace.v[1][0], PG, 0.5) * g_act
        gc1 = pseudo_grad(trace.v[0][0], PG, 0.5) * (p.weights[1].T @ gc2)
        np.testing.assert_allclose(got.weights[1], np.outer(gc2, h))
        np.testing.assert_allclose(got.weights[0], np.outer(gc1, x))
        np.testing.assert_allclose(got.biases[1], gc2)
        # the variant formula coincides when there is no future
        variant = san_backward(trace, p, g_act, cfg, PseudoGradConfig(current_grad_from_next_voltage=True))
        np.testing.assert_array_equal(flat(variant), flat(got))

    def test_linear_in_adjoint(self, rng):
        cfg = LifConfig(T=6)
        p = busy_net([5, 7, 2], rng)
        trace, _ = san_forward(p, poisson_encode(rng.random(5), 6, rng), cfg)
        g = rng.normal(size=2)
        base = flat(san_backward(trace, p, g, cfg, PG))
        for alpha in (-2.0, 0.5, 3.0):
            np.testing.assert_allclose(flat(san_backward(trace, p, alpha * g, cfg, PG)), alpha * base,
                                       rtol=1e-12, atol=1e-14)

    def test_shapes_and_batch_sum(self, rng):
        cfg = LifConfig(T=4)
        p = busy_net([5, 7, 6, 2], rng)
        train = poisson_encode(rng.random((9, 5)), 4, rng)
        g = rng.normal(size=(9, 2))
        trace, _ = san_forward(p, train, cfg)
        batched = san_backward(trace, p, g, cfg, PG)
        for a, b in zip(batched.arrays(), p.arrays()):
            assert a.shape == b.shape
        total = sum(flat(san_backward(san_forward(p, train[:, i], cfg)[0], p, g[i], cfg, PG)) for i in range(9))
        np.testing.assert_allclose(flat(batched), total, atol=1e-12)

    def test_tiny_window_kills_gradients(self, rng):
        cfg = LifConfig(T=5)
        p = busy_net([4, 6, 2], rng)
        trace, _ = san_forward(p, poisson_encode(rng.random(4), 5, rng), cfg)
        g = san_backward(trace, p, rng.normal(size=2), cfg, PseudoGradConfig(a2=1e-12))
        assert not flat(g).any()

    def test_variant_differs_from_graph_gradient(self, rng):
        cfg = LifConfig(T=5)
        p = busy_net([4, 6, 2], rng)
        trace, _ = san_forward(p, poisson_encode(rng.random(4), 5, rng), cfg)
        g = rng.normal(size=2)
        exact = flat(san_backward(trace, p, g, cfg, PG))
        variant = flat(san_backward(trace, p, g, cfg, PseudoGradConfig(current_grad_from_next_voltage=True)))
        assert exact.any() and not np.allclose(exact, variant)

    def test_mismatched_trace(self, rng):
        cfg = LifConfig(T=3)
        p = busy_net([4, 6, 2], rng)
        other = busy_net([4, 5, 2], rng)
        trace, _ = san_forward(p, poisson_encode(rng.random(4), 3, rng), cfg)
        with pytest.raises(ValueError):
            san_backward(trace, other, np.ones(2), cfg, PG)
