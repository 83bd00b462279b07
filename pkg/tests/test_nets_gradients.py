"""Finite-difference verification of every hand-written gradient path."""

import numpy as np
import pytest

from irsmec.learn.agent import DeterministicPolicy
from irsmec.learn.diffusion import DiffusionPolicy, build_schedule
from irsmec.learn.nets import Adam, Mlp, soft_update, time_embedding

FD_STEP = 1e-5
REL_TOL = 1e-4


def _central_diff(loss_fn, params):
    grads = []
    for arr in params:
        g = np.zeros_like(arr)
        flat = arr.ravel()
        gflat = g.ravel()
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + FD_STEP
            up = loss_fn()
            flat[idx] = orig - FD_STEP
            down = loss_fn()
            flat[idx] = orig
            gflat[idx] = (up - down) / (2 * FD_STEP)
        grads.append(g)
    return grads


def _assert_close(analytic, numeric):
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-6)
        rel = np.abs(a - n) / denom
        assert np.max(rel) < REL_TOL, f"max rel dev {np.max(rel):.2e}"


def test_mlp_gradients_match_finite_differences():
    rng = np.random.default_rng(0)
    net = Mlp([4, 8, 8, 3], out_activation="linear", rng=rng)
    x = rng.normal(size=(6, 4))
    target = rng.normal(size=(6, 3))

    def loss_fn():
        out = net.forward(x)
        return float(np.mean((out - target) ** 2))

    out, cache = net.forward_cached(x)
    d_out = 2.0 * (out - target) / out.size
    _, analytic = net.backward(cache, d_out)
    numeric = _central_diff(loss_fn, net.params)
    _assert_close(analytic, numeric)


def test_mlp_input_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    net = Mlp([5, 8, 1], out_activation="linear", rng=rng)
    x = rng.normal(size=(3, 5))

    out, cache = net.forward_cached(x)
    d_in, _ = net.backward(cache, np.ones_like(out))
    numeric = np.zeros_like(x)
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            orig = x[i, j]
            x[i, j] = orig + FD_STEP
            up = float(net.forward(x).sum())
            x[i, j] = orig - FD_STEP
            down = float(net.forward(x).sum())
            x[i, j] = orig
            numeric[i, j] = (up - down) / (2 * FD_STEP)
    _assert_close([d_in], [numeric])


def test_tanh_head_gradients():
    rng = np.random.default_rng(2)
    net = Mlp([3, 8, 2], out_activation="tanh", rng=rng)
    x = rng.normal(size=(4, 3))

    def loss_fn():
        return float(np.sum(net.forward(x) ** 2))

    out, cache = net.forward_cached(x)
    _, analytic = net.backward(cache, 2.0 * out)
    numeric = _central_diff(loss_fn, net.params)
    _assert_close(analytic, numeric)


def test_diffusion_chain_gradients_match_finite_differences():
    # loss -mean(Q) with a frozen quadratic critic, through the full chain
    rng = np.random.default_rng(3)
    sched = build_schedule(3, 0.1, 10.0)
    policy = DiffusionPolicy(state_dim=3, action_dim=2, width=8, schedule=sched,
                             time_dim=4, rng=rng)
    states = rng.normal(size=(4, 3))
    # shrink the fixed chain noise so the generated actions stay interior;
    # otherwise the untrained chain amplifies everything onto the clamp
    raw = policy.draw_noise(4, rng)
    from irsmec.learn.diffusion import ChainNoise
    noise = ChainNoise(x_init=0.03 * raw.x_init,
                       step_noise=[0.03 * s for s in raw.step_noise])
    a_star = np.array([0.2, -0.3])

    def loss_fn():
        actions = policy.generate(states, noise=noise)
        return float(-np.mean(-np.sum((actions - a_star) ** 2, axis=1)))

    actions, cache = policy.generate(states, noise=noise, with_cache=True)
    # the check must sit away from the clamp kink and exercise live paths
    assert np.all(np.abs(actions) < 1.0 - 1e-4)
    dq_da = -2.0 * (actions - a_star)
    analytic = policy.backprop(cache, -dq_da / actions.shape[0])
    numeric = _central_diff(loss_fn, policy.net.params)
    _assert_close(analytic, numeric)


def test_diffusion_saturated_output_has_zero_gradient():
    rng = np.random.default_rng(8)
    sched = build_schedule(3, 0.1, 10.0)
    policy = DiffusionPolicy(state_dim=2, action_dim=2, width=8, schedule=sched,
                             time_dim=4, rng=rng)
    # a huge output bias saturates every denoising step's clamp
    policy.net.biases[-1][:] = 1e3
    states = rng.normal(size=(3, 2))
    noise = policy.draw_noise(3, rng)
    actions, cache = policy.generate(states, noise=noise, with_cache=True)
    assert np.all(np.abs(actions) == 1.0)
    grads = policy.backprop(cache, np.ones_like(actions))
    for g in grads:
        assert np.allclose(g, 0.0)


def test_deterministic_policy_gradients_match_finite_differences():
    rng = np.random.default_rng(4)
    policy = DeterministicPolicy(state_dim=3, action_dim=2, width=8, rng=rng)
    states = rng.normal(size=(5, 3))
    a_star = np.array([0.1, 0.4])

    def loss_fn():
        actions = policy.generate(states)
        return float(np.mean(np.sum((actions - a_star) ** 2, axis=1)))

    actions, cache = policy.generate(states, with_cache=True)
    d_actions = 2.0 * (actions - a_star) / actions.shape[0]
    analytic = policy.backprop(cache, d_actions)
    numeric = _central_diff(loss_fn, policy.net.params)
    _assert_close(analytic, numeric)


def test_adam_zero_learning_rate_is_a_no_op():
    rng = np.random.default_rng(5)
    net = Mlp([2, 4, 1], rng=rng)
    before = [p.copy() for p in net.params]
    opt = Adam(net.params, lr=0.0)
    opt.step([np.ones_like(p) for p in net.params])
    for a, b in zip(net.params, before):
        assert np.array_equal(a, b)


def test_adam_descends_a_quadratic():
    params = [np.array([5.0, -3.0])]
    opt = Adam(params, lr=0.05)
    for _ in range(500):
        opt.step([2.0 * params[0]])
    assert np.all(np.abs(params[0]) < 1e-2)


def test_soft_update_extremes_and_blend():
    online = [np.array([1.0, 2.0])]
    target = [np.array([0.0, 0.0])]
    soft_update(online, target, 0.0)
    assert np.allclose(target[0], [0.0, 0.0])
    soft_update(online, target, 0.005)
    assert np.allclose(target[0], [0.005, 0.01])
    soft_update(online, target, 1.0)
    assert np.allclose(target[0], online[0])


def test_soft_update_rejects_mismatched_shapes():
    with pytest.raises(ValueError):
        soft_update([np.zeros(2)], [np.zeros(3)], 0.5)


def test_time_embedding_shape_and_distinctness():
    e1 = time_embedding(1, 8)
    e2 = time_embedding(2, 8)
    assert e1.shape == (8,)
    assert not np.allclose(e1, e2)
    with pytest.raises(ValueError):
        time_embedding(1, 7)


def test_mlp_forward_is_deterministic():
    rng = np.random.default_rng(6)
    net = Mlp([3, 5, 2], rng=rng)
    x = rng.normal(size=(2, 3))
    assert np.array_equal(net.forward(x), net.forward(x))


def test_mlp_copy_is_independent():
    net = Mlp([2, 3, 1], rng=np.random.default_rng(7))
    dup = net.copy()
    net.weights[0][0, 0] += 1.0
    assert dup.weights[0][0, 0] != net.weights[0][0, 0]
