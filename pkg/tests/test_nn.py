import copy
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import fd_gradient, gradient_check_draws, rel_error

from wfltd.core import Diagnostics
from wfltd.nn import (
    STD_FLOOR, Adam, GaussianPolicyHead, Mlp, Sgd, TargetNetwork, ValueHead, load_checkpoint, save_checkpoint,
    sigmoid, softplus,
)


def test_gradient_draws():
    assert gradient_check_draws(100) < 1e-4


def test_mlp_backward_matches_fd_multi_output():
    rng = np.random.default_rng(3)
    net = Mlp((4, 7, 5, 3), rng=rng, zero_last=False)
    x = rng.normal(size=(6, 4))
    c = rng.normal(size=(6, 3))
    _, acts = net.forward(x)
    g = net.backward(acts, c)
    fd = fd_gradient(net.params, lambda: float(np.sum(c * net.forward(x)[0])))
    assert rel_error(fd, g) < 1e-6


def test_views_share_the_flat_vector():
    net = Mlp((2, 3, 1), rng=np.random.default_rng(0))
    net.params[:] = np.arange(net.n_params)
    assert net.weights[0][0, 0] == 0.0
    assert net.biases[-1][0] == net.n_params - 1


def test_deepcopy_rebinds_views():
    net = Mlp((2, 3, 1), rng=np.random.default_rng(0))
    other = copy.deepcopy(net)
    other.params[:] = 1.0
    assert np.all(other.weights[0] == 1.0)
    assert not np.all(net.weights[0] == 1.0)


def test_zero_initialised_output_layer():
    rng = np.random.default_rng(0)
    s = rng.normal(size=(10, 3))
    for sign in (1, -1):
        head = ValueHead(3, (8,), sign, rng)
        assert np.allclose(head.value(s), sign * math.log(2.0))
    pol = GaussianPolicyHead(3, [-2.0], [2.0], (8,), rng)
    d = pol.distribution(s)
    assert np.all(d.mean == 0.0)
    assert np.allclose(d.std, math.log(2.0) + STD_FLOOR)


def test_branch_signs_random_params():
    rng = np.random.default_rng(7)
    plus, minus = ValueHead(3, (16, 16), 1, rng), ValueHead(3, (16, 16), -1, rng)
    for _ in range(1000):
        for head in (plus, minus):
            head.net.params[...] = rng.normal(0.0, 3.0, head.net.n_params)
        s = rng.normal(0.0, 5.0, size=(1, 3))
        assert plus.value(s)[0] >= 0.0
        assert minus.value(s)[0] <= 0.0


def test_log_density_at_mean():
    rng = np.random.default_rng(0)
    pol = GaussianPolicyHead(3, [-2.0], [2.0], (8,), rng)
    s = rng.normal(size=(4, 3))
    d = pol.distribution(s)
    expected = -np.log(d.std[:, 0]) - 0.5 * math.log(2 * math.pi)
    assert np.allclose(pol.log_prob(s, d.mean), expected, atol=1e-14)


def test_policy_clips_actions_and_counts():
    pol = GaussianPolicyHead(3, [-2.0], [2.0], (8,), np.random.default_rng(0))
    diag = Diagnostics()
    s = np.zeros((2, 3))
    lp = pol.log_prob(s, np.array([[5.0], [-2.0]]), diag)
    assert diag.clipped_actions == 1
    assert lp[0] == pytest.approx(pol.log_prob(s[:1], np.array([[2.0]]))[0])


def test_policy_callable_upstream():
    rng = np.random.default_rng(1)
    pol = GaussianPolicyHead(3, [-2.0], [2.0], (8,), rng)
    pol.net.params[...] = rng.normal(0.0, 0.3, pol.net.n_params)
    s, a = rng.normal(size=(4, 3)), rng.uniform(-1, 1, (4, 1))
    logp, g1 = pol.log_prob_and_grad(s, a, lambda lp: 2.0 * lp)
    _, g2 = pol.log_prob_and_grad(s, a, 2.0 * logp)
    assert np.array_equal(g1, g2)


def test_transforms_stable():
    x = np.array([-800.0, 0.0, 800.0])
    assert np.all(np.isfinite(softplus(x)))
    assert softplus(800.0) == 800.0
    assert np.allclose(sigmoid(x), [0.0, 0.5, 1.0])


def test_adam_zero_gradient_leaves_params():
    opt = Adam(3)
    p = np.array([1.0, -2.0, 3.0])
    before = p.copy()
    for _ in range(10):
        opt.step(p, np.zeros(3))
    assert np.array_equal(p, before)


def test_adam_constant_gradient_step_is_lr():
    opt = Adam(1, lr=1e-3)
    p = np.zeros(1)
    prev = 0.0
    for _ in range(5000):
        opt.step(p, np.array([0.3]))
        step, prev = prev - p[0], p[0]
    assert step == pytest.approx(1e-3, rel=1e-6)


def test_adam_matches_textbook_update():
    rng = np.random.default_rng(0)
    opt = Adam(4, lr=0.01)
    p = rng.normal(size=4)
    ref = p.copy()
    m, v = np.zeros(4), np.zeros(4)
    for t in range(1, 50):
        g = rng.normal(size=4)
        opt.step(p, g)
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        ref -= 0.01 * (m / (1 - 0.9 ** t)) / (np.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
    assert np.allclose(p, ref, rtol=1e-12, atol=1e-14)


def test_adam_quadratic_bowl():
    opt = Adam(1, lr=1e-3)
    x = np.array([1.0])
    for k in range(10_000):
        opt.step(x, 2.0 * x)
        if abs(x[0]) < 1e-6:
            break
    assert abs(x[0]) < 1e-6


@pytest.mark.parametrize("opt_cls", [Adam, Sgd])
def test_nonfinite_gradient_skips_step(opt_cls):
    opt = opt_cls(2)
    p = np.ones(2)
    diag = Diagnostics()
    opt.step(p, np.array([np.nan, 1.0]), diag)
    assert np.array_equal(p, np.ones(2))
    assert diag.nonfinite_grads == 1
    with pytest.raises(ValueError):
        opt.step(p, np.ones(3))


def test_sgd_step():
    p = np.array([1.0, 2.0])
    Sgd(2, lr=0.5).step(p, np.array([2.0, -2.0]))
    assert np.array_equal(p, [0.0, 3.0])


@settings(max_examples=30, deadline=None)
@given(tau=st.floats(0.01, 1.0), n=st.integers(1, 200))
def test_target_converges_geometrically(tau, n):
    rng = np.random.default_rng(0)
    online, start = rng.normal(size=5), rng.normal(size=5)
    target = TargetNetwork(start, tau)
    gap0 = np.linalg.norm(start - online)
    for _ in range(n):
        target.update(online)
    assert np.linalg.norm(target.params - online) == pytest.approx(gap0 * (1 - tau) ** n, rel=1e-9, abs=1e-12)


def test_target_writes_into_caller_buffer():
    buf = np.zeros(3)
    t = TargetNetwork(np.ones(3), 0.5, out=buf)
    t.update(np.full(3, 3.0))
    assert np.array_equal(buf, [2.0, 2.0, 2.0])


def test_initialisation_deterministic():
    a = Mlp((3, 10, 2), rng=np.random.default_rng(5), zero_last=False)
    b = Mlp((3, 10, 2), rng=np.random.default_rng(5), zero_last=False)
    assert np.array_equal(a.params, b.params)


def test_checkpoint_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    blocks = {"a": rng.normal(size=7), "b": rng.normal(size=3)}
    save_checkpoint(tmp_path / "ck.bin", blocks, {"shapes": {"a": [[7]]}, "note": "x"})
    assert (tmp_path / "ck.bin").stat().st_size == 10 * 8
    loaded, side = load_checkpoint(tmp_path / "ck.bin")
    assert side["note"] == "x" and side["blocks"]["a"]["layers"] == [[7]]
    for k in blocks:
        assert np.array_equal(loaded[k], blocks[k])
