import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wfltd.env import EnvStep, Pendulum, split_reward, wrap_angle


def energy(env):
    # uniform rod, m = l = 1, q = 0 upright: I = 1/3, centre of mass at l/2
    return env.q_dot ** 2 / 6.0 + 5.0 * math.cos(env.q)


@pytest.mark.parametrize("q, q_dot, tau, rp, rm", [
    (0.0, 0.0, 0.0, 2.0, 0.0),
    (math.pi, 5.0, 2.0, 0.0, 0.0),
    (0.0, 1.0, 0.0, 2.0, -0.2),
    (0.0, -1.0, -2.0, 2.0, -0.204),
])
def test_reward_examples(q, q_dot, tau, rp, rm):
    r_plus, r_minus = Pendulum.rewards(q, q_dot, tau)
    assert r_plus == pytest.approx(rp, abs=1e-15)
    assert r_minus == pytest.approx(rm, abs=1e-15)


def test_rewards_use_post_step_state_and_clipped_torque():
    env = Pendulum()
    env.reset(0)
    env.set_state(0.3, 0.5)
    step = env.step([10.0])
    expected = Pendulum.rewards(env.q, env.q_dot, 2.0)
    assert (step.r_plus, step.r_minus) == expected


def test_reset_observation():
    env = Pendulum()
    obs = env.reset(3)
    assert obs.shape == (3,)
    assert obs[0] ** 2 + obs[1] ** 2 == pytest.approx(1.0, abs=1e-15)
    assert -1.0 <= obs[2] <= 1.0


def test_reset_deterministic():
    assert np.array_equal(Pendulum().reset(11), Pendulum().reset(11))
    assert not np.array_equal(Pendulum().reset(11), Pendulum().reset(12))


def test_episode_truncates_without_terminal():
    env = Pendulum(max_steps=5)
    env.reset(0)
    steps = [env.step([0.0]) for _ in range(5)]
    assert [s.truncated for s in steps] == [False] * 4 + [True]
    assert not any(s.terminal for s in steps)
    assert steps[-1].done


def test_nonfinite_action_rejected():
    env = Pendulum()
    env.reset(0)
    with pytest.raises(ValueError):
        env.step([math.nan])


def test_envstep_sign_check():
    with pytest.raises(ValueError):
        EnvStep(np.zeros(3), -0.1, 0.0)
    with pytest.raises(ValueError):
        EnvStep(np.zeros(3), 0.0, 0.1)


def test_split_reward():
    assert split_reward(1.5) == (1.5, 0.0)
    assert split_reward(-0.5) == (0.0, -0.5)


@settings(max_examples=200, deadline=None)
@given(q=st.floats(-20, 20), q_dot=st.floats(-8, 8), actions=st.lists(st.floats(-5, 5), min_size=1, max_size=30))
def test_reward_bounds(q, q_dot, actions):
    env = Pendulum()
    env.reset(0)
    env.set_state(q, q_dot)
    for a in actions:
        s = env.step([a])
        assert 0.0 <= s.r_plus <= 2.0
        assert -2.0 * (0.1 * 8 + 0.001 * 2) <= s.r_minus <= 0.0
        assert -math.pi < env.q <= math.pi
        assert abs(env.q_dot) <= 8.0


@settings(max_examples=100, deadline=None)
@given(q=st.floats(-1e3, 1e3))
def test_wrap_angle(q):
    w = wrap_angle(q)
    assert -math.pi < w <= math.pi
    assert math.cos(w) == pytest.approx(math.cos(q), abs=1e-9)


@pytest.mark.parametrize("amplitude", [0.1, 0.5, 1.5, 2.8])
def test_energy_has_no_secular_drift(amplitude):
    env = Pendulum(max_steps=10 ** 6)
    env.reset(0)
    env.set_state(math.pi - amplitude, 0.0)
    e = np.empty(20_000)
    for t in range(e.size):
        env.step([0.0])
        e[t] = energy(env)
    slope = np.polyfit(np.arange(e.size), e, 1)[0]
    assert abs(slope) < 1e-2
    assert abs(slope) < 1e-6
    # the oscillating error band of the symplectic integrator does not widen
    assert np.ptp(e[-2000:]) <= np.ptp(e[:2000]) * (1 + 1e-3)


def test_small_swing_energy_error_per_step():
    env = Pendulum(max_steps=10 ** 6)
    env.reset(0)
    env.set_state(math.pi - 0.1, 0.0)
    prev = energy(env)
    for _ in range(1000):
        env.step([0.0])
        cur = energy(env)
        assert abs(cur - prev) < 1e-2
        prev = cur


def test_trajectory_deterministic():
    rng = np.random.default_rng(0)
    actions = rng.uniform(-3, 3, 200)

    def rollout():
        env = Pendulum()
        out = [env.reset(42)]
        out += [env.step([a]).observation for a in actions]
        return np.array(out)

    assert np.array_equal(rollout(), rollout())
