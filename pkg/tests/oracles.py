"""Independent reference implementations used by several test modules."""
import math

import numpy as np

from wfltd.nn import GaussianPolicyHead, ValueHead


def fd_gradient(params, f, h=1e-5):
    """Central differences of the scalar ``f()`` w.r.t. ``params`` (perturbed in place)."""
    fd = np.empty_like(params)
    for i in range(params.size):
        old = params[i]
        params[i] = old + h
        up = f()
        params[i] = old - h
        dn = f()
        params[i] = old
        fd[i] = (up - dn) / (2 * h)
    return fd


def rel_error(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), 1e-12))


def min_preactivation(net, x):
    """Smallest hidden pre-activation magnitude, i.e. the distance to the nearest ReLU kink."""
    h, smallest = x, math.inf
    for W, b in zip(net.weights[:-1], net.biases[:-1]):
        z = h @ W + b
        smallest = min(smallest, float(np.min(np.abs(z))))
        h = np.maximum(z, 0.0)
    return smallest


def _kink_free_inputs(rng, net, margin=1e-3):
    # central differences straddling a ReLU kink measure nothing useful; redraw
    while True:
        s = rng.normal(size=(5, 3))
        if min_preactivation(net, s) > margin:
            return s


def gradient_check_draws(n_draws=100, seed=0):
    """Worst relative gradient error over ``n_draws`` random heads, inputs and upstream weights."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for draw in range(n_draws):
        c = rng.normal(size=5)
        if draw % 2 == 0:
            head = ValueHead(3, (12, 12), sign=1 if draw % 4 == 0 else -1, rng=rng)
            head.net.params[...] = rng.normal(0.0, 0.5, head.net.n_params)
            s = _kink_free_inputs(rng, head.net)
            _, g = head.value_and_grad(s, c)
            fd = fd_gradient(head.net.params, lambda: float(c @ head.value(s)))
        else:
            head = GaussianPolicyHead(3, [-2.0], [2.0], (12, 12), rng=rng)
            head.net.params[...] = rng.normal(0.0, 0.5, head.net.n_params)
            s = _kink_free_inputs(rng, head.net)
            a = rng.uniform(-2.0, 2.0, size=(5, 1))
            _, g = head.log_prob_and_grad(s, a, c)
            fd = fd_gradient(head.net.params, lambda: float(c @ head.log_prob(s, a)))
        worst = max(worst, rel_error(fd, g))
    return worst


def td0_chain_oracle(theta, bias, phi, r, nxt, terminal, gamma, lr, sign=1.0):
    """One hand-rolled semi-gradient TD(0) step for ``V = sign * softplus(theta . phi + bias)``.

    The target uses the pre-update parameters, which is what a target copy
    refreshed with rate 1 after every step provides.
    """
    def value(x):
        return sign * math.log1p(math.exp(float(theta @ x + bias)))

    v = value(phi)
    v_next = 0.0 if terminal else value(nxt)
    q = (1 - gamma) * r + gamma * v_next
    out = float(theta @ phi + bias)
    dv = sign / (1.0 + math.exp(-out))
    delta = q - v
    return theta + lr * delta * dv * phi, bias + lr * delta * dv, delta


def td0_chain_max_error(n_sweeps=30, gamma=0.9, lr=0.1, seed=1):
    """Largest parameter gap between the agent's reward critic and :func:`td0_chain_oracle`.

    Three-state chain 0 -> 1 -> 2 -> end with one-hot features, conventional
    TD on both branches, no punishment, one transition per update.
    """
    from wfltd.agent import RewardPunishmentAgent

    agent = RewardPunishmentAgent(hidden=(), optimizer="sgd", lr=lr, tau=1.0, gamma=gamma,
                                  random_state=0).initialize(3, [-1.0], [1.0])
    head = agent.values_["plus"]
    head.params[...] = np.random.default_rng(seed).normal(0.0, 0.5, head.params.size)
    agent.targets_["plus"].params[...] = head.params
    theta, bias = head.params[:3].copy(), float(head.params[3])
    eye = np.eye(3)
    rewards = (0.5, 1.0, 2.0)
    worst = 0.0
    for _ in range(n_sweeps):
        for k in range(3):
            terminal = k == 2
            nxt = np.zeros(3) if terminal else eye[k + 1]
            theta, bias, _ = td0_chain_oracle(theta, bias, eye[k], rewards[k], nxt, terminal, gamma, lr)
            agent.update_batch({
                "s": eye[k][None], "a": np.zeros((1, 1)), "r_plus": np.array([rewards[k]]),
                "r_minus": np.zeros(1), "s_next": nxt[None], "terminal": np.array([float(terminal)]),
                "log_b": np.zeros(1),
            })
            worst = max(worst, float(np.max(np.abs(head.params - np.append(theta, bias)))))
    return worst
