"""Reward-punishment actor-critic with Weber-Fechner weighted updates.

Two value heads and two policy heads are trained side by side: the reward
branch (``r_plus >= 0``, values bounded below by 0) and the punishment branch
(``r_minus <= 0``, values bounded above by 0). Actions come from a
value-weighted mixture of the two policies.
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import scale as scale_mod
from ._validation import check_observations, check_positive, check_unit_interval
from .core import Diagnostics, LowerBound, UpperBound, WflParams, update_weight
from .nn import OPTIMIZERS, GaussianPolicyHead, TargetNetwork, ValueHead, load_checkpoint, save_checkpoint

BRANCHES = ("plus", "minus")
BOUNDS = {"plus": LowerBound(0.0), "minus": UpperBound(0.0)}
MIN_BEHAVIOR_DENSITY = 1e-30


@dataclass(frozen=True)
class Transition:
    s: np.ndarray
    a: np.ndarray
    r_plus: float
    r_minus: float
    s_next: np.ndarray
    terminal: bool
    log_b: float = 0.0

    def __post_init__(self):
        if self.r_plus < 0.0 or self.r_minus > 0.0:
            raise ValueError(f"reward signs violated: r_plus={self.r_plus}, r_minus={self.r_minus}")


class ReplayBuffer:
    """Fixed-capacity FIFO ring of transitions stored column-wise."""

    def __init__(self, obs_dim: int, act_dim: int, capacity: int = 10_000):
        self.capacity = int(capacity)
        self.s = np.zeros((self.capacity, obs_dim))
        self.a = np.zeros((self.capacity, act_dim))
        self.r_plus = np.zeros(self.capacity)
        self.r_minus = np.zeros(self.capacity)
        self.s_next = np.zeros((self.capacity, obs_dim))
        self.terminal = np.zeros(self.capacity)
        self.log_b = np.zeros(self.capacity)
        self.ptr = 0
        self.size = 0

    def __len__(self):
        return self.size

    def add(self, t: Transition) -> None:
        i = self.ptr
        self.s[i] = t.s
        self.a[i] = t.a
        self.r_plus[i] = t.r_plus
        self.r_minus[i] = t.r_minus
        self.s_next[i] = t.s_next
        self.terminal[i] = float(t.terminal)
        self.log_b[i] = t.log_b
        self.ptr = (self.ptr + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def batch(self, idx) -> dict:
        return {
            "s": self.s[idx], "a": self.a[idx],
            "r_plus": self.r_plus[idx], "r_minus": self.r_minus[idx],
            "s_next": self.s_next[idx], "terminal": self.terminal[idx], "log_b": self.log_b[idx],
        }

    def replay_batches(self, rng: np.random.Generator, fraction: float = 0.5, batch_size: int = 32):
        """Index batches covering ``ceil(fraction * size)`` distinct stored transitions."""
        n = math.ceil(fraction * self.size)
        order = rng.permutation(self.size)[:n]
        return [order[i:i + batch_size] for i in range(0, n, batch_size)]


def mixture_log_weight(v_plus, v_minus, beta_w: float):
    """``(log w, log(1 - w))`` for ``w = e^{bw V+} / (e^{bw V+} + e^{-bw V-})``."""
    a = beta_w * np.asarray(v_plus, dtype=np.float64)
    b = -beta_w * np.asarray(v_minus, dtype=np.float64)
    norm = np.logaddexp(a, b)
    return a - norm, b - norm


def mixture_weight(v_plus, v_minus, beta_w: float):
    return np.exp(mixture_log_weight(v_plus, v_minus, beta_w)[0])


def td_target(r, v_next, terminal, gamma: float):
    """Normalised one-step target ``(1 - gamma) r + gamma V(s') (1 - terminal)``."""
    return (1.0 - gamma) * np.asarray(r, dtype=np.float64) + gamma * np.asarray(v_next) * (
        1.0 - np.asarray(terminal, dtype=np.float64))


def replay_plan(buffer_size: int, fraction: float = 0.5, batch_size: int = 32) -> tuple[int, int]:
    """``(transitions, batches)`` replayed at the end of an episode."""
    n = math.ceil(fraction * buffer_size)
    return n, math.ceil(n / batch_size)


class RewardPunishmentAgent(BaseEstimator):
    """Actor-critic over separate reward and punishment signals.

    Parameters
    ----------
    beta0_plus, beta0_minus : float
        Baseline inverse temperatures per branch. ``math.inf`` gives
        conventional TD learning on that branch.
    gamma : float
        Discount factor.
    zeta : float
        Smoothing of the reward-scale estimate.
    lr : float
        Adam learning rate for all four networks.
    beta_w : float
        Sharpness of the value-based mixture weight.
    tau : float
        Soft target-update rate, applied once per minibatch.
    kappa : float
        Weight of the quadratic penalty pulling each policy toward the
        behaviour mixture.
    ratio_clip : tuple of float
        Bounds on the importance ratio ``pi / b``.
    batch_size, buffer_size, replay_fraction : int, int, float
        Replay settings; ``replay_fraction`` of the buffer is replayed after
        every episode.
    hidden : tuple of int
        Hidden layer widths shared by all networks.
    optimizer : {"adam", "sgd"}
        Update rule for all networks. Plain SGD exists for exact checks.
    random_state : int or None
        Seed for initialisation, exploration and replay sampling.
    """

    def __init__(self, beta0_plus=math.inf, beta0_minus=math.inf, gamma=0.99, zeta=0.999, lr=1e-3,
                 beta_w=10.0, tau=0.01, kappa=0.01, ratio_clip=(0.1, 10.0), batch_size=32,
                 buffer_size=10_000, replay_fraction=0.5, hidden=(100, 100), optimizer="adam",
                 random_state=None):
        self.beta0_plus = beta0_plus
        self.beta0_minus = beta0_minus
        self.gamma = gamma
        self.zeta = zeta
        self.lr = lr
        self.beta_w = beta_w
        self.tau = tau
        self.kappa = kappa
        self.ratio_clip = ratio_clip
        self.batch_size = batch_size
        self.buffer_size = buffer_size
        self.replay_fraction = replay_fraction
        self.hidden = hidden
        self.optimizer = optimizer
        self.random_state = random_state

    # -- setup -------------------------------------------------------------

    def _validate_params(self):
        check_positive(self.beta0_plus, "beta0_plus")
        check_positive(self.beta0_minus, "beta0_minus")
        check_positive(self.lr, "lr")
        check_positive(self.beta_w, "beta_w")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}")
        check_unit_interval(self.zeta, "zeta")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError(f"tau must be in (0, 1], got {self.tau}")
        lo, hi = self.ratio_clip
        if not 0.0 < lo <= 1.0 <= hi:
            raise ValueError(f"ratio_clip must bracket 1, got {self.ratio_clip}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}; choose from {sorted(OPTIMIZERS)}")

    def initialize(self, obs_dim: int, act_low, act_high) -> "RewardPunishmentAgent":
        """Build networks, optimizers and replay storage for the given spaces."""
        self._validate_params()
        seq = np.random.SeedSequence(self.random_state)
        init_seed, self._act_seed = seq.spawn(2)
        rng = np.random.default_rng(init_seed)
        self.obs_dim_ = int(obs_dim)
        self.act_low_ = np.atleast_1d(np.asarray(act_low, dtype=np.float64))
        self.act_high_ = np.atleast_1d(np.asarray(act_high, dtype=np.float64))
        hidden = tuple(self.hidden)
        self.values_ = {
            "plus": ValueHead(obs_dim, hidden, sign=1, rng=rng),
            "minus": ValueHead(obs_dim, hidden, sign=-1, rng=rng),
        }
        self.policies_ = {
            k: GaussianPolicyHead(obs_dim, self.act_low_, self.act_high_, hidden, rng=rng) for k in BRANCHES
        }
        self.target_values_ = {k: copy.deepcopy(v) for k, v in self.values_.items()}
        self.targets_ = {
            k: TargetNetwork(self.values_[k].params, self.tau, out=self.target_values_[k].net.params)
            for k in BRANCHES
        }
        opt = OPTIMIZERS[self.optimizer]
        self.value_opts_ = {k: opt(self.values_[k].params.size, self.lr) for k in BRANCHES}
        self.policy_opts_ = {k: opt(self.policies_[k].params.size, self.lr) for k in BRANCHES}
        self.scales_ = {
            "plus": scale_mod.ScaleState(zeta=self.zeta, beta0=float(self.beta0_plus)),
            "minus": scale_mod.ScaleState(zeta=self.zeta, beta0=float(self.beta0_minus)),
        }
        self.buffer_ = ReplayBuffer(obs_dim, self.act_low_.size, self.buffer_size)
        self.rng_ = np.random.default_rng(self._act_seed)
        self.diagnostics_ = Diagnostics()
        self.learning_curve_ = []
        self.n_updates_ = 0
        return self

    # -- acting ------------------------------------------------------------

    def mixture(self, s):
        """Mixture weight ``w`` of the reward policy for each state."""
        check_is_fitted(self, "values_")
        s = check_observations(s, self.obs_dim_)
        return mixture_weight(self.values_["plus"].value(s), self.values_["minus"].value(s), self.beta_w)

    def behavior_log_density(self, s, a):
        """``log b(a|s)`` of the value-weighted policy mixture."""
        s = check_observations(s, self.obs_dim_)
        log_w, log_1mw = mixture_log_weight(self.values_["plus"].value(s), self.values_["minus"].value(s),
                                            self.beta_w)
        lp = self.policies_["plus"].log_prob(s, a, self.diagnostics_)
        lm = self.policies_["minus"].log_prob(s, a, self.diagnostics_)
        return np.logaddexp(log_w + lp, log_1mw + lm)

    def act(self, s):
        """Sample an action from the behaviour mixture.

        Returns the clipped action and its mixture density ``b(a|s)``.
        """
        check_is_fitted(self, "values_")
        s = np.asarray(s, dtype=np.float64).reshape(1, -1)
        if s.shape[1] != self.obs_dim_ or not np.all(np.isfinite(s)):
            raise ValueError(f"expected one finite state of dimension {self.obs_dim_}")
        log_w, log_1mw = mixture_log_weight(self.values_["plus"].value(s), self.values_["minus"].value(s),
                                            self.beta_w)
        dists = {k: self.policies_[k].distribution(s) for k in BRANCHES}
        branch = "plus" if self.rng_.random() < math.exp(log_w[0]) else "minus"
        d = dists[branch]
        a = d.mean[0] + d.std[0] * self.rng_.standard_normal(d.mean.shape[1])
        a = np.clip(a, self.act_low_, self.act_high_)
        lp = GaussianPolicyHead.log_density(dists["plus"], a)
        lm = GaussianPolicyHead.log_density(dists["minus"], a)
        log_b = float(np.logaddexp(log_w + lp, log_1mw + lm)[0])
        return a, math.exp(log_b)

    def predict(self, X):
        """Deterministic actions: the mean of whichever policy has the larger mixture weight."""
        check_is_fitted(self, "values_")
        X = check_observations(X, self.obs_dim_)
        w = self.mixture(X)
        mp = self.policies_["plus"].distribution(X).mean
        mm = self.policies_["minus"].distribution(X).mean
        return np.where((w >= 0.5)[:, None], mp, mm)

    # -- learning ----------------------------------------------------------

    def current_params(self, branch: str) -> WflParams:
        return WflParams(scale_mod.current_beta(self.scales_[branch]))

    def critic_update_weight(self, branch: str, v, q, params: WflParams | None = None):
        """Per-sample update weight for ``branch`` at the current inverse temperature."""
        params = self.current_params(branch) if params is None else params
        return update_weight(v, q, params, BOUNDS[branch], self.diagnostics_)

    def observe_reward(self, r_plus: float, r_minus: float) -> None:
        self.scales_["plus"] = scale_mod.observe(self.scales_["plus"], r_plus)
        self.scales_["minus"] = scale_mod.observe(self.scales_["minus"], r_minus)

    def store(self, t: Transition) -> None:
        self.observe_reward(t.r_plus, t.r_minus)
        self.buffer_.add(t)

    def td_targets(self, branch: str, batch: dict) -> np.ndarray:
        v_next = self.target_values_[branch].value(batch["s_next"])
        return td_target(batch["r_" + branch], v_next, batch["terminal"], self.gamma)

    def critic_step(self, branch: str, batch: dict, params: WflParams, mask) -> np.ndarray:
        """Ascend ``mean(weight * V(s))`` for one branch; returns the per-sample weights."""
        head = self.values_[branch]
        q = self.td_targets(branch, batch)
        v, cache = head.forward(batch["s"])
        weight = np.asarray(self.critic_update_weight(branch, v, q, params)) * mask
        grad = head.backward(cache, -weight / len(v))
        self.value_opts_[branch].step(head.params, grad, self.diagnostics_)
        return weight

    def actor_step(self, branch: str, batch: dict, weight, mask) -> None:
        """Importance-weighted policy gradient with the critic's weights."""
        lo, hi = self.ratio_clip
        log_b = batch["log_b"]
        n = len(log_b)

        def coef(logp):
            ratio = np.clip(np.exp(np.minimum(logp - log_b, 50.0)), lo, hi)
            return (-ratio * weight + 2.0 * self.kappa * (logp - log_b)) * mask / n

        policy = self.policies_[branch]
        _, grad = policy.log_prob_and_grad(batch["s"], batch["a"], coef, self.diagnostics_)
        self.policy_opts_[branch].step(policy.params, grad, self.diagnostics_)

    def update_batch(self, batch: dict) -> dict:
        """Critic and actor steps on both branches, then the target update.

        The inverse temperature of each branch is read once per batch.
        Returns the mean absolute update weight per branch.
        """
        n = batch["s"].shape[0]
        mask = (batch["log_b"] > math.log(MIN_BEHAVIOR_DENSITY)).astype(np.float64)
        self.diagnostics_.skipped_samples += int(n - np.count_nonzero(mask))
        stats = {}
        for k in BRANCHES:
            weight = self.critic_step(k, batch, self.current_params(k), mask)
            self.actor_step(k, batch, weight, mask)
            stats[k] = float(np.mean(np.abs(weight)))
        for k in BRANCHES:
            self.targets_[k].update(self.values_[k].params)
        self.n_updates_ += 1
        return stats

    def end_of_episode_replay(self) -> int:
        """Replay part of the buffer in minibatches; returns the number of batches."""
        if len(self.buffer_) == 0:
            return 0
        batches = self.buffer_.replay_batches(self.rng_, self.replay_fraction, self.batch_size)
        for idx in batches:
            self.update_batch(self.buffer_.batch(idx))
        return len(batches)

    def run_episode(self, env, seed=None, learn: bool = True) -> dict:
        s = env.reset(seed)
        rp, rm = [], []
        while True:
            a, b = self.act(s)
            step = env.step(a)
            if learn:
                self.store(Transition(s, a, step.r_plus, step.r_minus, step.observation, step.terminal,
                                      math.log(max(b, 1e-300))))
            rp.append(step.r_plus)
            rm.append(step.r_minus)
            s = step.observation
            if step.done:
                break
        if learn:
            self.end_of_episode_replay()
        return {
            "r_plus_mean": float(np.mean(rp)), "r_plus_sum": float(np.sum(rp)),
            "r_minus_mean": float(np.mean(rm)), "r_minus_sum": float(np.sum(rm)),
        }

    def partial_fit(self, env, seed=None):
        """Run and learn from a single episode."""
        if not hasattr(self, "values_"):
            self.initialize(env.obs_dim, env.act_low, env.act_high)
        record = self.run_episode(env, seed)
        record["episode"] = len(self.learning_curve_)
        self.learning_curve_.append(record)
        return self

    def fit(self, env, n_episodes: int = 300, seed=None, callback=None):
        """Train from scratch for ``n_episodes`` episodes.

        ``seed`` seeds the environment on the first reset only; later resets
        continue the environment's own random stream.
        """
        self.initialize(env.obs_dim, env.act_low, env.act_high)
        for ep in range(n_episodes):
            self.partial_fit(env, seed if ep == 0 else None)
            if callback is not None:
                callback(self, self.learning_curve_[-1])
        return self

    # -- persistence ---------------------------------------------------------

    def save(self, path) -> None:
        check_is_fitted(self, "values_")
        blocks, shapes = {}, {}
        for k in BRANCHES:
            blocks[f"value_{k}"] = self.values_[k].params
            blocks[f"policy_{k}"] = self.policies_[k].params
            blocks[f"target_value_{k}"] = self.targets_[k].params
            shapes[f"value_{k}"] = self.values_[k].net.spec()["shapes"]
            shapes[f"policy_{k}"] = self.policies_[k].net.spec()["shapes"]
            shapes[f"target_value_{k}"] = shapes[f"value_{k}"]
            for name, opt in (("value", self.value_opts_[k]), ("policy", self.policy_opts_[k])):
                blocks[f"adam_{name}_{k}_m"] = opt.m
                blocks[f"adam_{name}_{k}_v"] = opt.v
        meta = {
            "shapes": shapes,
            "scales": {k: self.scales_[k].to_dict() for k in BRANCHES},
            "adam_steps": {f"{n}_{k}": o.t for k in BRANCHES
                           for n, o in (("value", self.value_opts_[k]), ("policy", self.policy_opts_[k]))},
            "obs_dim": self.obs_dim_,
            "act_low": self.act_low_.tolist(),
            "act_high": self.act_high_.tolist(),
            "params": {k: (repr(v) if isinstance(v, float) and math.isinf(v) else v)
                       for k, v in self.get_params().items()},
        }
        save_checkpoint(path, blocks, meta)

    def load(self, path) -> "RewardPunishmentAgent":
        blocks, meta = load_checkpoint(path)
        self.initialize(meta["obs_dim"], meta["act_low"], meta["act_high"])
        for k in BRANCHES:
            self.values_[k].net.set_params(blocks[f"value_{k}"])
            self.policies_[k].net.set_params(blocks[f"policy_{k}"])
            self.targets_[k].params[...] = blocks[f"target_value_{k}"]
            for name, opt in (("value", self.value_opts_[k]), ("policy", self.policy_opts_[k])):
                opt.m[...] = blocks[f"adam_{name}_{k}_m"]
                opt.v[...] = blocks[f"adam_{name}_{k}_v"]
                opt.t = meta["adam_steps"][f"{name}_{k}"]
            self.scales_[k] = scale_mod.ScaleState(**meta["scales"][k])
        return self
