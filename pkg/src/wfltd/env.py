"""Environments emitting separate reward and punishment signals."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np


@dataclass(frozen=True)
class EnvStep:
    observation: np.ndarray
    r_plus: float
    r_minus: float
    terminal: bool = False
    truncated: bool = False

    def __post_init__(self):
        if self.r_plus < 0.0 or self.r_minus > 0.0:
            raise ValueError(f"reward signs violated: r_plus={self.r_plus}, r_minus={self.r_minus}")

    @property
    def done(self) -> bool:
        return self.terminal or self.truncated


def split_reward(r: float) -> tuple[float, float]:
    """Split a scalar reward into ``(max(r, 0), min(r, 0))``."""
    return max(r, 0.0), min(r, 0.0)


class Environment(Protocol):
    obs_dim: int
    act_low: np.ndarray
    act_high: np.ndarray

    def reset(self, seed: int | None = None) -> np.ndarray: ...

    def step(self, action) -> EnvStep: ...


def wrap_angle(q: float) -> float:
    """Wrap to ``(-pi, pi]``."""
    w = math.remainder(q, 2.0 * math.pi)
    return math.pi if w == -math.pi else w


class Pendulum:
    """Torque-limited pendulum swing-up with the classic gym constants.

    ``q = 0`` is upright. Rewards are evaluated on the post-step state with the
    executed torque:

        r_plus  = 1 + cos q
        r_minus = -(0.1 |q_dot| + 0.001 |tau|) (1 + cos q)
    """

    max_speed = 8.0
    max_torque = 2.0
    dt = 0.05
    g = 10.0
    m = 1.0
    length = 1.0
    obs_dim = 3

    def __init__(self, max_steps: int = 200, seed: int | None = None):
        self.max_steps = max_steps
        self.act_low = np.array([-self.max_torque])
        self.act_high = np.array([self.max_torque])
        self.rng = np.random.default_rng(seed)
        self.q = 0.0
        self.q_dot = 0.0
        self.t = 0

    def reset(self, seed: int | None = None) -> np.ndarray:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        self.q = float(self.rng.uniform(-math.pi, math.pi))
        self.q_dot = float(self.rng.uniform(-1.0, 1.0))
        self.t = 0
        return self.observation()

    def set_state(self, q: float, q_dot: float) -> None:
        self.q = wrap_angle(q)
        self.q_dot = float(np.clip(q_dot, -self.max_speed, self.max_speed))

    def observation(self) -> np.ndarray:
        return np.array([math.cos(self.q), math.sin(self.q), self.q_dot])

    @staticmethod
    def rewards(q: float, q_dot: float, tau: float) -> tuple[float, float]:
        upright = 1.0 + math.cos(q)
        return upright, -(0.1 * abs(q_dot) + 0.001 * abs(tau)) * upright

    def step(self, action) -> EnvStep:
        tau = float(np.asarray(action, dtype=np.float64).reshape(-1)[0])
        if not math.isfinite(tau):
            raise ValueError("action must be finite")
        tau = min(max(tau, -self.max_torque), self.max_torque)
        acc = 3.0 * self.g / (2.0 * self.length) * math.sin(self.q) + 3.0 / (self.m * self.length ** 2) * tau
        q_dot = min(max(self.q_dot + acc * self.dt, -self.max_speed), self.max_speed)
        self.q = wrap_angle(self.q + q_dot * self.dt)
        self.q_dot = q_dot
        self.t += 1
        r_plus, r_minus = self.rewards(self.q, self.q_dot, tau)
        return EnvStep(self.observation(), r_plus, min(r_minus, 0.0),
                       terminal=False, truncated=self.t >= self.max_steps)
