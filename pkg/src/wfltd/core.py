"""Optimality probabilities and the Weber-Fechner update weight.

Everything here is a pure function of its arguments. Functions accept
scalars or numpy arrays; scalar inputs give Python floats back.

Two bound conventions are supported:

* ``UpperBound(r)`` -- ``p = exp(beta * (value - r))``, used for punishments
  (values are non-positive, the bound is 0).
* ``LowerBound(r)`` -- ``p = exp(-beta * (value - r))``, used for rewards
  (values are non-negative, the bound is 0).

In both cases the combined update weight is ``(1 - lam) * delta + lam * delta_ln``
where ``delta_ln`` carries the bound-specific sign, so the weight is positive
exactly when ``q > v``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

EPS = 1e-12

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class UpperBound:
    value: float = 0.0

    @property
    def sign(self) -> int:
        return 1


@dataclass(frozen=True)
class LowerBound:
    value: float = 0.0

    @property
    def sign(self) -> int:
        return -1


BoundConvention = Union[UpperBound, LowerBound]


def lambda_from_beta(beta: float) -> float:
    """Mixing coefficient ``1 / (1 + beta)``.

    ``beta = inf`` is the conventional-TD sentinel and maps to exactly 0.
    """
    beta = float(beta)
    if math.isnan(beta) or beta <= 0.0:
        raise ValueError(f"beta must be positive, got {beta}")
    if math.isinf(beta):
        return 0.0
    return 1.0 / (1.0 + beta)


@dataclass(frozen=True)
class WflParams:
    """Inverse temperature and its derived mixing coefficient.

    ``beta=math.inf`` selects conventional TD learning (``lambda_beta == 0``);
    no probability is ever evaluated in that case.
    """

    beta: float
    lambda_beta: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "lambda_beta", lambda_from_beta(self.beta))

    @property
    def conventional(self) -> bool:
        return self.lambda_beta == 0.0


@dataclass
class Diagnostics:
    """Counters for inputs that had to be clamped. Not thread-safe; use one per worker."""

    clamped_values: int = 0
    saturated_fisher: int = 0
    nonfinite_grads: int = 0
    skipped_samples: int = 0
    clipped_actions: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _out(x: np.ndarray, scalar: bool) -> ArrayLike:
    return float(x) if scalar else x


def _check_finite(x: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} must be finite")


def _signed_gap(value: np.ndarray, bound: BoundConvention) -> np.ndarray:
    # exponent / beta; non-positive for admissible values under either convention
    return bound.sign * (value - bound.value)


def optimality_prob(value: ArrayLike, params: WflParams, bound: BoundConvention) -> ArrayLike:
    """Probability of optimality for a value under ``bound``, capped at ``1 - EPS``.

    Only the side near the bound is clamped; small probabilities stay exact so
    that quantities far from the bound keep their relative precision.
    """
    scalar = np.ndim(value) == 0
    v = np.asarray(value, dtype=np.float64)
    _check_finite(v, "value")
    if params.conventional:
        raise ValueError("optimality probability is undefined for the conventional (beta=inf) setting")
    p = np.exp(params.beta * _signed_gap(v, bound))
    return _out(np.minimum(p, 1.0 - EPS), scalar)


def _log1mexp(x: np.ndarray) -> np.ndarray:
    """``log(1 - exp(x))`` for ``x < 0``, accurate near 0 and for large ``-x``."""
    x = np.minimum(x, -EPS)
    near = x > -math.log(2.0)
    return np.where(near, np.log(-np.expm1(np.where(near, x, -1.0))), np.log1p(-np.exp(np.where(near, -1.0, x))))


def _log_one_minus_p(value: np.ndarray, params: WflParams, bound: BoundConvention) -> np.ndarray:
    return _log1mexp(params.beta * _signed_gap(value, bound))


def delta_ln_from_probs(p_v: ArrayLike, p_q: ArrayLike, bound: BoundConvention) -> ArrayLike:
    """Nonlinear term from an already computed pair of optimality probabilities."""
    scalar = np.ndim(p_v) == 0 and np.ndim(p_q) == 0
    pv = np.clip(np.asarray(p_v, dtype=np.float64), 0.0, 1.0 - EPS)
    pq = np.clip(np.asarray(p_q, dtype=np.float64), 0.0, 1.0 - EPS)
    d = np.log1p(-pv) - np.log1p(-pq)
    return _out(bound.sign * d, scalar)


def _clamp_admissible(x: np.ndarray, bound: BoundConvention, diagnostics: Diagnostics | None) -> np.ndarray:
    limit = bound.value - bound.sign * EPS
    bad = _signed_gap(x, bound) > -EPS
    if np.any(bad):
        if diagnostics is not None:
            diagnostics.clamped_values += int(np.count_nonzero(bad))
        x = np.where(bad, limit, x)
    return x


def delta_ln(v: ArrayLike, q: ArrayLike, params: WflParams, bound: BoundConvention,
             diagnostics: Diagnostics | None = None) -> ArrayLike:
    """``ln((1 - p_V) / (1 - p_Q))`` for an upper bound, its negation for a lower bound."""
    scalar = np.ndim(v) == 0 and np.ndim(q) == 0
    v = np.asarray(v, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    _check_finite(v, "v")
    _check_finite(q, "q")
    if params.conventional:
        return _out(np.zeros(np.broadcast(v, q).shape), scalar)
    v = _clamp_admissible(v, bound, diagnostics)
    q = _clamp_admissible(q, bound, diagnostics)
    d = _log_one_minus_p(v, params, bound) - _log_one_minus_p(q, params, bound)
    return _out(bound.sign * d, scalar)


def update_weight(v: ArrayLike, q: ArrayLike, params: WflParams, bound: BoundConvention,
                  diagnostics: Diagnostics | None = None) -> ArrayLike:
    """Scalar multiplier on value and policy gradients: ``(1 - lam) * (q - v) + lam * delta_ln``."""
    scalar = np.ndim(v) == 0 and np.ndim(q) == 0
    v = np.asarray(v, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    _check_finite(v, "v")
    _check_finite(q, "q")
    lam = params.lambda_beta
    if lam == 0.0:
        return _out(q - v, scalar)
    w = (1.0 - lam) * (q - v) + lam * delta_ln(v, q, params, bound, diagnostics)
    return _out(w, scalar)


def taylor_delta_ln(v: ArrayLike, q: ArrayLike, bound: BoundConvention) -> ArrayLike:
    """First-order expansion of ``delta_ln`` around the bound.

    Upper bound: ``-ln((R - q) / (R - v))``; lower bound: ``-ln((q - R) / (v - R))``
    with the sign flip of the lower-bound convention, i.e. ``ln((q - R) / (v - R))``.
    Independent of ``beta``. Test oracle only.
    """
    scalar = np.ndim(v) == 0 and np.ndim(q) == 0
    gv = -_signed_gap(np.asarray(v, dtype=np.float64), bound)
    gq = -_signed_gap(np.asarray(q, dtype=np.float64), bound)
    if np.any(gv <= 0.0) or np.any(gq <= 0.0):
        raise ValueError("v and q must lie strictly inside the bound")
    return _out(-bound.sign * np.log(gq / gv), scalar)


def fisher_information(v: ArrayLike, params: WflParams, bound: BoundConvention,
                       diagnostics: Diagnostics | None = None) -> ArrayLike:
    """Fisher information of the binary optimality variable w.r.t. the value: ``beta^2 p / (1 - p)``."""
    scalar = np.ndim(v) == 0
    p = np.asarray(optimality_prob(v, params, bound))
    if diagnostics is not None:
        diagnostics.saturated_fisher += int(np.count_nonzero(p >= 1.0 - EPS))
    return _out(params.beta ** 2 * p / (1.0 - p), scalar)
