"""Running reward-scale estimate and the inverse temperature derived from it."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

SIGMA_FLOOR = 1e-8


@dataclass(frozen=True)
class ScaleState:
    """Recent-maximum reward scale, smoothed with factor ``zeta``.

    ``beta0 = math.inf`` is the conventional-TD configuration.
    """

    zeta: float = 0.999
    beta0: float = 1.0
    sigma_max: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.zeta < 1.0:
            raise ValueError(f"zeta must be in (0, 1), got {self.zeta}")
        if not self.beta0 > 0.0:
            raise ValueError(f"beta0 must be positive, got {self.beta0}")

    def to_dict(self) -> dict:
        return asdict(self)


def observe(state: ScaleState, r: float) -> ScaleState:
    r = float(r)
    if not math.isfinite(r):
        raise ValueError("reward must be finite")
    sigma_max = max(state.zeta * state.sigma_max, abs(r))
    sigma = state.zeta * state.sigma + (1.0 - state.zeta) * sigma_max
    return replace(state, sigma_max=sigma_max, sigma=max(sigma, SIGMA_FLOOR))


def current_beta(state: ScaleState) -> float:
    if math.isinf(state.beta0):
        return math.inf
    return state.beta0 / state.sigma
