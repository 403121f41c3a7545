"""Weber-Fechner weighted TD learning in a reward-punishment actor-critic."""
from .agent import ReplayBuffer, RewardPunishmentAgent, Transition, mixture_weight, td_target
from .core import (
    Diagnostics,
    LowerBound,
    UpperBound,
    WflParams,
    delta_ln,
    fisher_information,
    lambda_from_beta,
    optimality_prob,
    taylor_delta_ln,
    update_weight,
)
from .env import EnvStep, Pendulum
from .scale import ScaleState, current_beta, observe

__version__ = "0.1.0"
