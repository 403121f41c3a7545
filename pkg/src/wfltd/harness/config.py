"""Experiment configurations and the INI-style config file reader.

A config file has one section per configuration; ``[DEFAULT]`` values apply to
every section::

    [DEFAULT]
    episodes = 300
    seeds = 0-9

    [conventional]
    beta0 = inf

    [asymmetric]
    beta0_plus = 10
    beta0_minus = 0.1

``beta0`` sets both branches. Any other key is passed to
:class:`~wfltd.agent.RewardPunishmentAgent` as an override.
"""
from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from ..agent import RewardPunishmentAgent

INF_TOKENS = {"inf", "infinity", "conventional", "∞"}
ALGORITHM_MODULES = ("core.py", "scale.py", "nn.py", "env.py", "agent.py", "harness/sweep.py")


def code_digest() -> str:
    """Digest of the modules that determine a training run's output."""
    root = Path(__file__).resolve().parent.parent
    h = hashlib.sha256()
    for name in ALGORITHM_MODULES:
        h.update((root / name).read_bytes())
    return h.hexdigest()[:16]


def parse_beta(text) -> float:
    if isinstance(text, (int, float)):
        value = float(text)
    elif str(text).strip().lower() in INF_TOKENS:
        value = math.inf
    else:
        value = float(text)
    if not value > 0.0:
        raise ValueError(f"beta0 must be positive or inf, got {text!r}")
    return value


def parse_seeds(text) -> list[int]:
    """``"0-4"`` or ``"0,3,7"`` or a mix like ``"0-2,9"``; a list of ints passes through."""
    if isinstance(text, (list, tuple)):
        return [int(s) for s in text]
    seeds = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ValueError(f"no seeds in {text!r}")
    return seeds


def _agent_keys() -> set:
    return set(RewardPunishmentAgent().get_params()) - {"random_state", "beta0_plus", "beta0_minus",
                                                        "gamma", "zeta", "lr"}


def _coerce(value: str):
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        try:
            return float(value)
        except ValueError:
            return value


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "conventional"
    beta0_plus: float = math.inf
    beta0_minus: float = math.inf
    seeds: tuple = tuple(range(10))
    episodes: int = 300
    gamma: float = 0.99
    zeta: float = 0.999
    lr: float = 1e-3
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "beta0_plus", parse_beta(self.beta0_plus))
        object.__setattr__(self, "beta0_minus", parse_beta(self.beta0_minus))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.episodes < 1:
            raise ValueError("episodes must be positive")
        unknown = set(self.overrides) - _agent_keys()
        if unknown:
            raise ValueError(f"unknown agent parameters: {sorted(unknown)}")

    def agent_params(self) -> dict:
        params = {"beta0_plus": self.beta0_plus, "beta0_minus": self.beta0_minus,
                  "gamma": self.gamma, "zeta": self.zeta, "lr": self.lr}
        for k, v in self.overrides.items():
            params[k] = tuple(v) if isinstance(v, list) else v
        return params

    def make_agent(self, seed: int) -> RewardPunishmentAgent:
        return RewardPunishmentAgent(random_state=seed, **self.agent_params())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["seeds"] = list(self.seeds)
        for k in ("beta0_plus", "beta0_minus"):
            d[k] = "inf" if math.isinf(d[k]) else d[k]
        return d

    @property
    def config_hash(self) -> str:
        """Digest of everything that shapes a single seed's run (not the name or seed list).

        Includes :func:`code_digest`, so resumed sweeps never mix outputs of
        different algorithm versions.
        """
        d = self.to_dict()
        d["code"] = code_digest()
        d.pop("name")
        d.pop("seeds")
        d["agent"] = {k: (repr(v) if isinstance(v, float) else v) for k, v in
                      sorted(RewardPunishmentAgent(**self.agent_params()).get_params().items())}
        blob = json.dumps(d, sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)



def config_from_mapping(name: str, values: dict) -> ExperimentConfig:
    kw: dict = {"name": name}
    overrides = {}
    for key, raw in values.items():
        key = key.strip().lower()
        if key == "beta0":
            kw["beta0_plus"] = kw["beta0_minus"] = parse_beta(raw)
        elif key in ("beta0_plus", "beta0_minus"):
            kw[key] = parse_beta(raw)
        elif key == "seeds":
            kw["seeds"] = parse_seeds(raw)
        elif key == "episodes":
            kw["episodes"] = int(raw)
        elif key in ("gamma", "zeta", "lr"):
            kw[key] = float(raw)
        else:
            overrides[key] = _coerce(raw) if isinstance(raw, str) else raw
    return ExperimentConfig(overrides=overrides, **kw)


def load_configs(path) -> list[ExperimentConfig]:
    parser = configparser.ConfigParser(interpolation=None)
    text = Path(path).read_text()
    parser.read_string(text)
    sections = parser.sections()
    if not sections:
        raise ValueError(f"{path}: no configuration sections")
    return [config_from_mapping(name, dict(parser[name])) for name in sections]


def pendulum_configs(seeds=tuple(range(10)), episodes: int = 300) -> list[ExperimentConfig]:
    """The symmetric beta0 sweep plus the asymmetric (10, 0.1) setting on the pendulum."""
    configs = [
        ExperimentConfig("beta0_0.1", 0.1, 0.1, seeds, episodes),
        ExperimentConfig("beta0_1", 1.0, 1.0, seeds, episodes),
        ExperimentConfig("beta0_10", 10.0, 10.0, seeds, episodes),
        ExperimentConfig("conventional", math.inf, math.inf, seeds, episodes),
        ExperimentConfig("asymmetric", 10.0, 0.1, seeds, episodes),
    ]
    return configs


ACCEPTANCE_CONFIGS = ("conventional", "beta0_0.1", "beta0_10", "asymmetric")


def acceptance_configs(seeds=tuple(range(10)), episodes: int = 300) -> list[ExperimentConfig]:
    """The four pendulum settings the learning acceptance checks compare."""
    return [c for c in pendulum_configs(seeds, episodes) if c.name in ACCEPTANCE_CONFIGS]
