"""Seed-parallel training sweeps with per-seed and aggregate outputs."""
from __future__ import annotations

import json
import logging
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from ..env import Pendulum
from .config import ExperimentConfig
from .curves import LearningCurve, aggregate, read_curve, write_aggregate, write_curve
from .svg import learning_curve_svg

log = logging.getLogger(__name__)

ENV_STREAM = 0x656E76


def make_env(seed: int) -> Pendulum:
    # independent of the agent's streams, which are spawned from SeedSequence(seed)
    return Pendulum(seed=np.random.SeedSequence(seed, spawn_key=(ENV_STREAM,)))


def run_seed(config: ExperimentConfig, seed: int) -> LearningCurve:
    agent = config.make_agent(seed)
    agent.fit(make_env(seed), config.episodes)
    return LearningCurve.from_records(seed, agent.learning_curve_, config.config_hash, config.name)


def _worker(args):
    config, seed, path = args
    try:
        curve = run_seed(config, seed)
        write_curve(path, curve)
        return seed, "ok", None
    except Exception:  # one failed seed must not take down the sweep
        return seed, "failed", traceback.format_exc()


def seed_path(out_dir, config: ExperimentConfig, seed: int) -> Path:
    return Path(out_dir) / config.name / f"seed_{seed}.csv"


def _is_complete(path: Path, config: ExperimentConfig) -> bool:
    if not path.exists():
        return False
    try:
        curve = read_curve(path)
    except (ValueError, IndexError):
        return False
    return curve.config_hash == config.config_hash and len(curve) == config.episodes


def run_sweep(configs, out_dir, jobs: int = 1, resume: bool = False) -> dict:
    """Train every (config, seed) pair and write curves, aggregates and a manifest.

    Layout::

        out_dir/manifest.json
        out_dir/<config>/seed_<n>.csv
        out_dir/<config>/aggregate.csv
        out_dir/<config>/curves.svg

    With ``resume=True`` seed files already written for the same config hash
    are kept instead of being recomputed.
    """
    out_dir = Path(out_dir)
    configs = list(configs)
    names = [c.name for c in configs]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate config names: {names}")
    tasks, status = [], {}
    for cfg in configs:
        (out_dir / cfg.name).mkdir(parents=True, exist_ok=True)
        status[cfg.name] = {}
        for seed in cfg.seeds:
            path = seed_path(out_dir, cfg, seed)
            if resume and _is_complete(path, cfg):
                status[cfg.name][seed] = ("ok", None)
            else:
                tasks.append((cfg, seed, path))
    log.info("running %d seed runs (%d reused)", len(tasks), sum(len(c.seeds) for c in configs) - len(tasks))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_worker, tasks))
    else:
        results = [_worker(t) for t in tasks]
    for (cfg, _, _), (seed, state, err) in zip(tasks, results):
        status[cfg.name][seed] = (state, err)
        if err:
            log.error("config %s seed %d failed:\n%s", cfg.name, seed, err)

    manifest = {"configs": {}}
    for cfg in configs:
        ok = sorted(s for s, (state, _) in status[cfg.name].items() if state == "ok")
        entry = {
            "config_hash": cfg.config_hash,
            "config": cfg.to_dict(),
            "seeds": {str(s): {"status": status[cfg.name][s][0], "error": status[cfg.name][s][1]}
                      for s in sorted(status[cfg.name])},
        }
        if ok:
            curves = [read_curve(seed_path(out_dir, cfg, s)) for s in ok]
            agg = aggregate(curves)
            write_aggregate(out_dir / cfg.name / "aggregate.csv", agg, cfg.config_hash, cfg.name)
            (out_dir / cfg.name / "curves.svg").write_text(learning_curve_svg(agg, title=cfg.name))
        manifest["configs"][cfg.name] = entry
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest


def load_sweep(out_dir, configs=None) -> dict:
    """Read back ``{config name: [LearningCurve, ...]}`` for seeds marked ok."""
    out_dir = Path(out_dir)
    manifest = json.loads((out_dir / "manifest.json").read_text())
    wanted = None if configs is None else {c.name if hasattr(c, "name") else c for c in configs}
    result = {}
    for name, entry in manifest["configs"].items():
        if wanted is not None and name not in wanted:
            continue
        seeds = [int(s) for s, info in entry["seeds"].items() if info["status"] == "ok"]
        result[name] = [read_curve(out_dir / name / f"seed_{s}.csv") for s in sorted(seeds)]
    return result
