"""Seeded replications of every configured policy on a shared environment."""

from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from fairbandits import __version__
from fairbandits.environments.dataset import DatasetEnvironment, DatasetSpec, dataset_prepare, read_csv
from fairbandits.environments.oracle import TrueRankOracle, build_rank_oracle
from fairbandits.environments.synthetic import SyntheticEnvironment
from fairbandits.errors import ConfigError
from fairbandits.harness.config import ExperimentConfig, NamedPolicy, SyntheticEnvConfig
from fairbandits.metrics import AggregateCurves, RunTrace, aggregate
from fairbandits.policies import GroundTruth, make_policy

log = logging.getLogger(__name__)


def derive_seed(*parts) -> np.random.SeedSequence:
    """Child seed from a hash of ``parts``; adding a policy never shifts another's stream."""
    digest = hashlib.sha256(json.dumps([str(p) for p in parts]).encode()).digest()
    return np.random.SeedSequence(int.from_bytes(digest[:16], "little"))


@dataclass
class ResultBundle:
    config: ExperimentConfig
    curves: dict  # policy name -> AggregateCurves
    traces: dict  # policy name -> list[RunTrace], in seed order
    manifest: dict
    group_names: tuple
    wall_clock: float = field(default=0.0, compare=False)


def build_environment(cfg: ExperimentConfig):
    env_cfg = cfg.environment
    if isinstance(env_cfg, SyntheticEnvConfig):
        return SyntheticEnvironment(env_cfg.spec)
    if env_cfg.bundle is not None:
        path = cfg.resolve(env_cfg.bundle)
        try:
            spec = DatasetSpec.load(path)
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot load dataset bundle {path}: {exc}") from None
    else:
        schema = env_cfg.schema
        spec = dataset_prepare(
            read_csv(cfg.resolve(env_cfg.reference), schema),
            read_csv(cfg.resolve(env_cfg.sampling), schema),
            schema,
        )
    return DatasetEnvironment(spec, env_cfg.mode, env_cfg.num_arms)


def group_names(env) -> tuple:
    if isinstance(env, DatasetEnvironment):
        return env.spec.group_names
    return tuple(str(g + 1) for g in range(env.num_groups))


def run_cell(env, oracle: TrueRankOracle, policy: NamedPolicy, cfg: ExperimentConfig, seed_index: int) -> RunTrace:
    """Play one policy for ``cfg.horizon`` rounds on seed ``cfg.base_seed + seed_index``."""
    seed = cfg.base_seed + seed_index
    streams = env.make_streams(derive_seed(seed, "env"))
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "policy", policy.name)))
    agent = make_policy(policy.config, env.dim, env.num_arms, GroundTruth(env.mu_star, oracle))
    trace = RunTrace(cfg.horizon, env.num_arms, env.num_groups)
    digest = hashlib.sha256()
    for t in range(1, cfg.horizon + 1):
        rc, draw = env.round(t, streams)
        digest.update(rc.contexts.tobytes())
        groups = rc.group_labels()
        true_ranks = oracle.ranks(groups, draw.true_rewards)
        decision = agent.select(rc, rng)
        agent.update(rc, decision, draw(decision.arm))
        trace.record(groups, true_ranks, draw.true_rewards, decision.arm)
    trace.context_digest = digest.hexdigest()
    return trace


_WORKER_STATE: dict = {}


def _init_worker(env, oracle, cfg):
    _WORKER_STATE.update(env=env, oracle=oracle, cfg=cfg)


def _run_cell_in_worker(args):
    policy_index, seed_index = args
    s = _WORKER_STATE
    return run_cell(s["env"], s["oracle"], s["cfg"].policies[policy_index], s["cfg"], seed_index)


def run_experiment(cfg: ExperimentConfig) -> ResultBundle:
    """Run every (policy, seed) cell and aggregate per policy.

    All policies at a given seed share the environment stream (common random
    numbers), so their curves differ only through their own decisions.
    """
    started = time.perf_counter()
    env = build_environment(cfg)
    oracle_rng = np.random.Generator(np.random.PCG64(derive_seed(cfg.base_seed, "oracle")))
    oracle = build_rank_oracle(env, cfg.oracle_samples, oracle_rng)

    cells = [(p, s) for p in range(len(cfg.policies)) for s in range(cfg.num_seeds)]
    if cfg.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(cfg.workers, initializer=_init_worker, initargs=(env, oracle, cfg)) as pool:
            results = list(pool.map(_run_cell_in_worker, cells))
    else:
        results = []
        for p, s in cells:
            log.info("running %s seed %d", cfg.policies[p].name, cfg.base_seed + s)
            results.append(run_cell(env, oracle, cfg.policies[p], cfg, s))

    traces = {p.name: [] for p in cfg.policies}
    for (p, _), trace in zip(cells, results):
        traces[cfg.policies[p].name].append(trace)
    curves = {name: aggregate(ts) for name, ts in traces.items()}

    seeds = [cfg.base_seed + s for s in range(cfg.num_seeds)]
    manifest = {
        "artifact": "fairbandits",
        "version": __version__,
        "config": cfg.to_dict(),
        "seeds": seeds,
        "num_groups": env.num_groups,
        "group_names": list(group_names(env)),
        "dim": env.dim,
        "mu_star": [float(v) for v in env.mu_star],
        "oracle_rank_resolution": oracle.resolution,
        "context_digests": {name: [tr.context_digest for tr in ts] for name, ts in traces.items()},
    }
    return ResultBundle(
        config=cfg,
        curves=curves,
        traces=traces,
        manifest=manifest,
        group_names=group_names(env),
        wall_clock=time.perf_counter() - started,
    )


def final_summary(curves: AggregateCurves) -> dict:
    return {
        "fair_regret_mean": float(curves.fair_mean[-1]),
        "fair_regret_std": float(curves.fair_std[-1]),
        "std_regret_mean": float(curves.std_mean[-1]),
        "std_regret_std": float(curves.std_std[-1]),
    }
