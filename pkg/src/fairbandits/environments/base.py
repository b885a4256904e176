"""Round containers and per-replication random streams shared by all environments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fairbandits.errors import ContractError


@dataclass(frozen=True)
class RoundContexts:
    """The K candidates offered at round ``round``; row ``a`` of ``contexts`` is arm ``a``."""

    round: int
    contexts: np.ndarray
    groups: np.ndarray | None = None

    def __post_init__(self):
        if self.contexts.ndim != 2:
            raise ContractError(f"contexts must be a (K, d) array, got shape {self.contexts.shape}")
        if self.groups is not None and self.groups.shape != (self.contexts.shape[0],):
            raise ContractError("need exactly one group label per candidate")

    @property
    def num_arms(self) -> int:
        return self.contexts.shape[0]

    @property
    def dim(self) -> int:
        return self.contexts.shape[1]

    def group_labels(self) -> np.ndarray:
        """Group of each candidate; without explicit labels the group is the arm."""
        if self.groups is None:
            return np.arange(self.num_arms)
        return self.groups


class RewardDraw:
    """Reward function for one round.

    The noise is drawn when the round is generated, independently of which arm
    is later chosen, so every policy sharing an environment stream observes the
    same noise sequence.
    """

    def __init__(self, true_rewards: np.ndarray, noise: float, recorded: np.ndarray | None = None):
        self.true_rewards = true_rewards
        self.noise = float(noise)
        self.recorded = recorded

    def __call__(self, arm: int) -> float:
        if self.recorded is not None:
            return float(self.recorded[arm])
        return float(self.true_rewards[arm]) + self.noise


class EnvStreams:
    """Independent generators for each arm's contexts, the candidate pool and the reward noise."""

    def __init__(self, arms: list[np.random.Generator], pool: np.random.Generator, noise: np.random.Generator):
        self.arms = arms
        self.pool = pool
        self.noise = noise

    @classmethod
    def from_seed(cls, seed, num_arms: int) -> "EnvStreams":
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        children = ss.spawn(num_arms + 2)
        gens = [np.random.Generator(np.random.PCG64(c)) for c in children]
        return cls(arms=gens[:num_arms], pool=gens[num_arms], noise=gens[num_arms + 1])

    @classmethod
    def coerce(cls, rng, num_arms: int) -> "EnvStreams":
        if isinstance(rng, EnvStreams):
            return rng
        if isinstance(rng, np.random.Generator):
            return cls(arms=[rng] * num_arms, pool=rng, noise=rng)
        return cls.from_seed(rng, num_arms)
