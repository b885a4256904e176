"""Bandit policies: Fair-Greedy (per-arm and per-group), baselines and oracles.

Every policy follows the same two-call protocol per round::

    decision = policy.select(rc, rng)
    policy.update(rc, decision, reward)

``rc.round`` must run 1, 2, 3, ... without gaps.  Policies only ever see the
reward of the arm they picked.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from fairbandits.ecdf import EcdfWindow, project, ranks_all_arms, ranks_all_groups, split_round
from fairbandits.environments.base import RoundContexts
from fairbandits.environments.oracle import TrueRankOracle
from fairbandits.errors import ConfigError, ContractError
from fairbandits.linmodel import perturbed_estimate, ridge_absorb, ridge_new

VARIANTS = (
    "fair_greedy",
    "fair_greedy_v2",
    "oful",
    "greedy",
    "uniform",
    "oracle_cdf",
    "oracle_rewards",
    "gmf_oracle",
    "optimal",
)


@dataclass(frozen=True)
class PolicyConfig:
    variant: str
    lam: float = 0.1
    rho: float = 1.0
    oful_alpha: float = 0.1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown policy variant {self.variant!r}; expected one of {VARIANTS}")
        if not self.lam > 0:
            raise ConfigError(f"lambda must be > 0, got {self.lam!r}")
        if not 0.0 < self.rho <= 1.0:
            raise ConfigError(f"rho must lie in (0, 1], got {self.rho!r}")
        if not self.oful_alpha >= 0:
            raise ConfigError(f"oful_alpha must be >= 0, got {self.oful_alpha!r}")


@dataclass(frozen=True)
class GroundTruth:
    """What oracle policies may peek at."""

    mu_star: np.ndarray | None = None
    rank_oracle: TrueRankOracle | None = None


@dataclass(frozen=True)
class PolicyDecision:
    arm: int
    tie_set_size: int
    rank_estimates: np.ndarray | None = None
    scores: np.ndarray = field(default=None, repr=False)


def uniform_argmax(scores: np.ndarray, rng: np.random.Generator) -> tuple[int, int]:
    """Uniform draw from the exact-equality argmax set; returns ``(arm, set_size)``."""
    best = np.flatnonzero(scores == scores.max())
    if best.size == 1:
        return int(best[0]), 1
    return int(best[rng.integers(best.size)]), int(best.size)


class Policy:
    name = "policy"

    def __init__(self, dim: int, num_arms: int):
        self.dim = int(dim)
        self.num_arms = int(num_arms)
        self.next_round = 1

    def _check(self, rc: RoundContexts) -> None:
        if rc.round != self.next_round:
            raise ContractError(f"{self.name}: expected round {self.next_round}, got {rc.round}")
        if rc.contexts.shape != (self.num_arms, self.dim):
            raise ContractError(
                f"{self.name}: contexts have shape {rc.contexts.shape}, expected ({self.num_arms}, {self.dim})"
            )

    def select(self, rc: RoundContexts, rng: np.random.Generator) -> PolicyDecision:
        raise NotImplementedError

    def update(self, rc: RoundContexts, decision: PolicyDecision, reward: float) -> None:
        self.next_round += 1


class FairGreedy(Policy):
    """Half-split greedy policy on estimated relative ranks.

    Selected pairs from rounds ``1..t~`` train a perturbed ridge estimate;
    all contexts from rounds ``t~+1..t-1`` form the empirical CDF of each arm.
    No sample is used for both.
    """

    name = "fair_greedy"

    def __init__(self, dim: int, num_arms: int, lam: float = 0.1, rho: float = 1.0):
        super().__init__(dim, num_arms)
        if not 0.0 < rho <= 1.0:
            raise ConfigError(f"rho must lie in (0, 1], got {rho!r}")
        self.rho = rho
        self.ridge = ridge_new(dim, lam)
        self.window = EcdfWindow(dim)
        self._pending: deque[tuple[int, np.ndarray, float]] = deque()
        self.last_estimate = None

    def _prepare(self, rc: RoundContexts, rng: np.random.Generator):
        self._check(rc)
        t = rc.round
        t_tilde = split_round(t)
        while self._pending and self._pending[0][0] <= t_tilde:
            _, x, r = self._pending.popleft()
            ridge_absorb(self.ridge, x, r)
        if self.ridge.count != t_tilde:
            raise ContractError(f"ridge holds {self.ridge.count} pairs at round {t}, expected {t_tilde}")
        self.window.prune(t)
        est = perturbed_estimate(self.ridge, t_tilde, self.rho, rng)
        self.last_estimate = est
        return est.mu

    def _ranks(self, rc: RoundContexts, mu: np.ndarray) -> np.ndarray:
        t = rc.round
        values, counts = ranks_all_arms(self.window, mu, rc.contexts)
        expected = t - 1 - split_round(t)
        if np.any(counts != expected):
            raise ContractError(f"ECDF denominators {counts.tolist()} at round {t}, expected {expected}")
        return values

    def select(self, rc: RoundContexts, rng: np.random.Generator) -> PolicyDecision:
        mu = self._prepare(rc, rng)
        ranks = self._ranks(rc, mu)
        arm, ties = uniform_argmax(ranks, rng)
        return PolicyDecision(arm=arm, tie_set_size=ties, rank_estimates=ranks, scores=ranks)

    def update(self, rc: RoundContexts, decision: PolicyDecision, reward: float) -> None:
        self._pending.append((rc.round, rc.contexts[decision.arm].copy(), float(reward)))
        self.window.push(rc.round, rc.contexts, rc.groups)
        super().update(rc, decision, reward)


class FairGreedyV2(FairGreedy):
    """Fair-Greedy with group labels drawn per candidate; ECDFs pool all arms by group."""

    name = "fair_greedy_v2"

    def _ranks(self, rc: RoundContexts, mu: np.ndarray) -> np.ndarray:
        if rc.groups is None:
            raise ContractError("fair_greedy_v2 needs group labels on every round")
        values, _ = ranks_all_groups(self.window, mu, rc.contexts, rc.groups)
        return values

    def update(self, rc: RoundContexts, decision: PolicyDecision, reward: float) -> None:
        if rc.groups is None:
            raise ContractError("fair_greedy_v2 needs group labels on every round")
        super().update(rc, decision, reward)


class _FullRidge(Policy):
    """Base for policies fitting an unperturbed ridge estimate on the whole history."""

    def __init__(self, dim: int, num_arms: int, lam: float = 0.1):
        super().__init__(dim, num_arms)
        self.ridge = ridge_new(dim, lam)

    def update(self, rc: RoundContexts, decision: PolicyDecision, reward: float) -> None:
        ridge_absorb(self.ridge, rc.contexts[decision.arm], reward)
        super().update(rc, decision, reward)


class Oful(_FullRidge):
    """Optimistic ridge policy: estimate plus ``alpha * ||x||_{V^-1}``."""

    name = "oful"

    def __init__(self, dim: int, num_arms: int, lam: float = 0.1, alpha: float = 0.1):
        super().__init__(dim, num_arms, lam)
        self.alpha = float(alpha)

    def select(self, rc: RoundContexts, rng: np.random.Generator) -> PolicyDecision:
        self._check(rc)
        scores = project(rc.contexts, self.ridge.solution())
        if self.alpha > 0:
            scores = scores + self.alpha * self.ridge.mahalanobis(rc.contexts)
        arm, ties = uniform_argmax(scores, rng)
        return PolicyDecision(arm=arm, tie_set_size=ties, scores=scores)


class Greedy(_FullRidge):
    name = "greedy"

    def select(self, rc: RoundContexts, rng: np.random.Generator) -> PolicyDecision:
        self._check(rc)
        scores = project(rc.contexts, self.ridge.solution())
        arm, ties = uniform_argmax(scores, rng)
        return PolicyDecision(arm=arm, tie_set_size=ties, scores=scores)


class Uniform(Policy):
    name = "uniform"

    def select(self, rc: RoundContexts, rng: np.random.Generator) -> PolicyDecision:
        self._check(rc)
        return PolicyDecision(arm=int(rng.integers(self.num_arms)), tie_set_size=self.num_arms)


class OracleCdf(_FullRidge):
    """Full-history ridge estimate ranked through the true per-group CDFs."""

    name = "oracle_cdf"

    def __init__(self, dim: int, num_arms: int, rank_oracle: TrueRankOracle, lam: float = 0.1):
        super().__init__(dim, num_arms, lam)
        self.oracle = rank_oracle

    def select(self, rc: RoundContexts, rng: np.random.Generator) -> PolicyDecision:
        self._check(rc)
        ranks = self.oracle.ranks(rc.group_labels(), project(rc.contexts, self.ridge.solution()))
        arm, ties = uniform_argmax(ranks, rng)
        return PolicyDecision(arm=arm, tie_set_size=ties, rank_estimates=ranks, scores=ranks)


class OracleRewards(Policy):
    """True reward model ranked through ECDFs of every past context of the same group.

    The model never changes, so past contexts are stored already projected
    (as one-dimensional entries ranked under the unit direction).
    """

    name = "oracle_rewards"
    _UNIT = np.ones(1)

    def __init__(self, dim: int, num_arms: int, mu_star: np.ndarray):
        super().__init__(dim, num_arms)
        self.mu_star = np.asarray(mu_star, dtype=np.float64)
        self.window = EcdfWindow(1)

    def select(self, rc: RoundContexts, rng: np.random.Generator) -> PolicyDecision:
        self._check(rc)
        rewards = project(rc.contexts, self.mu_star)[:, None]
        ranks, _ = ranks_all_groups(self.window, self._UNIT, rewards, rc.group_labels())
        arm, ties = uniform_argmax(ranks, rng)
        return PolicyDecision(arm=arm, tie_set_size=ties, rank_estimates=ranks, scores=ranks)

    def update(self, rc: RoundContexts, decision: PolicyDecision, reward: float) -> None:
        self.window.push(rc.round, project(rc.contexts, self.mu_star)[:, None], rc.group_labels())
        super().update(rc, decision, reward)


class GmfOracle(Policy):
    """The fair comparator: maximal true relative rank."""

    name = "gmf_oracle"

    def __init__(self, dim: int, num_arms: int, mu_star: np.ndarray, rank_oracle: TrueRankOracle):
        super().__init__(dim, num_arms)
        self.mu_star = np.asarray(mu_star, dtype=np.float64)
        self.oracle = rank_oracle

    def select(self, rc: RoundContexts, rng: np.random.Generator) -> PolicyDecision:
        self._check(rc)
        ranks = self.oracle.ranks(rc.group_labels(), project(rc.contexts, self.mu_star))
        arm, ties = uniform_argmax(ranks, rng)
        return PolicyDecision(arm=arm, tie_set_size=ties, rank_estimates=ranks, scores=ranks)


class Optimal(Policy):
    """Reward-maximising comparator: greedy on the true reward model."""

    name = "optimal"

    def __init__(self, dim: int, num_arms: int, mu_star: np.ndarray):
        super().__init__(dim, num_arms)
        self.mu_star = np.asarray(mu_star, dtype=np.float64)

    def select(self, rc: RoundContexts, rng: np.random.Generator) -> PolicyDecision:
        self._check(rc)
        scores = project(rc.contexts, self.mu_star)
        arm, ties = uniform_argmax(scores, rng)
        return PolicyDecision(arm=arm, tie_set_size=ties, scores=scores)


def make_policy(config: PolicyConfig, dim: int, num_arms: int, truth: GroundTruth | None = None) -> Policy:
    truth = truth or GroundTruth()
    v = config.variant

    def need(attr):
        value = getattr(truth, attr)
        if value is None:
            raise ConfigError(f"policy {v!r} needs ground truth ({attr}) which was not provided")
        return value

    if v == "fair_greedy":
        return FairGreedy(dim, num_arms, lam=config.lam, rho=config.rho)
    if v == "fair_greedy_v2":
        return FairGreedyV2(dim, num_arms, lam=config.lam, rho=config.rho)
    if v == "oful":
        return Oful(dim, num_arms, lam=config.lam, alpha=config.oful_alpha)
    if v == "greedy":
        return Greedy(dim, num_arms, lam=config.lam)
    if v == "uniform":
        return Uniform(dim, num_arms)
    if v == "oracle_cdf":
        return OracleCdf(dim, num_arms, need("rank_oracle"), lam=config.lam)
    if v == "oracle_rewards":
        return OracleRewards(dim, num_arms, need("mu_star"))
    if v == "gmf_oracle":
        return GmfOracle(dim, num_arms, need("mu_star"), need("rank_oracle"))
    return Optimal(dim, num_arms, need("mu_star"))
