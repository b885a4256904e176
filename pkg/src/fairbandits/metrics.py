"""Fair and standard pseudo-regret, selection statistics and cross-seed aggregation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.stats

from fairbandits.errors import ContractError


def fair_instant_regret(true_ranks, chosen: int) -> float:
    """Gap between the best true relative rank of the round and the chosen one."""
    true_ranks = np.asarray(true_ranks, dtype=np.float64)
    return float(true_ranks.max() - true_ranks[chosen])


def standard_instant_regret(true_rewards, chosen: int) -> float:
    true_rewards = np.asarray(true_rewards, dtype=np.float64)
    return float(true_rewards.max() - true_rewards[chosen])


@dataclass(frozen=True)
class RoundRecord:
    round: int
    chosen_arm: int
    chosen_group: int
    fair_inst_regret: float
    std_inst_regret: float
    chosen_rank: float
    best_rank: float


class RunTrace:
    """Per-round records of one (policy, seed) run, stored column-wise."""

    def __init__(self, horizon: int, num_arms: int, num_groups: int):
        self.horizon = int(horizon)
        self.num_arms = int(num_arms)
        self.num_groups = int(num_groups)
        self.chosen_arm = np.zeros(horizon, dtype=np.int64)
        self.chosen_group = np.zeros(horizon, dtype=np.int64)
        self.fair_inst = np.zeros(horizon)
        self.std_inst = np.zeros(horizon)
        self.chosen_rank = np.zeros(horizon)
        self.best_rank = np.zeros(horizon)
        self.arm_counts = np.zeros(num_arms, dtype=np.int64)
        self.selected_by_group = np.zeros(num_groups, dtype=np.int64)
        self.received_by_group = np.zeros(num_groups, dtype=np.int64)
        self.length = 0
        self.context_digest = ""

    def record(self, groups, true_ranks, true_rewards, chosen: int) -> RoundRecord:
        i = self.length
        if i >= self.horizon:
            raise ContractError("trace is full")
        groups = np.asarray(groups, dtype=np.int64)
        true_ranks = np.asarray(true_ranks, dtype=np.float64)
        g = int(groups[chosen])
        self.chosen_arm[i] = chosen
        self.chosen_group[i] = g
        self.fair_inst[i] = fair_instant_regret(true_ranks, chosen)
        self.std_inst[i] = standard_instant_regret(true_rewards, chosen)
        self.chosen_rank[i] = true_ranks[chosen]
        self.best_rank[i] = true_ranks.max()
        self.arm_counts[chosen] += 1
        self.selected_by_group[g] += 1
        np.add.at(self.received_by_group, groups, 1)
        self.length += 1
        return self[i]

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> RoundRecord:
        return RoundRecord(
            round=i + 1,
            chosen_arm=int(self.chosen_arm[i]),
            chosen_group=int(self.chosen_group[i]),
            fair_inst_regret=float(self.fair_inst[i]),
            std_inst_regret=float(self.std_inst[i]),
            chosen_rank=float(self.chosen_rank[i]),
            best_rank=float(self.best_rank[i]),
        )

    @property
    def cumulative_fair(self) -> np.ndarray:
        return np.cumsum(self.fair_inst[:self.length])

    @property
    def cumulative_std(self) -> np.ndarray:
        return np.cumsum(self.std_inst[:self.length])

    def selection_fraction(self) -> np.ndarray:
        """Selected / received per group; NaN for groups never offered."""
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = self.selected_by_group / self.received_by_group
        return np.where(self.received_by_group > 0, frac, np.nan)


@dataclass
class AggregateCurves:
    rounds: np.ndarray
    fair_mean: np.ndarray
    fair_std: np.ndarray
    std_mean: np.ndarray
    std_std: np.ndarray
    selection_mean: np.ndarray  # per group, NaN where never offered
    selection_std: np.ndarray
    arm_fraction_mean: np.ndarray
    num_runs: int


def _mean_std(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = x.mean(axis=0)
    if x.shape[0] < 2:
        return mean, np.zeros_like(mean)
    return mean, x.std(axis=0, ddof=1)


def aggregate(traces: list[RunTrace]) -> AggregateCurves:
    """Cross-seed mean and sample std (n - 1 denominator) of cumulative regrets."""
    if not traces:
        raise ContractError("aggregate needs at least one trace")
    horizon = len(traces[0])
    if any(len(tr) != horizon for tr in traces):
        raise ContractError("all traces must share the same horizon")
    fair = np.stack([tr.cumulative_fair for tr in traces])
    std = np.stack([tr.cumulative_std for tr in traces])
    fair_mean, fair_sd = _mean_std(fair)
    std_mean, std_sd = _mean_std(std)

    frac = np.stack([tr.selection_fraction() for tr in traces])
    offered = ~np.isnan(frac)
    n_off = offered.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        sel_mean = np.where(n_off > 0, np.nansum(frac, axis=0) / np.maximum(n_off, 1), np.nan)
        dev = np.where(offered, frac - sel_mean, 0.0)
        sel_sd = np.where(n_off > 1, np.sqrt((dev ** 2).sum(axis=0) / np.maximum(n_off - 1, 1)), 0.0)
    sel_sd = np.where(n_off > 0, sel_sd, np.nan)

    arm_frac = np.stack([tr.arm_counts / horizon for tr in traces]).mean(axis=0)
    return AggregateCurves(
        rounds=np.arange(1, horizon + 1),
        fair_mean=fair_mean,
        fair_std=fair_sd,
        std_mean=std_mean,
        std_std=std_sd,
        selection_mean=sel_mean,
        selection_std=sel_sd,
        arm_fraction_mean=arm_frac,
        num_runs=len(traces),
    )


def pooled_std(a: float, b: float) -> float:
    """Root mean square of two sample standard deviations (equal group sizes)."""
    return float(np.sqrt(0.5 * (a * a + b * b)))


def dkwm_epsilon(n: int, delta: float) -> float:
    """Half-width of the DKWM band: ``P(sup|F_n - F| > eps) <= delta``."""
    return float(np.sqrt(np.log(2.0 / delta) / (2.0 * n)))


def ecdf_sup_distance(samples, cdf) -> float:
    """Kolmogorov distance between the ECDF of ``samples`` and a continuous ``cdf``."""
    return float(scipy.stats.kstest(np.asarray(samples, dtype=np.float64), cdf).statistic)
