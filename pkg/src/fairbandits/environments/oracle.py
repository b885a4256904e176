"""Ground-truth relative ranks from a large per-group sample of true rewards."""

from __future__ import annotations

import numpy as np

from fairbandits.ecdf import project
from fairbandits.errors import ContractError

_CHUNK = 100_000


class TrueRankOracle:
    """Per-group sorted true-reward samples; ``rank`` is the fraction of samples ``<=`` a query."""

    def __init__(self, sorted_samples: list[np.ndarray]):
        for s in sorted_samples:
            if s.size == 0:
                raise ContractError("every group needs at least one oracle sample")
        self.samples = [np.asarray(s, dtype=np.float64) for s in sorted_samples]

    @property
    def num_groups(self) -> int:
        return len(self.samples)

    @property
    def resolution(self) -> float:
        """Coarsest rank step, ``1 / min_group_samples``."""
        return 1.0 / min(s.size for s in self.samples)

    def rank(self, group: int, values) -> np.ndarray | float:
        s = self.samples[group]
        return np.searchsorted(s, values, side="right") / s.size

    def ranks(self, groups, values) -> np.ndarray:
        groups = np.asarray(groups, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        out = np.empty(values.shape)
        for i, (g, v) in enumerate(zip(groups, values)):
            s = self.samples[g]
            out[i] = np.searchsorted(s, v, side="right") / s.size
        return out


def build_rank_oracle(env, samples_per_group: int, rng: np.random.Generator) -> TrueRankOracle:
    """Sample ``samples_per_group`` contexts per group, project on the true model and sort."""
    if samples_per_group < 1:
        raise ContractError("samples_per_group must be positive")
    arrays = []
    for g in range(env.num_groups):
        parts = []
        left = samples_per_group
        while left > 0:
            n = min(left, _CHUNK)
            parts.append(project(env.sample_group(g, n, rng), env.mu_star))
            left -= n
        arrays.append(np.sort(np.concatenate(parts)))
    return TrueRankOracle(arrays)
