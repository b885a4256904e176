"""Sliding window of past contexts and empirical-CDF rank estimates.

Raw contexts are kept rather than projected rewards because the projection
direction changes every round.  Projections are recomputed on demand with
:func:`project`, which every other module also uses so that equal contexts
always produce bit-identical projections.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fairbandits.errors import ContractError


def project(contexts: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Row-wise inner products ``<mu, x>``.

    Computed as an elementwise product followed by a row reduction, so the
    result for a given row does not depend on how many rows are stacked with
    it (a BLAS matrix-vector product gives no such guarantee).
    """
    contexts = np.asarray(contexts, dtype=np.float64)
    return (contexts * np.asarray(mu, dtype=np.float64)).sum(axis=-1)


def split_round(t: int) -> int:
    """``floor((t - 1) / 2)``: rounds ``1..split`` train the estimate, the rest feed the ECDF."""
    if t < 1:
        raise ContractError(f"rounds are 1-indexed, got {t}")
    return (t - 1) // 2


@dataclass(frozen=True)
class RankEstimate:
    value: float
    sample_count: int


class EcdfWindow:
    """Append-only buffer of ``(round, arm, group, context)`` entries with a moving low watermark."""

    def __init__(self, dim: int, capacity: int = 256):
        self.dim = int(dim)
        self._rounds = np.empty(capacity, dtype=np.int64)
        self._arms = np.empty(capacity, dtype=np.int64)
        self._groups = np.empty(capacity, dtype=np.int64)
        self._contexts = np.empty((capacity, self.dim))
        self._start = 0
        self._stop = 0
        self._has_groups: bool | None = None
        self.last_round = 0
        self.low_watermark = 1

    def __len__(self) -> int:
        return self._stop - self._start

    @property
    def rounds(self) -> np.ndarray:
        return self._rounds[self._start:self._stop]

    @property
    def arms(self) -> np.ndarray:
        return self._arms[self._start:self._stop]

    @property
    def groups(self) -> np.ndarray:
        if self._has_groups is False:
            raise ContractError("window entries carry no group labels")
        return self._groups[self._start:self._stop]

    @property
    def contexts(self) -> np.ndarray:
        return self._contexts[self._start:self._stop]

    @property
    def has_groups(self) -> bool:
        return bool(self._has_groups)

    def _reserve(self, extra: int) -> None:
        need = len(self) + extra
        cap = self._rounds.shape[0]
        if self._stop + extra <= cap:
            return
        if need > cap // 2:
            cap = max(2 * cap, need)
        n = len(self)
        for name in ("_rounds", "_arms", "_groups", "_contexts"):
            old = getattr(self, name)
            new = np.empty((cap,) + old.shape[1:], dtype=old.dtype)
            new[:n] = old[self._start:self._stop]
            setattr(self, name, new)
        self._start, self._stop = 0, n

    def push(self, round_index: int, contexts, groups=None) -> "EcdfWindow":
        """Append all K contexts offered at ``round_index`` (arm ``a`` is row ``a``)."""
        if round_index <= self.last_round:
            raise ContractError(f"round {round_index} pushed after round {self.last_round}")
        contexts = np.asarray(contexts, dtype=np.float64)
        if contexts.ndim != 2 or contexts.shape[1] != self.dim:
            raise ContractError(f"contexts have shape {contexts.shape}, expected (K, {self.dim})")
        has_groups = groups is not None
        if self._has_groups is None:
            self._has_groups = has_groups
        elif self._has_groups != has_groups:
            raise ContractError("cannot mix labelled and unlabelled rounds in one window")
        k = contexts.shape[0]
        self._reserve(k)
        sl = slice(self._stop, self._stop + k)
        self._rounds[sl] = round_index
        self._arms[sl] = np.arange(k)
        self._groups[sl] = np.asarray(groups, dtype=np.int64) if has_groups else -1
        self._contexts[sl] = contexts
        self._stop += k
        self.last_round = round_index
        return self

    def prune(self, t: int) -> "EcdfWindow":
        """Drop every entry older than round ``split_round(t) + 1``."""
        low = split_round(t) + 1
        self.low_watermark = max(self.low_watermark, low)
        rounds = self.rounds
        # rounds are stored in nondecreasing order
        drop = int(np.searchsorted(rounds, low, side="left"))
        self._start += drop
        return self

    def arm_counts(self, num_arms: int) -> np.ndarray:
        return np.bincount(self.arms, minlength=num_arms)


def _count_at_most(values: np.ndarray, query: float) -> int:
    return int(np.count_nonzero(values <= query))


def rank_per_arm(window: EcdfWindow, mu, arm: int, query_context) -> RankEstimate:
    """Fraction of stored contexts of ``arm`` whose projection is ``<=`` the query's."""
    query = project(np.asarray(query_context, dtype=np.float64)[None, :], mu)[0]
    mask = window.arms == arm
    n = int(np.count_nonzero(mask))
    if n == 0:
        return RankEstimate(0.0, 0)
    proj = project(window.contexts[mask], mu)
    return RankEstimate(_count_at_most(proj, query) / n, n)


def rank_per_group(window: EcdfWindow, mu, group: int, query_context) -> RankEstimate:
    """Like :func:`rank_per_arm` but pools entries of ``group`` across all arms."""
    if not window.has_groups and len(window) > 0:
        raise ContractError("rank_per_group needs group-labelled window entries")
    query = project(np.asarray(query_context, dtype=np.float64)[None, :], mu)[0]
    if len(window) == 0:
        return RankEstimate(0.0, 0)
    mask = window.groups == group
    n = int(np.count_nonzero(mask))
    if n == 0:
        return RankEstimate(0.0, 0)
    proj = project(window.contexts[mask], mu)
    return RankEstimate(_count_at_most(proj, query) / n, n)


def _ranks_by_label(labels: np.ndarray, proj: np.ndarray, query_labels: np.ndarray, queries: np.ndarray):
    values = np.zeros(len(queries))
    counts = np.zeros(len(queries), dtype=np.int64)
    for label in np.unique(query_labels):
        pool = proj[labels == label]
        if pool.size == 0:
            continue
        sel = query_labels == label
        hits = (pool[None, :] <= queries[sel][:, None]).sum(axis=1)
        values[sel] = hits / pool.size
        counts[sel] = pool.size
    return values, counts


def ranks_all_arms(window: EcdfWindow, mu, contexts) -> tuple[np.ndarray, np.ndarray]:
    """Per-arm ranks for every row of ``contexts`` (row ``a`` queried against arm ``a``)."""
    contexts = np.asarray(contexts, dtype=np.float64)
    queries = project(contexts, mu)
    proj = project(window.contexts, mu)
    return _ranks_by_label(window.arms, proj, np.arange(len(contexts)), queries)


def ranks_all_groups(window: EcdfWindow, mu, contexts, groups) -> tuple[np.ndarray, np.ndarray]:
    """Pooled per-group ranks for every row of ``contexts`` against its own group."""
    contexts = np.asarray(contexts, dtype=np.float64)
    groups = np.asarray(groups, dtype=np.int64)
    queries = project(contexts, mu)
    if len(window) == 0:
        return np.zeros(len(contexts)), np.zeros(len(contexts), dtype=np.int64)
    proj = project(window.contexts, mu)
    return _ranks_by_label(window.groups, proj, groups, queries)
