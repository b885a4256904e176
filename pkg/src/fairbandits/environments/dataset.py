"""Dataset-backed environment: candidates are rows of a normalised tabular split.

Preparation follows the two-split protocol: normalisation statistics come
from a reference split, the sampling split is normalised with them, and the
true reward model is a (nearly unregularised) ridge fit on the normalised
sampling split.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from fairbandits.ecdf import project
from fairbandits.environments.base import EnvStreams, RewardDraw, RoundContexts
from fairbandits.errors import ConfigError, ContractError

# noise_sigma sentinel: the recorded (normalised) target is the observed reward.
TARGET_AS_REWARD = "target"
FIT_REGULARIZATION = 1e-8

FIXED_GROUP_PER_ARM = "fixed_group_per_arm"
IID_POOL = "iid_pool"
MODES = (FIXED_GROUP_PER_ARM, IID_POOL)


@dataclass(frozen=True)
class DatasetSchema:
    """Column roles and preparation options for a raw CSV split."""

    feature_columns: tuple
    group_column: str
    target_column: str
    min_group_size: int = 0
    noise_sigma: float | str = TARGET_AS_REWARD
    # string-coded columns expanded to one-hot indicators (first reference level dropped)
    categorical_columns: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "feature_columns", tuple(self.feature_columns))
        object.__setattr__(self, "categorical_columns", tuple(self.categorical_columns))
        if not self.feature_columns and not self.categorical_columns:
            raise ConfigError("at least one feature column is required")
        overlap = set(self.feature_columns) & set(self.categorical_columns)
        if overlap:
            raise ConfigError(f"columns declared both numeric and categorical: {sorted(overlap)}")
        if isinstance(self.noise_sigma, str):
            if self.noise_sigma != TARGET_AS_REWARD:
                raise ConfigError(f"noise_sigma must be a number or {TARGET_AS_REWARD!r}")
        elif self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be non-negative")

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSchema":
        known = {"feature_columns", "group_column", "target_column", "min_group_size", "noise_sigma",
                 "categorical_columns"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown dataset schema keys: {sorted(extra)}")
        return cls(**d)


@dataclass
class RawTable:
    """Parsed CSV split: float features/target and string group labels."""

    features: np.ndarray
    groups: np.ndarray
    target: np.ndarray
    source: str = "<memory>"
    categorical: np.ndarray | None = None  # (n, c) strings


def read_csv(path, schema: DatasetSchema) -> RawTable:
    """Read a UTF-8, comma-separated file with a header row.

    Any unparsable numeric cell (or a short row) raises :class:`ConfigError`
    naming the file line.
    """
    path = Path(path)
    feats, groups, target, cats = [], [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        wanted = (*schema.feature_columns, *schema.categorical_columns, schema.group_column, schema.target_column)
        missing = [c for c in wanted if c not in header]
        if missing:
            raise ConfigError(f"{path}: missing columns {missing}")
        fidx = [header.index(c) for c in schema.feature_columns]
        gidx = header.index(schema.group_column)
        tidx = header.index(schema.target_column)
        cidx = [header.index(c) for c in schema.categorical_columns]
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise ConfigError(f"{path}:{line}: expected {len(header)} cells, got {len(row)}")
            try:
                feats.append([float(row[i]) for i in fidx])
                target.append(float(row[tidx]))
            except ValueError as exc:
                raise ConfigError(f"{path}:{line}: unparsable cell ({exc})") from None
            g = row[gidx].strip()
            if not g:
                raise ConfigError(f"{path}:{line}: empty group label")
            groups.append(g)
            cats.append([row[i].strip() for i in cidx])
    if not feats:
        raise ConfigError(f"{path}: no data rows")
    return RawTable(
        features=np.asarray(feats, dtype=np.float64),
        groups=np.asarray(groups),
        target=np.asarray(target, dtype=np.float64),
        source=str(path),
        categorical=np.asarray(cats, dtype=str).reshape(len(cats), len(cidx)) if cidx else None,
    )


@dataclass
class DatasetSpec:
    feature_columns: tuple
    group_column: str
    target_column: str
    group_names: tuple
    feature_mean: np.ndarray
    feature_std: np.ndarray
    target_mean: float
    target_std: float
    features: np.ndarray  # normalised sampling split, (n, d)
    groups: np.ndarray  # integer group codes into group_names
    target: np.ndarray  # normalised sampling-split target
    fitted_mu: np.ndarray
    noise_sigma: float | str = TARGET_AS_REWARD
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def num_groups(self) -> int:
        return len(self.group_names)

    def save(self, path) -> None:
        header = {
            "feature_columns": list(self.feature_columns),
            "group_column": self.group_column,
            "target_column": self.target_column,
            "group_names": list(self.group_names),
            "target_mean": self.target_mean,
            "target_std": self.target_std,
            "noise_sigma": self.noise_sigma,
            "meta": self.meta,
        }
        with open(path, "wb") as fh:
            np.savez(
                fh,
                header=np.asarray(json.dumps(header, sort_keys=True)),
                feature_mean=self.feature_mean,
                feature_std=self.feature_std,
                features=self.features,
                groups=self.groups,
                target=self.target,
                fitted_mu=self.fitted_mu,
            )

    @classmethod
    def load(cls, path) -> "DatasetSpec":
        with np.load(path, allow_pickle=False) as z:
            header = json.loads(str(z["header"]))
            return cls(
                feature_columns=tuple(header["feature_columns"]),
                group_column=header["group_column"],
                target_column=header["target_column"],
                group_names=tuple(header["group_names"]),
                feature_mean=z["feature_mean"],
                feature_std=z["feature_std"],
                target_mean=header["target_mean"],
                target_std=header["target_std"],
                features=z["features"],
                groups=z["groups"],
                target=z["target"],
                fitted_mu=z["fitted_mu"],
                noise_sigma=header["noise_sigma"],
                meta=header.get("meta", {}),
            )


def ridge_fit(features: np.ndarray, target: np.ndarray, lam: float = FIT_REGULARIZATION) -> np.ndarray:
    gram = features.T @ features + lam * np.eye(features.shape[1])
    return scipy.linalg.solve(gram, features.T @ target, assume_a="pos")


def one_hot(values: np.ndarray, levels: np.ndarray) -> np.ndarray:
    """Indicator columns for ``levels``; values outside ``levels`` map to all zeros."""
    return (values[:, None] == levels[None, :]).astype(np.float64)


def dataset_prepare(reference: RawTable, sampling: RawTable, schema: DatasetSchema) -> DatasetSpec:
    """Normalise ``sampling`` with ``reference`` statistics and fit the reward model.

    Groups with fewer than ``schema.min_group_size`` rows in the sampling split
    are dropped from both splits before anything is computed.
    """
    if reference.features.shape[1] != sampling.features.shape[1]:
        raise ConfigError("reference and sampling splits have different feature counts")
    if schema.categorical_columns and (reference.categorical is None or sampling.categorical is None):
        raise ConfigError("categorical columns declared but missing from the parsed splits")
    names, counts = np.unique(sampling.groups, return_counts=True)
    kept = names[counts >= schema.min_group_size]
    if kept.size == 0:
        raise ConfigError(f"no group has at least {schema.min_group_size} rows")
    ref_mask = np.isin(reference.groups, kept)
    samp_mask = np.isin(sampling.groups, kept)
    if not ref_mask.any():
        raise ConfigError("reference split has no rows in the retained groups")

    names = list(schema.feature_columns)
    ref_x = reference.features[ref_mask]
    samp_x = sampling.features[samp_mask]
    levels = {}
    if schema.categorical_columns:
        ref_parts, samp_parts = [ref_x], [samp_x]
        for j, col in enumerate(schema.categorical_columns):
            lv = np.unique(reference.categorical[ref_mask, j])
            levels[col] = [str(v) for v in lv]
            ref_parts.append(one_hot(reference.categorical[ref_mask, j], lv[1:]))
            samp_parts.append(one_hot(sampling.categorical[samp_mask, j], lv[1:]))
            names.extend(f"{col}={v}" for v in lv[1:])
        ref_x = np.hstack(ref_parts)
        samp_x = np.hstack(samp_parts)
    mean = ref_x.mean(axis=0)
    std = ref_x.std(axis=0)
    for name, s in zip(names, std):
        if not s > 0:
            raise ConfigError(f"feature column {name!r} has zero variance in the reference split")
    ref_y = reference.target[ref_mask]
    y_mean = float(ref_y.mean())
    y_std = float(ref_y.std())
    if not y_std > 0:
        # constant target: centring alone maps it to zero
        y_std = 1.0

    x = (samp_x - mean) / std
    y = (sampling.target[samp_mask] - y_mean) / y_std
    group_names = tuple(str(g) for g in kept)
    codes = np.searchsorted(kept, sampling.groups[samp_mask])
    return DatasetSpec(
        feature_columns=tuple(names),
        group_column=schema.group_column,
        target_column=schema.target_column,
        group_names=group_names,
        feature_mean=mean,
        feature_std=std,
        target_mean=y_mean,
        target_std=y_std,
        features=x,
        groups=codes.astype(np.int64),
        target=y,
        fitted_mu=ridge_fit(x, y),
        noise_sigma=schema.noise_sigma,
        meta={"reference": reference.source, "sampling": sampling.source, "categorical_levels": levels},
    )


def _group_rows(spec: DatasetSpec) -> list[np.ndarray]:
    return [np.flatnonzero(spec.groups == g) for g in range(spec.num_groups)]


def dataset_round(spec: DatasetSpec, mode: str, num_arms: int, rng, round_index: int = 1,
                  _rows: list | None = None) -> tuple[RoundContexts, RewardDraw]:
    """Sample K candidates (with replacement) and the round's reward noise."""
    if mode not in MODES:
        raise ConfigError(f"unknown dataset mode {mode!r}; expected one of {MODES}")
    streams = EnvStreams.coerce(rng, num_arms)
    if mode == FIXED_GROUP_PER_ARM:
        if num_arms != spec.num_groups:
            raise ConfigError(f"{FIXED_GROUP_PER_ARM} needs K == number of groups ({spec.num_groups})")
        rows_by_group = _rows if _rows is not None else _group_rows(spec)
        idx = np.empty(num_arms, dtype=np.int64)
        for a in range(num_arms):
            pool = rows_by_group[a]
            if pool.size == 0:
                raise ConfigError(f"group {spec.group_names[a]!r} has no rows")
            idx[a] = pool[streams.arms[a].integers(pool.size)]
    else:
        idx = streams.pool.integers(spec.features.shape[0], size=num_arms)
    contexts = spec.features[idx]
    groups = spec.groups[idx].copy()
    true_rewards = project(contexts, spec.fitted_mu)
    xi = streams.noise.standard_normal()
    if spec.noise_sigma == TARGET_AS_REWARD:
        draw = RewardDraw(true_rewards, 0.0, recorded=spec.target[idx])
    else:
        draw = RewardDraw(true_rewards, float(spec.noise_sigma) * xi)
    return RoundContexts(round=round_index, contexts=contexts, groups=groups), draw


class DatasetEnvironment:
    def __init__(self, spec: DatasetSpec, mode: str, num_arms: int):
        if mode not in MODES:
            raise ConfigError(f"unknown dataset mode {mode!r}; expected one of {MODES}")
        if mode == FIXED_GROUP_PER_ARM and num_arms != spec.num_groups:
            raise ConfigError(f"{FIXED_GROUP_PER_ARM} needs K == number of groups ({spec.num_groups})")
        if num_arms < 1:
            raise ConfigError("num_arms must be positive")
        self.spec = spec
        self.mode = mode
        self._num_arms = int(num_arms)
        self.mu_star = np.asarray(spec.fitted_mu, dtype=np.float64)
        self._rows = _group_rows(spec)
        for g, rows in enumerate(self._rows):
            if rows.size == 0:
                raise ConfigError(f"group {spec.group_names[g]!r} has no rows")

    @property
    def num_arms(self) -> int:
        return self._num_arms

    @property
    def num_groups(self) -> int:
        return self.spec.num_groups

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def fixed_groups(self) -> bool:
        return self.mode == FIXED_GROUP_PER_ARM

    def make_streams(self, seed) -> EnvStreams:
        return EnvStreams.from_seed(seed, self.num_arms)

    def round(self, t: int, streams: EnvStreams) -> tuple[RoundContexts, RewardDraw]:
        return dataset_round(self.spec, self.mode, self.num_arms, streams, round_index=t, _rows=self._rows)

    def sample_group(self, group: int, n: int, rng: np.random.Generator) -> np.ndarray:
        if not 0 <= group < self.num_groups:
            raise ContractError(f"group {group} out of range")
        rows = self._rows[group]
        return self.spec.features[rows[rng.integers(rows.size, size=n)]]
