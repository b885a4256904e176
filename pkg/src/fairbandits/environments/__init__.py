"""Environments: synthetic group-structured generator and dataset-backed sampler."""

from fairbandits.environments.base import EnvStreams, RewardDraw, RoundContexts
from fairbandits.environments.dataset import (
    FIXED_GROUP_PER_ARM,
    IID_POOL,
    TARGET_AS_REWARD,
    DatasetEnvironment,
    DatasetSchema,
    DatasetSpec,
    RawTable,
    dataset_prepare,
    dataset_round,
    read_csv,
)
from fairbandits.environments.oracle import TrueRankOracle, build_rank_oracle
from fairbandits.environments.synthetic import (
    FIG1_MU_STAR,
    TRADEOFF_MU_STAR,
    SyntheticEnvironment,
    SyntheticSpec,
    synthetic_round,
)

__all__ = [
    "EnvStreams",
    "RewardDraw",
    "RoundContexts",
    "FIXED_GROUP_PER_ARM",
    "IID_POOL",
    "TARGET_AS_REWARD",
    "DatasetEnvironment",
    "DatasetSchema",
    "DatasetSpec",
    "RawTable",
    "dataset_prepare",
    "dataset_round",
    "read_csv",
    "TrueRankOracle",
    "build_rank_oracle",
    "FIG1_MU_STAR",
    "TRADEOFF_MU_STAR",
    "SyntheticEnvironment",
    "SyntheticSpec",
    "synthetic_round",
]
