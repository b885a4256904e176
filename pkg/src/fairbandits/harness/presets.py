"""Built-in experiment presets.

Horizons and seeds are not fixed by the original experiments; the values
below are the package's own choices (10 seeds, T = 10^4 synthetic and
T = 5 * 10^3 for the dataset and tradeoff settings).
"""

from __future__ import annotations

import copy
from importlib import resources

from fairbandits.environments.synthetic import FIG1_MU_STAR, TRADEOFF_MU_STAR
from fairbandits.harness.config import ExperimentConfig, config_from_dict

CENSUS_FEATURES = ["AGEP", "SCHL", "WKHP", "OCCSCORE", "MAR", "COMMUTE"]
CENSUS_CATEGORICAL = ["OCCP", "REGION", "POBP"]


def data_dir() -> str:
    return str(resources.files("fairbandits") / "data")


def _census_env(group_column: str, mode: str, num_arms: int, min_group_size: int, noise_sigma):
    return {
        "kind": "dataset",
        "mode": mode,
        "num_arms": num_arms,
        "reference": "census_fixture_reference.csv",
        "sampling": "census_fixture_sampling.csv",
        "schema": {
            "feature_columns": CENSUS_FEATURES,
            "categorical_columns": CENSUS_CATEGORICAL,
            "group_column": group_column,
            "target_column": "PINCP",
            "min_group_size": min_group_size,
            "noise_sigma": noise_sigma,
        },
    }


PRESETS: dict[str, dict] = {
    "synthetic-fig1": {
        "name": "synthetic-fig1",
        "horizon": 10_000,
        "num_seeds": 10,
        "oracle_samples": 1_000_000,
        "environment": {
            "kind": "synthetic",
            "num_arms": 4,
            "latent_dim": 4,
            "mu_star": list(FIG1_MU_STAR),
            "bias_scale": 3.0,
            "noise_sigma": 2.0,
        },
        "policies": [
            {"name": "fair_greedy", "variant": "fair_greedy", "lam": 0.1, "rho": 1.0},
            {"name": "oful", "variant": "oful", "lam": 0.1, "oful_alpha": 0.1},
            {"name": "uniform", "variant": "uniform"},
        ],
    },
    "census-gender": {
        "name": "census-gender",
        "horizon": 5_000,
        "num_seeds": 10,
        "oracle_samples": 5_000,
        "environment": _census_env("SEX", "fixed_group_per_arm", 2, 0, "target"),
        "policies": [
            {"name": "fair_greedy", "variant": "fair_greedy", "lam": 0.1},
            {"name": "oful", "variant": "oful", "lam": 0.1, "oful_alpha": 0.1},
            {"name": "greedy", "variant": "greedy", "lam": 0.1},
            {"name": "uniform", "variant": "uniform"},
            {"name": "oracle_cdf", "variant": "oracle_cdf", "lam": 0.1},
            {"name": "oracle_rewards", "variant": "oracle_rewards"},
        ],
    },
    "census-ethnicity": {
        "name": "census-ethnicity",
        "horizon": 5_000,
        "num_seeds": 10,
        "oracle_samples": 5_000,
        "environment": _census_env("RACE", "iid_pool", 10, 5_000, 0.2),
        "policies": [
            {"name": "fair_greedy_v2", "variant": "fair_greedy_v2", "lam": 0.1},
            {"name": "oful", "variant": "oful", "lam": 0.1, "oful_alpha": 0.01},
            {"name": "greedy", "variant": "greedy", "lam": 0.1},
            {"name": "uniform", "variant": "uniform"},
            {"name": "oracle_cdf", "variant": "oracle_cdf", "lam": 0.1},
            {"name": "oracle_rewards", "variant": "oracle_rewards"},
        ],
    },
    "tradeoff-appF": {
        "name": "tradeoff-appF",
        "horizon": 5_000,
        "num_seeds": 10,
        "oracle_samples": 1_000_000,
        "environment": {
            "kind": "synthetic",
            "num_arms": 2,
            "latent_dim": 1,
            "mu_star": list(TRADEOFF_MU_STAR),
            "bias_scale": 3.0,
            "noise_sigma": 1.0,
        },
        "policies": [
            {"name": "gmf_oracle", "variant": "gmf_oracle"},
            {"name": "optimal", "variant": "optimal"},
            {"name": "fair_greedy", "variant": "fair_greedy", "lam": 0.1},
        ],
    },
}


def preset_dict(name: str) -> dict:
    return copy.deepcopy(PRESETS[name])


def load_preset(name: str, **overrides) -> ExperimentConfig:
    d = preset_dict(name)
    d.update({k: v for k, v in overrides.items() if v is not None})
    base = data_dir() if d["environment"]["kind"] == "dataset" else "."
    return config_from_dict(d, base_dir=base)
