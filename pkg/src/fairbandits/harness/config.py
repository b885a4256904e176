"""Experiment configuration: YAML files or built-in presets, validated up front."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from fairbandits.environments.dataset import MODES, DatasetSchema
from fairbandits.environments.synthetic import SyntheticSpec
from fairbandits.errors import ConfigError
from fairbandits.policies import PolicyConfig


@dataclass(frozen=True)
class NamedPolicy:
    name: str
    config: PolicyConfig


@dataclass(frozen=True)
class SyntheticEnvConfig:
    spec: SyntheticSpec
    kind: str = "synthetic"


@dataclass(frozen=True)
class DatasetEnvConfig:
    mode: str
    num_arms: int
    bundle: str | None = None
    reference: str | None = None
    sampling: str | None = None
    schema: DatasetSchema | None = None
    kind: str = "dataset"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown dataset mode {self.mode!r}; expected one of {MODES}")
        if self.num_arms < 1:
            raise ConfigError("num_arms must be positive")
        raw = self.reference is not None or self.sampling is not None
        if self.bundle is None and not raw:
            raise ConfigError("dataset environment needs either 'bundle' or 'reference' + 'sampling'")
        if self.bundle is not None and raw:
            raise ConfigError("give either 'bundle' or 'reference' + 'sampling', not both")
        if raw and (self.reference is None or self.sampling is None or self.schema is None):
            raise ConfigError("raw dataset input needs 'reference', 'sampling' and 'schema'")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    environment: SyntheticEnvConfig | DatasetEnvConfig
    policies: tuple = ()
    horizon: int = 10_000
    num_seeds: int = 10
    base_seed: int = 0
    oracle_samples: int = 1_000_000
    record_stride: int = 10
    output_dir: str | None = None
    workers: int = 1
    base_dir: str = field(default=".", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "policies", tuple(self.policies))
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.num_seeds < 1:
            raise ConfigError("num_seeds must be >= 1")
        if self.oracle_samples < 1:
            raise ConfigError("oracle_samples must be >= 1")
        if self.record_stride < 1:
            raise ConfigError("record_stride must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        names = [p.name for p in self.policies]
        dup = sorted({n for n in names if names.count(n) > 1})
        if dup:
            raise ConfigError(f"duplicate policy names: {dup}")
        for n in names:
            if not n or any(c in n for c in "/\\\0") or n.startswith("."):
                raise ConfigError(f"policy name {n!r} is not usable as a file name")

    def resolve(self, path: str | None) -> Path | None:
        if path is None:
            return None
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def to_dict(self) -> dict:
        """Config echo for the manifest; the worker count is left out so it cannot change output bytes."""
        env = self.environment
        if isinstance(env, SyntheticEnvConfig):
            env_d = {"kind": "synthetic", **asdict(env.spec)}
            env_d["mu_star"] = list(env_d["mu_star"])
        else:
            env_d = {"kind": "dataset", "mode": env.mode, "num_arms": env.num_arms}
            for key in ("bundle", "reference", "sampling"):
                if getattr(env, key) is not None:
                    env_d[key] = getattr(env, key)
            if env.schema is not None:
                schema = asdict(env.schema)
                schema["feature_columns"] = list(schema["feature_columns"])
                schema["categorical_columns"] = list(schema["categorical_columns"])
                env_d["schema"] = schema
        return {
            "name": self.name,
            "horizon": self.horizon,
            "num_seeds": self.num_seeds,
            "base_seed": self.base_seed,
            "oracle_samples": self.oracle_samples,
            "record_stride": self.record_stride,
            "environment": env_d,
            "policies": [{"name": p.name, **asdict(p.config)} for p in self.policies],
        }


_TOP_KEYS = {
    "name", "environment", "policies", "horizon", "num_seeds", "base_seed",
    "oracle_samples", "record_stride", "output_dir", "workers",
}


def _env_from_dict(d: dict) -> SyntheticEnvConfig | DatasetEnvConfig:
    if not isinstance(d, dict):
        raise ConfigError("'environment' must be a mapping")
    d = dict(d)
    kind = d.pop("kind", None)
    if kind == "synthetic":
        if "mu_star" in d:
            d["mu_star"] = tuple(float(v) for v in d["mu_star"])
        try:
            return SyntheticEnvConfig(spec=SyntheticSpec(**d))
        except TypeError as exc:
            raise ConfigError(f"bad synthetic environment: {exc}") from None
    if kind == "dataset":
        schema = d.pop("schema", None)
        if schema is not None:
            schema = DatasetSchema.from_dict(schema)
        try:
            return DatasetEnvConfig(schema=schema, **d)
        except TypeError as exc:
            raise ConfigError(f"bad dataset environment: {exc}") from None
    raise ConfigError(f"environment kind must be 'synthetic' or 'dataset', got {kind!r}")


def _policy_from_dict(d: dict) -> NamedPolicy:
    if not isinstance(d, dict) or "variant" not in d:
        raise ConfigError(f"each policy needs at least a 'variant': {d!r}")
    d = dict(d)
    name = str(d.pop("name", d["variant"]))
    if "lambda" in d:
        d["lam"] = d.pop("lambda")
    try:
        return NamedPolicy(name=name, config=PolicyConfig(**d))
    except TypeError as exc:
        raise ConfigError(f"bad policy {name!r}: {exc}") from None


def config_from_dict(d: dict, base_dir: str = ".") -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError("configuration must be a mapping")
    extra = set(d) - _TOP_KEYS
    if extra:
        raise ConfigError(f"unknown configuration keys: {sorted(extra)}")
    if "environment" not in d:
        raise ConfigError("configuration needs an 'environment' section")
    kwargs = {k: d[k] for k in _TOP_KEYS - {"environment", "policies"} if k in d}
    for key in ("horizon", "num_seeds", "base_seed", "oracle_samples", "record_stride", "workers"):
        if key in kwargs:
            value = kwargs[key]
            if isinstance(value, str):
                # YAML 1.1 reads "1e6" as a string
                try:
                    value = float(value)
                except ValueError:
                    raise ConfigError(f"{key} must be an integer, got {value!r}") from None
            if isinstance(value, float) and value.is_integer():
                value = int(value)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{key} must be an integer, got {value!r}")
            kwargs[key] = value
    kwargs.setdefault("name", "experiment")
    return ExperimentConfig(
        environment=_env_from_dict(d["environment"]),
        policies=tuple(_policy_from_dict(p) for p in d.get("policies") or ()),
        base_dir=base_dir,
        **kwargs,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from None
    return config_from_dict(data, base_dir=str(path.parent))
