"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid user-supplied configuration (bad hyperparameter, missing data, ...)."""


class ContractError(RuntimeError):
    """A caller broke an API precondition (shape mismatch, out-of-order round, ...)."""
