"""Fair linear contextual bandits ranked within groups, with a seeded simulation harness."""

from fairbandits.errors import ConfigError, ContractError

__version__ = "0.1.0"

__all__ = ["ConfigError", "ContractError", "__version__"]
