"""Group-structured synthetic environment.

Arm ``a`` (1-indexed) produces contexts whose ``a``-th block of ``latent_dim``
coordinates holds i.i.d. uniform [0, 1] draws, whose last coordinate is the
group bias ``bias_scale * a``, and which are zero elsewhere.  The reward model
weights each block differently, so every arm has its own reward distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fairbandits.ecdf import project
from fairbandits.environments.base import EnvStreams, RewardDraw, RoundContexts
from fairbandits.errors import ConfigError, ContractError

# Reward model of the four-group simulation: one 4-coordinate slice per group, then the bias weight.
FIG1_MU_STAR = (4.0, 3.0, 7.0, 0.0, 8.0, 0.0, 0.0, 0.0, 5.0, 5.0, 0.0, 0.0, 2.0, 2.0, 2.0, 2.0, 1.0)

# Two arms with disjoint reward supports: arm 1 rewards lie in [-3, -2], arm 2 in [-6, -4].
TRADEOFF_MU_STAR = (1.0, 2.0, -1.0)


@dataclass(frozen=True)
class SyntheticSpec:
    num_arms: int = 4
    mu_star: tuple = FIG1_MU_STAR
    latent_dim: int = 4
    bias_scale: float = 3.0
    noise_sigma: float = 2.0

    def __post_init__(self):
        if self.num_arms < 1 or self.latent_dim < 1:
            raise ConfigError("num_arms and latent_dim must be positive")
        if len(self.mu_star) != self.dim:
            raise ConfigError(
                f"mu_star has length {len(self.mu_star)}, expected num_arms*latent_dim+1 = {self.dim}"
            )
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be non-negative")

    @property
    def dim(self) -> int:
        return self.num_arms * self.latent_dim + 1

    def norm_bound(self) -> float:
        return float(np.sqrt(self.latent_dim + (self.bias_scale * self.num_arms) ** 2))


def embed(spec: SyntheticSpec, arm: int, latent: np.ndarray) -> np.ndarray:
    """Place (n, latent_dim) latent draws of 0-indexed ``arm`` into ambient contexts."""
    latent = np.atleast_2d(latent)
    out = np.zeros((latent.shape[0], spec.dim))
    lo = arm * spec.latent_dim
    out[:, lo:lo + spec.latent_dim] = latent
    out[:, -1] = spec.bias_scale * (arm + 1)
    return out


def synthetic_round(spec: SyntheticSpec, rng, round_index: int = 1) -> tuple[RoundContexts, RewardDraw]:
    """Draw one round: one context per arm plus the round's reward noise."""
    streams = EnvStreams.coerce(rng, spec.num_arms)
    contexts = np.zeros((spec.num_arms, spec.dim))
    for a in range(spec.num_arms):
        latent = streams.arms[a].random(spec.latent_dim)
        lo = a * spec.latent_dim
        contexts[a, lo:lo + spec.latent_dim] = latent
        contexts[a, -1] = spec.bias_scale * (a + 1)
    noise = spec.noise_sigma * streams.noise.standard_normal()
    true_rewards = project(contexts, np.asarray(spec.mu_star))
    rc = RoundContexts(round=round_index, contexts=contexts, groups=np.arange(spec.num_arms))
    return rc, RewardDraw(true_rewards, noise)


class SyntheticEnvironment:
    """Synthetic environment where group and arm coincide."""

    def __init__(self, spec: SyntheticSpec):
        self.spec = spec
        self.mu_star = np.asarray(spec.mu_star, dtype=np.float64)

    @property
    def num_arms(self) -> int:
        return self.spec.num_arms

    @property
    def num_groups(self) -> int:
        return self.spec.num_arms

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def fixed_groups(self) -> bool:
        return True

    def make_streams(self, seed) -> EnvStreams:
        return EnvStreams.from_seed(seed, self.num_arms)

    def round(self, t: int, streams: EnvStreams) -> tuple[RoundContexts, RewardDraw]:
        return synthetic_round(self.spec, streams, round_index=t)

    def sample_group(self, group: int, n: int, rng: np.random.Generator) -> np.ndarray:
        if not 0 <= group < self.num_groups:
            raise ContractError(f"group {group} out of range")
        return embed(self.spec, group, rng.random((n, self.spec.latent_dim)))
