"""Ridge regression with an incrementally maintained inverse Gram matrix.

The Gram matrix ``V = X^T X + lambda I`` and its inverse are updated one sample
at a time with the Sherman-Morrison formula.  Rank-one updates accumulate
rounding error, so the inverse is rebuilt from a Cholesky factorisation every
``refactor_every`` absorbs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from fairbandits.errors import ConfigError, ContractError

DEFAULT_REFACTOR_EVERY = 512


@dataclass
class RidgeState:
    dim: int
    lam: float
    gram: np.ndarray
    gram_inv: np.ndarray
    response: np.ndarray
    count: int = 0
    refactor_every: int = DEFAULT_REFACTOR_EVERY

    def solution(self) -> np.ndarray:
        """Unperturbed ridge estimate ``V^{-1} b``."""
        return self.gram_inv @ self.response

    def mahalanobis(self, contexts: np.ndarray) -> np.ndarray:
        """Row-wise ``sqrt(x^T V^{-1} x)`` for a (n, d) array."""
        quad = np.einsum("ij,jk,ik->i", contexts, self.gram_inv, contexts)
        return np.sqrt(np.maximum(quad, 0.0))

    def refactor(self) -> None:
        chol = scipy.linalg.cho_factor(self.gram, lower=True)
        self.gram_inv = scipy.linalg.cho_solve(chol, np.eye(self.dim))
        self.gram_inv = 0.5 * (self.gram_inv + self.gram_inv.T)


def ridge_new(dim: int, lam: float, refactor_every: int = DEFAULT_REFACTOR_EVERY) -> RidgeState:
    if int(dim) != dim or dim < 1:
        raise ConfigError(f"ridge dimension must be a positive integer, got {dim!r}")
    if not lam > 0:
        raise ConfigError(f"ridge regularization must be > 0, got {lam!r}")
    if refactor_every < 1:
        raise ConfigError(f"refactor_every must be >= 1, got {refactor_every!r}")
    dim = int(dim)
    lam = float(lam)
    return RidgeState(
        dim=dim,
        lam=lam,
        gram=lam * np.eye(dim),
        gram_inv=np.eye(dim) / lam,
        response=np.zeros(dim),
        refactor_every=int(refactor_every),
    )


def ridge_absorb(state: RidgeState, x, r: float) -> RidgeState:
    """Add one (context, reward) pair to ``state`` in place and return it."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (state.dim,):
        raise ContractError(f"context has shape {x.shape}, expected ({state.dim},)")
    state.gram += np.outer(x, x)
    state.response += float(r) * x
    state.count += 1
    if state.count % state.refactor_every == 0:
        state.refactor()
    else:
        vx = state.gram_inv @ x
        denom = 1.0 + x @ vx
        state.gram_inv -= np.outer(vx, vx) / denom
    return state


@dataclass(frozen=True)
class PerturbedEstimate:
    mu: np.ndarray
    base: np.ndarray
    noise_scale: float


def perturbed_estimate(state: RidgeState, t_tilde: int, rho: float, rng: np.random.Generator) -> PerturbedEstimate:
    """Ridge estimate plus isotropic Gaussian noise of scale ``rho / (d sqrt(t_tilde))``.

    With ``t_tilde == 0`` there is no data yet and the estimate is the zero
    vector; no random numbers are consumed in that case.
    """
    if not 0.0 < rho <= 1.0:
        raise ConfigError(f"rho must lie in (0, 1], got {rho!r}")
    if t_tilde < 0:
        raise ContractError(f"t_tilde must be non-negative, got {t_tilde}")
    if t_tilde == 0:
        zero = np.zeros(state.dim)
        return PerturbedEstimate(mu=zero, base=zero.copy(), noise_scale=0.0)
    base = state.solution()
    scale = rho / (state.dim * np.sqrt(t_tilde))
    mu = base + scale * rng.standard_normal(state.dim)
    return PerturbedEstimate(mu=mu, base=base, noise_scale=float(scale))
