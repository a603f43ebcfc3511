"""Spike priors and per-block denoiser families.

Each prior is a distribution for a single spike coordinate; the Bayes
denoiser for a prior is the posterior mean of that coordinate observed
through the scalar Gaussian channel r = mu * x + sigma * Z.  Its derivative
is computed through the posterior-variance identity
f'(r) = (mu / sigma2) * Var[x | r], which is nonnegative by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .profiles import BlockPartition


class ChannelError(ValueError):
    """Raised for the degenerate channel mu = 0, sigma2 = 0."""


@dataclass(frozen=True)
class Gaussian:
    variance: float = 1.0

    def __post_init__(self):
        if self.variance <= 0:
            raise ValueError("variance must be positive")

    @property
    def second_moment(self) -> float:
        return self.variance

    @property
    def atoms(self):
        return None

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.normal(0.0, math.sqrt(self.variance), size=n)

    def _denoise(self, r: np.ndarray, mu: float, sigma2: float):
        k = self.variance * mu / (self.variance * mu**2 + sigma2)
        return k * r, np.full_like(r, k)


@dataclass(frozen=True)
class Rademacher:
    @property
    def second_moment(self) -> float:
        return 1.0

    @property
    def atoms(self):
        return np.array([-1.0, 1.0]), np.array([0.5, 0.5])

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.choice([-1.0, 1.0], size=n)

    def _denoise(self, r: np.ndarray, mu: float, sigma2: float):
        return kernels.rademacher_denoise(r, mu, sigma2)


@dataclass(frozen=True)
class SparseRademacher:
    """Value 0 with probability 1-rho, +-1/sqrt(rho) with probability rho/2 each.

    The atoms are scaled so the second moment is 1 for every rho, keeping the
    channel normalization fixed across sparsity sweeps.
    """

    rho: float

    def __post_init__(self):
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("rho must be in (0, 1]")

    @property
    def second_moment(self) -> float:
        return 1.0

    @property
    def atoms(self):
        s = 1.0 / math.sqrt(self.rho)
        return (
            np.array([-s, 0.0, s]),
            np.array([self.rho / 2, 1.0 - self.rho, self.rho / 2]),
        )

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        values, probs = self.atoms
        return rng.choice(values, size=n, p=probs)

    def _denoise(self, r: np.ndarray, mu: float, sigma2: float):
        return kernels.sparse_rademacher_denoise(r, mu, sigma2, self.rho)


Prior = Gaussian | Rademacher | SparseRademacher


def sample(prior: Prior, n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    return prior.sample(n, rng)


def _denoise_array(prior: Prior, r: np.ndarray, mu: float, sigma2: float):
    """(f(r), f'(r)) for the Bayes denoiser of `prior` on an array of inputs."""
    r = np.ascontiguousarray(r, dtype=np.float64)
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    if sigma2 == 0.0:
        if mu == 0.0:
            raise ChannelError("channel with mu=0, sigma2=0 is undefined")
        # Noiseless channel: exact inversion.
        return r / mu, np.full_like(r, 1.0 / mu)
    if mu == 0.0:
        # Posterior equals the (zero-mean) prior for every observation.
        return np.zeros_like(r), np.zeros_like(r)
    return prior._denoise(r, mu, sigma2)


def posterior_mean(prior: Prior, r: float, mu: float, sigma2: float) -> float:
    f, _ = _denoise_array(prior, np.array([r]), mu, sigma2)
    return float(f[0])


def posterior_mean_derivative(prior: Prior, r: float, mu: float, sigma2: float) -> float:
    _, fp = _denoise_array(prior, np.array([r]), mu, sigma2)
    return float(fp[0])


@dataclass(frozen=True)
class BayesOptimal:
    prior: Prior

    def denoise_block(self, r: np.ndarray, mu: float, sigma2: float):
        return _denoise_array(self.prior, r, mu, sigma2)


@dataclass(frozen=True)
class Identity:
    def denoise_block(self, r: np.ndarray, mu: float, sigma2: float):
        return r, np.ones_like(r)


DenoiserFamily = BayesOptimal | Identity


def apply_denoiser(
    family: DenoiserFamily,
    params,
    partition: BlockPartition,
    x: np.ndarray,
):
    """Apply the per-block denoisers to an N-vector.

    `params` is a sequence of q (mu_a, sigma2_a) pairs; coordinate i uses the
    parameters of its block g(i).  Returns (f(x), f'(x)).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (partition.n,):
        raise ValueError("x has wrong length")
    if len(params) != partition.q:
        raise ValueError(f"expected {partition.q} parameter pairs, got {len(params)}")
    f = np.empty_like(x)
    fp = np.empty_like(x)
    for a, sl in enumerate(partition.block_slices()):
        mu_a, sigma2_a = params[a]
        f[sl], fp[sl] = family.denoise_block(np.ascontiguousarray(x[sl]), mu_a, sigma2_a)
    return f, fp
