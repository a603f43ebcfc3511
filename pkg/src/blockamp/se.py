"""State evolution: the deterministic q-dimensional recursion tracking AMP.

Per block b the recursion reads

    mu^{t+1}_b     = sum_a (c_a / delta_small[a, b]) * E[x f^a(mu_a x + sigma_a Z)]
    sigma2^{t+1}_b = sum_a (c_a / delta_small[a, b]) * E[f^a(mu_a x + sigma_a Z)^2]

with x drawn from the prior and Z standard normal, independent.  With
Bayes-optimal denoisers the two right-hand sides coincide (Nishimori), so
mu^t == sigma2^t for t >= 1 and the fixed points solve the single equation
with sigma = sqrt(mu).

Expectations use Gauss-Hermite quadrature for Gaussian factors and exact
atom sums for discrete priors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .priors import BayesOptimal, DenoiserFamily, Gaussian, Identity, Prior
from .profiles import VarianceProfile


@dataclass(frozen=True)
class SeState:
    mu: np.ndarray
    sigma2: np.ndarray

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=np.float64))
        sigma2 = np.atleast_1d(np.asarray(self.sigma2, dtype=np.float64))
        if mu.shape != sigma2.shape:
            raise ValueError("mu and sigma2 must have the same length")
        if np.any(sigma2 < 0):
            raise ValueError("sigma2 entries must be nonnegative")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma2", sigma2)

    @property
    def q(self) -> int:
        return self.mu.size

    def params(self) -> list[tuple[float, float]]:
        return [(float(m), float(s)) for m, s in zip(self.mu, self.sigma2)]


@dataclass(frozen=True)
class QuadratureSpec:
    gh_nodes: int = 61

    def __post_init__(self):
        if self.gh_nodes < 1:
            raise ValueError("gh_nodes must be >= 1")


@lru_cache(maxsize=32)
def _gh_rule(k: int):
    # Nodes/weights for E[h(Z)], Z ~ N(0,1): change of variables z = sqrt(2) t.
    t, w = np.polynomial.hermite.hermgauss(k)
    return np.sqrt(2.0) * t, w / math.sqrt(math.pi)


def channel_moments(
    prior: Prior, mu: float, sigma2: float, quad: QuadratureSpec,
    spike_scale: float = 1.0,
) -> tuple[float, float]:
    """(E[x f(mu x + sigma Z)], E[f(mu x + sigma Z)^2]) for the Bayes denoiser.

    The denoiser parameters match the channel parameters, as everywhere in
    the state evolution.  `spike_scale` multiplies the signal x in the channel
    (denoiser unchanged); it lets the recursion co-evolved with a finite-N run
    account for the realized spike second moment, whose deviation from the
    prior moment otherwise compounds through the marginally stable fixed
    point.  The asymptotic recursion uses the default 1.
    """
    family = BayesOptimal(prior)
    gamma = prior.second_moment * spike_scale**2
    if mu == 0.0 and sigma2 == 0.0:
        # Uninformative fixed point: the denoiser output is identically 0.
        return 0.0, 0.0
    if sigma2 == 0.0:
        # Noiseless channel: f inverts exactly, both moments hit the spike
        # second moment.
        return gamma, gamma
    atoms = prior.atoms
    z, wz = _gh_rule(quad.gh_nodes)
    sigma = math.sqrt(sigma2)
    if atoms is not None:
        xs, px = atoms
    else:
        assert isinstance(prior, Gaussian)
        xq, wq = _gh_rule(quad.gh_nodes)
        xs, px = math.sqrt(prior.variance) * xq, wq
    xs = spike_scale * xs
    r = mu * xs[:, None] + sigma * z[None, :]
    f, _ = family.denoise_block(np.ascontiguousarray(r.ravel()), mu, sigma2)
    f = f.reshape(r.shape)
    ex_f = float(px @ (xs * (f @ wz)))
    e_f2 = float(px @ ((f * f) @ wz))
    if not (math.isfinite(ex_f) and math.isfinite(e_f2)):
        raise FloatingPointError("non-finite quadrature result")
    return ex_f, e_f2


def se_step(
    family: DenoiserFamily,
    profile: VarianceProfile,
    fractions,
    state: SeState,
    quad: QuadratureSpec,
    spike_scale=None,
) -> SeState:
    c = np.asarray(fractions, dtype=np.float64)
    if state.q != profile.q or c.size != profile.q:
        raise ValueError("state, profile and fractions disagree on q")
    scales = np.ones(profile.q) if spike_scale is None else np.asarray(spike_scale, dtype=np.float64)
    weights = c[:, None] * profile.inv  # weights[a, b] = c_a / delta_small[a, b]
    if isinstance(family, Identity):
        # Closed form for unit-second-moment priors (the normalization the
        # linear analysis assumes): E[x f] = mu_a, E[f^2] = mu_a^2 + sigma2_a.
        ex_f = scales**2 * state.mu
        e_f2 = (scales * state.mu) ** 2 + state.sigma2
    else:
        moments = [
            channel_moments(family.prior, float(m), float(s), quad, spike_scale=float(sc))
            for m, s, sc in zip(state.mu, state.sigma2, scales)
        ]
        ex_f = np.array([m[0] for m in moments])
        e_f2 = np.array([m[1] for m in moments])
    return SeState(mu=ex_f @ weights, sigma2=e_f2 @ weights)


def run_se(
    family: DenoiserFamily,
    profile: VarianceProfile,
    fractions,
    init: SeState,
    quad: QuadratureSpec,
    t_max: int = 200,
    tol: float = 0.0,
) -> list[SeState]:
    """Iterate se_step from `init`; returns the trajectory including the start."""
    traj = [init]
    for _ in range(t_max):
        nxt = se_step(family, profile, fractions, traj[-1], quad)
        traj.append(nxt)
        if tol > 0 and np.max(np.abs(nxt.mu - traj[-2].mu)) < tol:
            break
    return traj


@dataclass(frozen=True)
class FixedPoint:
    mu: np.ndarray
    converged: bool
    residual: float
    iters: int
    init_mode: str


def _bayes_map(prior, profile, fractions, mu, quad):
    state = SeState(mu=mu, sigma2=mu)
    return se_step(BayesOptimal(prior), profile, fractions, state, quad).mu


def bayes_fixed_point(
    prior: Prior,
    profile: VarianceProfile,
    fractions,
    quad: QuadratureSpec,
    init_mode: str = "uninformed",
    eps: float = 1e-6,
    t_max: int = 20000,
    tol: float = 1e-12,
) -> FixedPoint:
    """Fixed point of the Bayes state evolution with sigma2 slaved to mu.

    `uninformed` starts at eps * ones (eps probes the stability of the
    always-present zero fixed point); `informed` starts at the prior second
    moment, the perfect-overlap end.
    """
    q = profile.q
    if init_mode == "uninformed":
        mu = np.full(q, eps)
    elif init_mode == "informed":
        mu = np.full(q, prior.second_moment)
    else:
        raise ValueError(f"unknown init_mode {init_mode!r}")
    converged = False
    iters = 0
    for iters in range(1, t_max + 1):
        nxt = _bayes_map(prior, profile, fractions, mu, quad)
        delta = float(np.max(np.abs(nxt - mu)))
        mu = nxt
        if delta < tol:
            converged = True
            break
    residual = float(np.max(np.abs(_bayes_map(prior, profile, fractions, mu, quad) - mu)))
    return FixedPoint(mu=mu, converged=converged, residual=residual, iters=iters, init_mode=init_mode)


def linear_threshold(profile: VarianceProfile, fractions, gamma2: float = 1.0) -> float:
    """Spectral radius of the identity-denoiser overlap map, scaled by gamma2^2.

    Computed from the (nonsymmetric) map mu_b <- sum_a (c_a/delta_small[a,b]) mu_a,
    which is similar to the symmetric matrix used by `profiles.snr`; the two
    agree to machine precision.
    """
    c = np.asarray(fractions, dtype=np.float64)
    k = profile.inv * c[None, :]  # k[b, a] = c_a / delta_small[b, a]
    eigvals = np.linalg.eigvals(k)
    return float(gamma2**2 * np.max(np.abs(eigvals)))


def estimate_overlaps(prior: Prior, mu, quad: QuadratureSpec) -> np.ndarray:
    """Per-block estimate overlap E[x f_a(mu_a x + sqrt(mu_a) Z)] at a Bayes
    fixed point (sigma2 slaved to mu).  This is the quantity entering the
    matrix MSE; the recursion variable mu itself is a regression coefficient
    and can exceed the prior second moment."""
    mu = np.atleast_1d(np.asarray(mu, dtype=np.float64))
    return np.array([channel_moments(prior, float(m), float(m), quad)[0] for m in mu])


def se_matrix_mse(mu, fractions, gamma: float = 1.0) -> float:
    """Rank-1 matrix MSE predicted from per-block estimate overlaps.

    `mu` must be the estimate overlaps E[x_hat x] per block (see
    estimate_overlaps), not the raw recursion variable.  With gamma the prior
    second moment, MSE = gamma^2 - (sum_a c_a mu_a)^2.
    """
    c = np.asarray(fractions, dtype=np.float64)
    m = float(c @ np.asarray(mu, dtype=np.float64))
    return gamma**2 - m * m
