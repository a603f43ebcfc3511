"""The inhomogeneous AMP iteration and its matrix-AMP embedding oracle.

One step:

    x^{t+1} = ((1 / (sqrt(N) Delta)) (.) Y) f_t(x^t) - b_t (.) f_{t-1}(x^{t-1})
    b_t     = (1 / (N Delta)) f_t'(x^t)

where the Hadamard products with the expanded profile are computed through
the block structure (never materializing Delta).  Denoiser parameters for the
Bayes family come from a state-evolution recursion co-evolved with the run,
started from the measured overlap/variance of the initialization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels, se as se_mod, spectral
from .model import SpikedInstance, instance_rngs
from .priors import BayesOptimal, DenoiserFamily, Identity, apply_denoiser
from .profiles import BlockPartition, contiguous_starts
from .se import QuadratureSpec, SeState


class AmpDivergence(RuntimeError):
    pass


@dataclass(frozen=True)
class AmpState:
    t: int
    x_curr: np.ndarray
    x_prev: np.ndarray
    f_prev: np.ndarray
    onsager: np.ndarray


@dataclass(frozen=True)
class AmpConfig:
    max_iters: int = 200
    tol: float = 1e-7
    init_kind: str = "noise"  # "noise" | "spectral" | "informed"
    init_eps: float = 1e-3
    record_trajectory: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol < 0 or self.init_eps < 0:
            raise ValueError("tol and init_eps must be nonnegative")
        if self.init_kind not in ("noise", "spectral", "informed"):
            raise ValueError(f"unknown init kind {self.init_kind!r}")


def initial_state(x0: np.ndarray) -> AmpState:
    zeros = np.zeros_like(x0)
    return AmpState(t=0, x_curr=x0, x_prev=zeros, f_prev=zeros, onsager=zeros)


def amp_step(
    instance: SpikedInstance,
    family: DenoiserFamily,
    se_params,
    state: AmpState,
) -> AmpState:
    partition = instance.partition
    n = partition.n
    starts = contiguous_starts(partition.assignment, partition.q)
    inv_delta = instance.profile.inv
    f, fp = apply_denoiser(family, se_params, partition, state.x_curr)
    # Onsager vector: constant per block b, equal to (1/N) sum_a fp-sum(a) / delta[b, a].
    fp_sums = kernels.block_sums(fp, starts)
    b_block = (inv_delta @ fp_sums) / n
    b_vec = b_block[partition.assignment]
    mv = kernels.scaled_block_matvec(instance.observed, f, starts, inv_delta) / np.sqrt(n)
    x_next = mv - b_vec * state.f_prev
    if not np.all(np.isfinite(x_next)):
        raise AmpDivergence(f"non-finite iterate at t={state.t + 1}")
    return AmpState(t=state.t + 1, x_curr=x_next, x_prev=state.x_curr, f_prev=f, onsager=b_vec)


def block_overlap(x_hat, spike, partition: BlockPartition, gamma: float = 1.0) -> np.ndarray:
    """Per-block overlap (1 / (gamma |C_a|)) sum_{i in C_a} x_hat_i spike_i."""
    x_hat = np.asarray(x_hat, dtype=np.float64)
    spike = np.asarray(spike, dtype=np.float64)
    if x_hat.shape != spike.shape or x_hat.shape != (partition.n,):
        raise ValueError("length mismatch")
    prod = x_hat * spike
    sums = np.array([prod[partition.assignment == a].sum() for a in range(partition.q)])
    return sums / (gamma * partition.counts)


def block_second_moment(x, partition: BlockPartition) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.array(
        [np.mean(x[partition.assignment == a] ** 2) for a in range(partition.q)]
    )


def matrix_mse(x_hat, spike) -> float:
    """(1/N^2) ||spike spike^T - x_hat x_hat^T||_F^2 without the outer products."""
    x_hat = np.asarray(x_hat, dtype=np.float64)
    spike = np.asarray(spike, dtype=np.float64)
    if x_hat.shape != spike.shape:
        raise ValueError("length mismatch")
    n = spike.size
    g_star = spike @ spike / n
    g_hat = x_hat @ x_hat / n
    o = x_hat @ spike / n
    return float(g_star**2 + g_hat**2 - 2.0 * o**2)


def spectral_init(instance: SpikedInstance, gamma2: float = 1.0) -> np.ndarray:
    """Top eigenvector of the transformed matrix, scaled so ||x0||^2 = gamma2 * N."""
    y_tilde = spectral.transform(instance, gamma2)
    _, vec, _, _ = spectral.top_eigenpair(y_tilde)
    return vec * np.sqrt(gamma2 * instance.n)


def make_init(instance: SpikedInstance, config: AmpConfig, gamma2: float) -> np.ndarray:
    rng = instance_rngs(instance.seed)[2]
    n = instance.n
    if config.init_kind == "spectral":
        return spectral_init(instance, gamma2)
    noise = rng.normal(size=n)
    if config.init_kind == "noise":
        return config.init_eps * noise
    eps = config.init_eps
    return eps * instance.spike + np.sqrt(max(1.0 - eps**2, 0.0)) * noise


@dataclass
class AmpRun:
    ts: np.ndarray
    mu_hat: np.ndarray          # (T, q) overlap of the denoised estimate f_t(x^t)
    iterate_mu: np.ndarray      # (T, q) overlap of the raw iterate x^t
    sigma2_hat: np.ndarray      # (T, q) empirical variance of x^t - iterate_mu * spike
    mse: np.ndarray             # (T,) matrix MSE of the denoised estimate
    delta_norm: np.ndarray      # (T,) ||x^{t+1} - x^t|| / sqrt(N) for the step taken at t
    converged: bool
    iters: int
    se_trajectory: list[SeState]
    x_final: np.ndarray
    estimate: np.ndarray
    trajectory: list[np.ndarray] = field(default_factory=list)


def run_amp(
    instance: SpikedInstance,
    family: DenoiserFamily,
    config: AmpConfig,
    quad: QuadratureSpec | None = None,
    se_schedule: list[SeState] | None = None,
    gamma2: float | None = None,
) -> AmpRun:
    """Run AMP until the iterate movement drops below config.tol.

    For the Bayes family the per-step denoiser parameters are taken from a
    state-evolution recursion seeded with the measured per-block overlap and
    residual variance of the initialization (or from an explicit
    `se_schedule`).  The identity family needs no parameters.
    """
    quad = quad or QuadratureSpec()
    partition, profile = instance.partition, instance.profile
    if gamma2 is None:
        gamma2 = family.prior.second_moment if isinstance(family, BayesOptimal) else 1.0
    x0 = make_init(instance, config, gamma2)

    mu0 = block_overlap(x0, instance.spike, partition, gamma2)
    resid0 = x0 - mu0[partition.assignment] * instance.spike
    sigma2_0 = block_second_moment(resid0, partition)
    se_state = SeState(mu=mu0, sigma2=sigma2_0)
    se_traj = [se_state]
    # Realized per-block spike second moment, fed to the co-evolved recursion
    # as a channel scale.  Without it the O(N^{-1/2}) moment fluctuation
    # compounds geometrically through the marginally stable fixed point of
    # the Bayes map and tracking degrades with t.
    spike_scale = np.sqrt(block_second_moment(instance.spike, partition) / gamma2)

    def params_at(t):
        if se_schedule is not None:
            return se_schedule[t].params()
        if isinstance(family, Identity):
            return [(0.0, 1.0)] * partition.q
        return se_traj[t].params()

    def advance_se(t):
        if se_schedule is not None or isinstance(family, Identity):
            return
        if len(se_traj) <= t + 1:
            se_traj.append(se_mod.se_step(family, profile, partition.fractions,
                                          se_traj[t], quad, spike_scale=spike_scale))

    state = initial_state(x0)
    rows_mu, rows_imu, rows_s2, rows_mse, rows_dn, ts = [], [], [], [], [], []
    trajectory = [x0.copy()] if config.record_trajectory else []
    converged = False
    estimate = x0
    for t in range(config.max_iters):
        params = params_at(t)
        f_t, _ = apply_denoiser(family, params, partition, state.x_curr)
        estimate = f_t
        imu = block_overlap(state.x_curr, instance.spike, partition, gamma2)
        rows_imu.append(imu)
        rows_mu.append(block_overlap(f_t, instance.spike, partition, gamma2))
        resid = state.x_curr - imu[partition.assignment] * instance.spike
        rows_s2.append(block_second_moment(resid, partition))
        rows_mse.append(matrix_mse(f_t, instance.spike))
        ts.append(t)

        advance_se(t)
        state = amp_step(instance, family, params, state)
        if config.record_trajectory:
            trajectory.append(state.x_curr.copy())
        dn = float(np.linalg.norm(state.x_curr - state.x_prev) / np.sqrt(partition.n))
        rows_dn.append(dn)
        if dn < config.tol:
            converged = True
            break

    return AmpRun(
        ts=np.array(ts),
        mu_hat=np.array(rows_mu),
        iterate_mu=np.array(rows_imu),
        sigma2_hat=np.array(rows_s2),
        mse=np.array(rows_mse),
        delta_norm=np.array(rows_dn),
        converged=converged,
        iters=state.t,
        se_trajectory=se_traj,
        x_final=state.x_curr,
        estimate=estimate,
        trajectory=trajectory,
    )


# ---------------------------------------------------------------------------
# Matrix-AMP embedding oracle
# ---------------------------------------------------------------------------

def blockdiag(x, partition: BlockPartition) -> np.ndarray:
    """Embed an N-vector as an N x q matrix with entry x_i in column g(i)."""
    out = np.zeros((partition.n, partition.q))
    out[np.arange(partition.n), partition.assignment] = np.asarray(x, dtype=np.float64)
    return out


def blockproj(m: np.ndarray, partition: BlockPartition) -> np.ndarray:
    """Extract (m[i, g(i)])_i, the left inverse of blockdiag."""
    return m[np.arange(partition.n), partition.assignment]


def matrix_amp_oracle(
    noise: np.ndarray,
    profile,
    partition: BlockPartition,
    family: DenoiserFamily,
    se_schedule,
    r0: np.ndarray,
    t_max: int,
) -> list[np.ndarray]:
    """Reference trajectory of the q-column matrix AMP the scalar iteration embeds in.

    `noise` is the symmetric data matrix of the matrix AMP; to compare against
    `amp_step` on an instance, pass the observed matrix divided entrywise by
    the Hadamard square root of the expanded profile.  `se_schedule` supplies
    the per-step denoiser parameters (ignored by the identity family).
    Returns [r^0, ..., r^{t_max}].
    """
    n, q = partition.n, partition.q
    g = partition.assignment
    root_delta = np.sqrt(profile.delta_small)
    traj = [np.asarray(r0, dtype=np.float64).copy()]
    ftilde_prev = np.zeros((n, q))
    for t in range(t_max):
        x_t = blockproj(traj[-1], partition)
        params = se_schedule[t].params() if not isinstance(family, Identity) else [(0.0, 1.0)] * q
        f_vec, fp_vec = apply_denoiser(family, params, partition, x_t)
        ftilde = f_vec[:, None] / root_delta[g, :]
        fp_sums = np.array([fp_vec[g == a].sum() for a in range(q)])
        onsager = fp_sums[None, :] / (n * root_delta)  # B[k, a]
        r_next = (noise @ ftilde) / np.sqrt(n) - ftilde_prev @ onsager.T
        traj.append(r_next)
        ftilde_prev = ftilde
    return traj
