"""Instance generation for the spiked model with a block variance profile.

Observed matrix: Y = x* x*^T / sqrt(N) + A (.) sqrt(Delta), where A is a GOE
matrix (A = G + G^T, G iid N(0, 1/2)) and the Hadamard square root of the
expanded profile is applied blockwise without materializing Delta.

Randomness: the instance seed feeds a numpy SeedSequence whose first two
spawned children drive the spike and the noise (PCG64 streams), so the two
substreams are independent and regeneration is bit-for-bit reproducible.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .priors import Prior, sample
from .profiles import BlockPartition, ProfileError, VarianceProfile


@dataclass(frozen=True)
class SpikedInstance:
    partition: BlockPartition
    profile: VarianceProfile
    spike: np.ndarray
    observed: np.ndarray
    seed: int

    @property
    def n(self) -> int:
        return self.partition.n

    def __post_init__(self):
        self.spike.setflags(write=False)
        self.observed.setflags(write=False)


def instance_rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """(spike, noise, init) generator substreams for one instance seed."""
    children = np.random.SeedSequence(seed).spawn(3)
    return tuple(np.random.default_rng(s) for s in children)


def sample_goe(n: int, rng: np.random.Generator) -> np.ndarray:
    """A = G + G^T with G iid N(0, 1/2): off-diagonal variance 1, diagonal 2."""
    if n < 1:
        raise ValueError("n must be >= 1")
    g = rng.normal(0.0, np.sqrt(0.5), size=(n, n))
    return g + g.T


def generate(
    prior: Prior,
    partition: BlockPartition,
    profile: VarianceProfile,
    seed: int,
) -> SpikedInstance:
    if partition.q != profile.q:
        raise ProfileError("partition and profile disagree on q")
    spike_rng, noise_rng, _ = instance_rngs(seed)
    n = partition.n
    x = sample(prior, n, spike_rng)
    a = sample_goe(n, noise_rng)
    # Scale the noise blockwise by sqrt(delta_small); symmetric because each
    # (b, a) block and its transpose get the same scalar.
    root_delta = np.sqrt(profile.delta_small)
    slices = partition.block_slices()
    for b in range(partition.q):
        for a_idx in range(partition.q):
            a[slices[b], slices[a_idx]] *= root_delta[b, a_idx]
    y = np.outer(x, x) / np.sqrt(n) + a
    return SpikedInstance(partition=partition, profile=profile, spike=x, observed=y, seed=seed)


_HEADER = struct.Struct("<QQQ")


def dump_instance(instance: SpikedInstance, path) -> None:
    """Binary dump: header (n, q, seed) then x* and the upper triangle of Y
    (row-major, diagonal included) as little-endian float64."""
    n = instance.n
    iu = np.triu_indices(n)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(n, instance.partition.q, instance.seed))
        fh.write(instance.spike.astype("<f8").tobytes())
        fh.write(np.ascontiguousarray(instance.observed[iu], dtype="<f8").tobytes())


def load_instance_dump(path):
    """Read a dump back as (header dict, spike, Y) with Y re-symmetrized exactly."""
    with open(path, "rb") as fh:
        n, q, seed = _HEADER.unpack(fh.read(_HEADER.size))
        spike = np.frombuffer(fh.read(8 * n), dtype="<f8").copy()
        upper = np.frombuffer(fh.read(), dtype="<f8")
    if upper.size != n * (n + 1) // 2:
        raise ValueError("truncated instance dump")
    y = np.zeros((n, n))
    iu = np.triu_indices(n)
    y[iu] = upper
    y.T[iu] = upper
    return {"n": n, "q": q, "seed": seed}, spike, y


def export_spike_csv(instance: SpikedInstance, path) -> None:
    with open(path, "w") as fh:
        fh.write("index,block,spike\n")
        for i, (b, v) in enumerate(zip(instance.partition.assignment, instance.spike)):
            fh.write(f"{i},{b},{float(v)!r}\n")
