"""Block partitions of [N] and block-constant variance profiles.

A partition groups the N coordinates into q blocks via an assignment map
g: [N] -> [q].  A variance profile is a symmetric q x q matrix of noise
variances; its N x N expansion assigns variance delta_small[g(i), g(j)]
to entry (i, j).  Both objects are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class BlockPartition:
    """Grouping of [N] into q non-empty blocks.

    `assignment[i]` is the block index of coordinate i (0-based).  Block
    fractions |C_a|/N must each be strictly positive and sum to 1.
    """

    n: int
    q: int
    assignment: np.ndarray
    fractions: np.ndarray = field(init=False)

    def __post_init__(self):
        assignment = np.ascontiguousarray(self.assignment, dtype=np.int64)
        if assignment.shape != (self.n,):
            raise ProfileError(f"assignment has shape {assignment.shape}, expected ({self.n},)")
        if assignment.min(initial=0) < 0 or assignment.max(initial=-1) >= self.q:
            raise ProfileError("assignment values must lie in [0, q)")
        counts = np.bincount(assignment, minlength=self.q)
        if np.any(counts == 0):
            raise ProfileError("every block must be non-empty")
        assignment.setflags(write=False)
        object.__setattr__(self, "assignment", assignment)
        fractions = counts / self.n
        fractions.setflags(write=False)
        object.__setattr__(self, "fractions", fractions)
        assert abs(fractions.sum() - 1.0) < 1e-12

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.q)

    def block_indices(self, a: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == a)

    def block_slices(self) -> list[slice]:
        """Slices for a contiguous partition; raises if blocks are not contiguous."""
        starts = contiguous_starts(self.assignment, self.q)
        return [slice(starts[a], starts[a + 1]) for a in range(self.q)]

    @property
    def is_contiguous(self) -> bool:
        return bool(np.all(np.diff(self.assignment) >= 0))


def contiguous_starts(assignment: np.ndarray, q: int) -> np.ndarray:
    if np.any(np.diff(assignment) < 0):
        raise ProfileError("partition is not contiguous")
    counts = np.bincount(assignment, minlength=q)
    return np.concatenate([[0], np.cumsum(counts)])


def contiguous_partition(n: int, fractions) -> BlockPartition:
    """Contiguous blocks of sizes round(c_a * n), remainder going to the last block."""
    fractions = np.asarray(fractions, dtype=np.float64)
    q = fractions.size
    if np.any(fractions <= 0) or abs(fractions.sum() - 1.0) > 1e-12:
        raise ProfileError("fractions must be positive and sum to 1")
    sizes = np.round(fractions * n).astype(np.int64)
    sizes[-1] = n - sizes[:-1].sum()
    if np.any(sizes <= 0):
        raise ProfileError(f"n={n} too small for fractions {fractions}")
    assignment = np.repeat(np.arange(q), sizes)
    return BlockPartition(n=n, q=q, assignment=assignment)


@dataclass(frozen=True)
class VarianceProfile:
    """Symmetric q x q matrix of strictly positive noise variances."""

    delta_small: np.ndarray

    def __post_init__(self):
        delta = np.ascontiguousarray(self.delta_small, dtype=np.float64)
        if delta.ndim != 2 or delta.shape[0] != delta.shape[1]:
            raise ProfileError("delta_small must be square")
        if not np.array_equal(delta, delta.T):
            raise ProfileError("delta_small must be symmetric as stored")
        if np.any(delta <= 0):
            raise ProfileError("delta_small entries must be strictly positive")
        delta.setflags(write=False)
        object.__setattr__(self, "delta_small", delta)

    @property
    def q(self) -> int:
        return self.delta_small.shape[0]

    @property
    def inv(self) -> np.ndarray:
        """Entrywise inverse of delta_small."""
        return 1.0 / self.delta_small

    def scaled(self, factor: float) -> "VarianceProfile":
        return VarianceProfile(self.delta_small * factor)


def expand(partition: BlockPartition, profile: VarianceProfile) -> np.ndarray:
    """Dense N x N expansion Delta_ij = delta_small[g(i), g(j)].

    Only needed for dense oracles and tests; block-aware code paths work on
    delta_small directly.
    """
    if partition.q != profile.q:
        raise ProfileError(f"partition has q={partition.q} but profile has q={profile.q}")
    g = partition.assignment
    return profile.delta_small[np.ix_(g, g)]


def snr_matrix(profile: VarianceProfile, fractions) -> np.ndarray:
    """The symmetric matrix diag(sqrt(c)) (1/delta_small) diag(sqrt(c))."""
    c = np.asarray(fractions, dtype=np.float64)
    if c.size != profile.q:
        raise ProfileError("fractions length must equal profile.q")
    if np.any(c <= 0):
        raise ProfileError("fractions must be strictly positive")
    root_c = np.sqrt(c)
    return root_c[:, None] * profile.inv * root_c[None, :]


def snr(profile: VarianceProfile, fractions, gamma2: float = 1.0) -> float:
    """Inhomogeneous signal-to-noise ratio lambda of the profile.

    Equals gamma2**2 times the largest-magnitude eigenvalue of
    diag(sqrt(c)) (1/delta_small) diag(sqrt(c)), where gamma2 is the prior
    second moment.  The matrix has positive entries so the top eigenvalue is
    positive; the absolute value is kept for safety.
    """
    if gamma2 <= 0:
        raise ProfileError("gamma2 must be positive")
    eigvals = np.linalg.eigvalsh(snr_matrix(profile, fractions))
    return float(gamma2**2 * np.max(np.abs(eigvals)))


def scale_to_snr(
    profile: VarianceProfile, fractions, gamma2: float, target: float
) -> VarianceProfile:
    """Rescale the profile entrywise so that its snr equals `target`.

    snr is homogeneous of degree -1 in delta_small, so multiplying by
    snr/target lands exactly on the target.
    """
    if target <= 0:
        raise ProfileError("target snr must be positive")
    current = snr(profile, fractions, gamma2)
    return profile.scaled(current / target)
