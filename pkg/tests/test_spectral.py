import dataclasses

import numpy as np
import pytest

from blockamp import kernels
from blockamp.model import generate
from blockamp.priors import Gaussian, Rademacher
from blockamp.profiles import (
    VarianceProfile,
    contiguous_partition,
    contiguous_starts,
    scale_to_snr,
)
from blockamp.spectral import (
    bbp_probe,
    full_spectrum,
    naive_pca_probe,
    overlap,
    top_eigenpair,
    top_two,
    transform,
)

TWO_BLOCK = VarianceProfile(np.array([[1.0, 3.0], [3.0, 2.0]]))
HALF = np.array([0.5, 0.5])


def test_transform_reduces_to_scalar_case():
    # q = 1, Delta = 1/lam: Y_tilde = lam * Y / sqrt(N) - lam * I exactly.
    lam = 1.5
    part = contiguous_partition(60, [1.0])
    prof = VarianceProfile(np.array([[1.0 / lam]]))
    inst = generate(Rademacher(), part, prof, seed=0)
    got = transform(inst)
    want = lam * inst.observed / np.sqrt(60) - lam * np.eye(60)
    assert np.max(np.abs(got - want)) <= 1e-12


def test_transform_symmetric_and_diagonal_shift():
    part = contiguous_partition(8, [0.5, 0.5])
    inst = generate(Rademacher(), part, TWO_BLOCK, seed=1)
    m = transform(inst)
    assert np.max(np.abs(m - m.T)) <= 1e-14
    # Hand-computed diagonal shifts: block 0 has sum_a c_a/delta[0,a] =
    # 1/2 + 1/6 = 2/3, block 1 has 1/6 + 1/4 = 5/12.
    scaled = inst.observed / (np.sqrt(8) * np.array([[1.0, 3.0], [3.0, 2.0]]).repeat(4, 0).repeat(4, 1))
    shifts = np.diag(m) - np.diag(scaled)
    assert np.allclose(shifts[:4], -2.0 / 3.0, atol=1e-12)
    assert np.allclose(shifts[4:], -5.0 / 12.0, atol=1e-12)


def test_transform_linearity_in_observed():
    part = contiguous_partition(10, [0.5, 0.5])
    inst = generate(Gaussian(1.0), part, TWO_BLOCK, seed=2)
    shifted = dataclasses.replace(inst, observed=inst.observed + np.eye(10))
    diff = transform(shifted) - transform(inst)
    want = np.diag(1.0 / (np.sqrt(10) * np.array([1.0] * 5 + [2.0] * 5)))
    assert np.max(np.abs(diff - want)) <= 1e-13


def test_transform_rejects_bad_gamma():
    part = contiguous_partition(10, [1.0])
    inst = generate(Gaussian(1.0), part, VarianceProfile(np.array([[1.0]])), seed=0)
    with pytest.raises(ValueError):
        transform(inst, gamma2=0.0)


def test_top_eigenpair_small_examples():
    val, vec, ok, _ = top_eigenpair(np.diag([3.0, 1.0, 2.0]))
    assert ok and val == pytest.approx(3.0)
    assert np.allclose(np.abs(vec), [1.0, 0.0, 0.0])
    u = np.array([0.6, 0.8])
    val, vec, ok, _ = top_eigenpair(np.outer(u, u))
    assert val == pytest.approx(1.0)
    assert np.allclose(vec, u)


def test_top_eigenpair_power_matches_dense():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(50, 50))
    m = (a + a.T) / 2
    val_d, vec_d, _, _ = top_eigenpair(m)
    val_p, vec_p, ok, resid = top_eigenpair(m, dense=False)
    assert ok
    assert abs(val_p - val_d) <= 1e-8
    assert np.max(np.abs(vec_p - vec_d)) <= 1e-6


def test_top_two_deflation_matches_dense():
    rng = np.random.default_rng(4)
    a = rng.normal(size=(60, 60))
    m = (a + a.T) / 2
    vals = np.linalg.eigvalsh(m)
    t1, t2, vec, ok, _ = top_two(m, dense=False)
    assert ok
    assert abs(t1 - vals[-1]) <= 1e-8
    assert abs(t2 - vals[-2]) <= 1e-6


def test_top_vector_is_amp_stationary_direction():
    # Cross-check of transform against the iteration kernels: the top
    # eigenpair (theta, v) must satisfy
    #   scaled_block_matvec(Y, v) / sqrt(n) - row_weight (.) v = theta v.
    part = contiguous_partition(200, [0.5, 0.5])
    inst = generate(Rademacher(), part, TWO_BLOCK, seed=5)
    m = transform(inst)
    theta, v, _, _ = top_eigenpair(m)
    starts = contiguous_starts(part.assignment, part.q)
    mv = kernels.scaled_block_matvec(inst.observed, v, starts, inst.profile.inv)
    row_weight = (inst.profile.inv @ part.fractions)[part.assignment]
    lhs = mv / np.sqrt(200) - row_weight * v
    assert np.max(np.abs(lhs - theta * v)) <= 1e-8


def test_noiseless_probe_recovers_spike():
    prof = VarianceProfile(np.full((1, 1), 1e-9))
    part = contiguous_partition(300, [1.0])
    inst = generate(Gaussian(1.0), part, prof, seed=6)
    rep = naive_pca_probe(inst)
    assert rep.top_vector_overlap >= 0.999


def test_overlap_helper():
    v = np.array([1.0, 0.0])
    assert overlap(v, np.array([-2.0, 0.0])) == pytest.approx(1.0)
    assert overlap(v, np.array([0.0, 3.0])) == pytest.approx(0.0)


def test_full_spectrum_semicircle_edges():
    # Pure noise, q = 1, Delta = 1: Y/sqrt(N) has bulk edges near +-2.
    prof = VarianceProfile(np.array([[1.0]]))
    part = contiguous_partition(2000, [1.0])
    inst = generate(Gaussian(1e-12), part, prof, seed=7)
    vals = full_spectrum(inst.observed / np.sqrt(2000))
    assert vals[-1] == pytest.approx(2.0, rel=0.05)
    assert vals[0] == pytest.approx(-2.0, rel=0.05)
    assert vals.size == 2000
    assert np.all(np.diff(vals) >= 0)


def test_full_spectrum_rejects_large():
    with pytest.raises(ValueError):
        full_spectrum(np.zeros((4001, 4001)))


def test_bbp_dichotomy_grid():
    # Median overlap of the transformed-matrix top eigenvector across seeds:
    # the detection crossing sits between snr 0.9 and 1.1.
    part = contiguous_partition(1000, [0.5, 0.5])
    medians = {}
    for lam in (0.7, 0.9, 1.1, 1.4, 1.8):
        prof = scale_to_snr(TWO_BLOCK, HALF, 1.0, lam)
        ovs = [bbp_probe(generate(Gaussian(1.0), part, prof, seed=s)).top_vector_overlap
               for s in range(10)]
        medians[lam] = float(np.median(ovs))
    assert medians[0.7] <= 0.1
    assert medians[0.9] <= 0.1
    assert medians[1.1] > medians[0.9]
    assert medians[1.4] >= 0.3
    assert medians[1.8] >= 0.3


def test_probe_reports_gap_fields():
    part = contiguous_partition(300, [0.5, 0.5])
    prof = scale_to_snr(TWO_BLOCK, HALF, 1.0, 1.8)
    inst = generate(Rademacher(), part, prof, seed=0)
    rep = bbp_probe(inst, with_spectrum=True)
    assert rep.method == "tilde"
    assert rep.full_spectrum is not None and rep.full_spectrum.size == 300
    assert rep.bulk_edge_gap == pytest.approx(rep.top_eigenvalue - rep.second_eigenvalue)
    naive = naive_pca_probe(inst)
    assert naive.method == "naive"
