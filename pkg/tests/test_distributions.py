import numpy as np
import pytest
from scipy.integrate import trapezoid

from proxgap.diffcore import Rng
from proxgap.distributions import (
    DataSplits,
    GaussianMixture,
    LatentSpec,
    log_density,
    make_splits,
    ring_mixture,
    sample_latent,
    sample_real,
)


def single_mode(dim=2):
    return GaussianMixture([1.0], np.zeros((1, dim)), np.ones((1, dim)))


def two_mode():
    return GaussianMixture([0.5, 0.5], [[-1.5, 0.0], [1.5, 0.0]],
                           [[0.0625, 0.0625], [0.0625, 0.0625]])


def test_validation_rejects_bad_mixtures():
    with pytest.raises(ValueError):
        GaussianMixture([0.5, 0.6], [[0.0], [1.0]], [[1.0], [1.0]])
    with pytest.raises(ValueError):
        GaussianMixture([1.0], [[0.0]], [[0.0]])
    with pytest.raises(ValueError):
        GaussianMixture([0.5, 0.5], [[0.0]], [[1.0]])


def test_sample_mean_close_to_zero():
    x = sample_real(single_mode(), 100_000, Rng(0))
    assert np.all(np.abs(x.mean(axis=0)) < 0.02)  # 3 sigma / sqrt(n) ~ 0.0095


def test_ring_samples_stay_near_modes():
    dist = ring_mixture(8, 2.0, 0.05)
    x = sample_real(dist, 5000, Rng(1))
    d2 = ((x[:, None, :] - dist.means[None]) ** 2).sum(axis=2)
    nearest = np.sqrt(d2.min(axis=1))
    assert np.mean(nearest < 0.5) >= 0.99


def test_sample_rejects_nonpositive_n():
    with pytest.raises(ValueError):
        sample_real(single_mode(), 0, Rng(0))


def test_log_density_standard_normal_origin():
    val = log_density(single_mode(2), np.zeros(2))
    assert val == pytest.approx(-np.log(2.0 * np.pi), abs=1e-12)


def test_density_symmetric_mixture():
    dist = two_mode()
    pts = Rng(2).normal((50, 2))
    assert np.allclose(log_density(dist, pts), log_density(dist, -pts))


@pytest.mark.parametrize("dist", [single_mode(), two_mode(), ring_mixture(8, 2.0, 0.05)],
                         ids=["single", "two-mode", "ring"])
def test_density_integrates_to_one(dist):
    # 6-sigma box around the modes, iterated trapezoid quadrature
    span = np.sqrt(dist.variances.max()) * 6.0
    lo = dist.means.min(axis=0) - span
    hi = dist.means.max(axis=0) + span
    n = 501
    xs = np.linspace(lo[0], hi[0], n)
    ys = np.linspace(lo[1], hi[1], n)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    dens = np.exp(log_density(dist, pts)).reshape(n, n)
    total = trapezoid(trapezoid(dens, ys, axis=1), xs)
    assert total == pytest.approx(1.0, abs=1e-3)


def test_ring_equals_equivalent_mixture_exactly():
    ring = ring_mixture(6, 1.5, 0.2)
    angles = 2.0 * np.pi * np.arange(6) / 6
    manual = GaussianMixture(np.full(6, 1 / 6),
                             1.5 * np.stack([np.cos(angles), np.sin(angles)], axis=1),
                             np.full((6, 2), 0.2 ** 2))
    pts = Rng(3).normal((100, 2)) * 2.0
    assert np.array_equal(log_density(ring, pts), log_density(manual, pts))


def test_latent_moments_and_determinism():
    spec = LatentSpec(3)
    z = sample_latent(spec, 10_000, Rng(4))
    assert np.all(np.abs(z.mean(axis=0)) < 3.0 / np.sqrt(10_000))
    assert np.all(np.abs(z.var(axis=0) - 1.0) < 0.05)
    assert np.array_equal(z, sample_latent(spec, 10_000, Rng(4)))


def test_splits_sizes_and_disjoint():
    splits = make_splits(two_mode(), 800, 100, 100, Rng(5))
    assert splits.s_a.shape == (800, 2)
    assert splits.s_b.shape == (100, 2)
    assert splits.s_c.shape == (100, 2)
    rows = {arr.tobytes() for part in (splits.s_a, splits.s_b, splits.s_c) for arr in part}
    assert len(rows) == 1000


def test_splits_paper_scale_sizes():
    splits = make_splits(single_mode(), 1000, 5000, 5000, Rng(6))
    assert splits.s_b.shape[0] == 5000
    assert splits.s_c.shape[0] == 5000


def test_splits_deterministic():
    a = make_splits(two_mode(), 50, 20, 20, Rng(7))
    b = make_splits(two_mode(), 50, 20, 20, Rng(7))
    assert np.array_equal(a.s_a, b.s_a)
    assert np.array_equal(a.s_b, b.s_b)
    assert np.array_equal(a.s_c, b.s_c)


def test_splits_arrays_read_only():
    splits = make_splits(two_mode(), 10, 5, 5, Rng(8))
    with pytest.raises(ValueError):
        splits.s_a[0, 0] = 99.0
    assert isinstance(splits, DataSplits)
