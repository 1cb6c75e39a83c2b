"""Monte Carlo disk fields: determinism, sampling laws, estimator checks."""

import math

import numpy as np
import numpy.testing as npt
import pytest
from scipy.spatial.distance import pdist
from scipy.stats import kstest

from corrpeaks import (
    DiskEnsembleConfig,
    PackingError,
    estimate_correlation,
    pair_count_baseline,
    realization_rng,
    run_ensemble,
    sample_centers,
    sample_disk_points,
)

R = math.radians(1.0)


def small_config(**kw):
    base = dict(
        n_disks=40,
        radius=R,
        points_per_disk=16,
        patch_size=0.5,
        n_realizations=8,
        seed=123,
        n_bins=24,
    )
    base.update(kw)
    return DiskEnsembleConfig(**base)


# ---------------------------------------------------------------------------
# determinism


def test_rerun_is_bit_identical():
    cfg = small_config()
    a = run_ensemble(cfg)
    b = run_ensemble(cfg)
    npt.assert_array_equal(a.mean, b.mean)
    npt.assert_array_equal(a.rms, b.rms)
    npt.assert_array_equal(a.per_realization, b.per_realization)
    npt.assert_array_equal(a.n_pairs, b.n_pairs)


def test_thread_count_never_shows_in_results():
    cfg = small_config()
    serial = run_ensemble(cfg, threads=1)
    parallel = run_ensemble(cfg, threads=4)
    npt.assert_array_equal(serial.mean, parallel.mean)
    npt.assert_array_equal(serial.per_realization, parallel.per_realization)


def test_seed_changes_results():
    a = run_ensemble(small_config(seed=1))
    b = run_ensemble(small_config(seed=2))
    assert not np.array_equal(a.mean, b.mean)


def test_realization_streams_are_distinct():
    r0 = realization_rng(7, 0).uniform(size=4)
    r1 = realization_rng(7, 1).uniform(size=4)
    again = realization_rng(7, 0).uniform(size=4)
    npt.assert_array_equal(r0, again)
    assert not np.array_equal(r0, r1)


# ---------------------------------------------------------------------------
# sampling laws


def test_centers_fill_the_square():
    cfg = small_config(n_disks=2000)
    pts = sample_centers(cfg, realization_rng(0, 0))
    assert pts.shape == (2000, 2)
    assert pts.min() >= 0.0 and pts.max() < cfg.patch_size
    # both coordinates uniform
    for axis in (0, 1):
        stat = kstest(pts[:, axis] / cfg.patch_size, "uniform").statistic
        assert stat < 0.035


def test_single_center_trivial():
    cfg = small_config(n_disks=1, points_per_disk=1, n_realizations=1)
    pts = sample_centers(cfg, realization_rng(5, 0))
    assert pts.shape == (1, 2)


def test_hard_core_separation_is_exact():
    cfg = small_config(n_disks=60, patch_size=1.0, hard_core=True)
    for index in range(3):
        centers = sample_centers(cfg, realization_rng(cfg.seed, index))
        assert pdist(centers).min() > 2.0 * R


def test_infeasible_packing_raises_before_sampling():
    with pytest.raises(PackingError):
        DiskEnsembleConfig(
            n_disks=4000, radius=0.05, patch_size=1.0, hard_core=True
        )


def test_disk_points_stay_in_their_disk_and_follow_area_law():
    cfg = small_config(n_disks=100, points_per_disk=1000, patch_size=4.0)
    rng = realization_rng(3, 0)
    centers = sample_centers(cfg, rng)
    pts = sample_disk_points(centers, cfg, rng)
    assert pts.shape == (100 * 1000, 2)

    owner = np.repeat(centers, cfg.points_per_disk, axis=0)
    dist = np.hypot(*(pts - owner).T)
    assert dist.max() <= R * (1 + 1e-12)
    # area-uniform: (r/R)^2 is uniform on [0, 1]
    assert kstest((dist / R) ** 2, "uniform").statistic < 0.02


def test_one_point_per_disk():
    cfg = small_config(n_disks=17, points_per_disk=1)
    rng = realization_rng(0, 0)
    pts = sample_disk_points(sample_centers(cfg, rng), cfg, rng)
    assert pts.shape == (17, 2)


def test_variable_radius_draws_span_the_range():
    cfg = small_config(n_disks=400, points_per_disk=4, radius=(0.5 * R, 2.0 * R), patch_size=2.0)
    rng = realization_rng(1, 0)
    centers = sample_centers(cfg, rng)
    pts = sample_disk_points(centers, cfg, rng)
    owner = np.repeat(centers, cfg.points_per_disk, axis=0)
    dist = np.hypot(*(pts - owner).T)
    assert dist.max() <= 2.0 * R * (1 + 1e-12)
    per_disk_max = dist.reshape(400, 4).max(axis=1)
    assert per_disk_max.max() > 1.2 * R  # some large disks in play
    assert (per_disk_max < 0.6 * R).sum() > 20  # and some small ones


# ---------------------------------------------------------------------------
# estimator


def test_pair_baseline_matches_brute_force_on_uniform_points():
    # with DD from an actual uniform sample, DD/RR ~ 1 in every bin
    rng = np.random.default_rng(7)
    n, patch = 3000, 0.7
    pts = rng.uniform(0.0, patch, size=(n, 2))
    edges = np.linspace(0.0, 0.3, 13)
    dd, _ = np.histogram(pdist(pts), bins=edges)
    rr = pair_count_baseline(n, edges, patch)
    assert rr.shape == (12,)
    npt.assert_allclose(dd / rr, 1.0, atol=0.04)


def test_pair_baseline_rejects_bins_beyond_half_patch():
    with pytest.raises(ValueError):
        pair_count_baseline(100, np.linspace(0.0, 0.6, 5), 1.0)


def test_uniform_field_estimates_to_zero():
    rng = np.random.default_rng(21)
    pts = rng.uniform(0.0, 1.0, size=(4000, 2))
    edges = np.linspace(0.0, 0.25, 20)
    tab = estimate_correlation(pts, edges, 1.0)
    assert np.nanmax(np.abs(tab.values)) < 0.1
    npt.assert_allclose(tab.theta, 0.5 * (edges[1:] + edges[:-1]))


def test_empty_bins_are_missing_not_zero():
    pts = np.array([[0.1, 0.1], [0.1, 0.14], [0.6, 0.6]])
    edges = np.array([0.0, 0.02, 0.06, 0.2, 0.4])
    tab = estimate_correlation(pts, edges, 1.0)
    assert np.isnan(tab.values[0])  # nothing that close
    assert np.isfinite(tab.values[1])


def test_doubling_points_leaves_the_estimate_consistent():
    # same centers, more points per disk: estimates agree within the
    # shot-noise scale of the sparser one
    edges = np.linspace(0.0, 4 * R, 25)
    cfgs = [small_config(points_per_disk=n, n_realizations=30, seed=9) for n in (16, 32)]
    stats = [run_ensemble(c) for c in cfgs]
    band = np.nan_to_num(stats[0].rms, nan=np.inf) / math.sqrt(30)
    diff = np.abs(stats[0].mean - stats[1].mean)
    ok = np.isnan(diff) | (diff < 4 * band + 1e-12)
    assert ok.mean() > 0.9


def test_rms_is_missing_for_a_single_realization():
    stats = run_ensemble(small_config(n_realizations=1))
    assert np.all(np.isnan(stats.rms))
    assert stats.per_realization.shape == (1, 24)


def test_rms_shrinks_like_root_n_realizations():
    # the ensemble spread is a property of one realization; the error of
    # the MEAN scales as 1/sqrt(n). Check the mean of two disjoint
    # 12-realization blocks scatters ~2x more than 48-realization blocks.
    big = run_ensemble(small_config(n_realizations=48, seed=31))
    per = big.per_realization
    m12 = np.nanmean(per[:12], axis=0)
    m48 = np.nanmean(per, axis=0)
    s12 = np.nanstd(per[:12], axis=0, ddof=1)
    s48 = np.nanstd(per, axis=0, ddof=1)
    # rms itself is n-independent (both estimate the same spread)
    ratio = np.nanmedian(s12 / s48)
    assert 0.6 < ratio < 1.6
    del m12, m48


def test_ensemble_bins_and_counts_are_consistent():
    cfg = small_config()
    stats = run_ensemble(cfg)
    assert stats.theta_edges.size == cfg.n_bins + 1
    assert stats.theta.size == cfg.n_bins
    assert stats.n_pairs.dtype.kind in "iu"
    assert np.all(stats.n_pairs >= 0)
    # defaults bin out to 4 R
    assert stats.theta_edges[-1] == pytest.approx(4 * R)


def test_config_validation():
    with pytest.raises(ValueError):
        small_config(n_disks=0)
    with pytest.raises(ValueError):
        small_config(points_per_disk=0)
    with pytest.raises(ValueError):
        small_config(patch_size=-1.0)
    with pytest.raises(ValueError):
        small_config(n_realizations=0)
    with pytest.raises(ValueError):
        small_config(radius=(2.0 * R, 0.5 * R))
