import math

import numpy as np
import pytest

from multistatic.config import default_config
from multistatic.fusion import (
    CartesianResampler,
    ThresholdSpec,
    aggregate_rounds,
    fuse_round,
    resample_to_cartesian,
    threshold_map,
)
from multistatic.geometry import all_pairs, bistatic_range, wrap_angle

from conftest import small_config


def test_threshold_values():
    spec = ThresholdSpec(far=1e-2, search_space_size=5000, noise_variance_w=1.0)
    assert spec.p_fa_point == pytest.approx(2e-6)
    assert spec.eta == pytest.approx(-math.log(2e-6))
    spec = ThresholdSpec(far=1e-2, search_space_size=100, noise_variance_w=1.0)
    assert spec.eta == pytest.approx(9.2103, abs=1e-4)


def test_threshold_scales_with_noise_power():
    a = ThresholdSpec(1e-2, 100, 1.0).eta
    b = ThresholdSpec(1e-2, 100, 3.0).eta
    assert b == pytest.approx(3 * a)


def test_threshold_map_zero_and_retain():
    spec = ThresholdSpec(far=1e-2, search_space_size=100, noise_variance_w=1.0)
    m = np.array([[spec.eta * 2, spec.eta * 0.5], [spec.eta, 0.0]])
    out = threshold_map(m, spec)
    assert out[0, 0] == m[0, 0]       # soft value retained
    assert out[0, 1] == 0.0
    assert out[1, 0] == m[1, 0]       # boundary kept (>=)
    assert out[1, 1] == 0.0


def test_threshold_false_alarm_rate_on_noise():
    """Exponential noise bins exceed eta with probability p_fa_point."""
    rng = np.random.default_rng(5)
    sigma2 = 2.5
    n = 4_000_000
    spec = ThresholdSpec(far=1e-2, search_space_size=1000,
                         noise_variance_w=sigma2)
    bins = rng.exponential(sigma2, size=n)
    count = np.count_nonzero(bins >= spec.eta)
    expected = n * spec.p_fa_point
    # within 4 binomial standard deviations of the expected count
    assert abs(count - expected) <= 4 * math.sqrt(expected)


def _pair_and_cfg():
    cfg = small_config()
    return cfg, all_pairs(cfg)[0]


def test_resampler_exact_for_affine_maps():
    """Bilinear interpolation reproduces affine functions of (row, col) exactly."""
    cfg, pair = _pair_and_cfg()
    res = CartesianResampler(pair, cfg.scan, cfg.grid)
    rows, cols = res.map_shape
    ii, jj = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    bist = 0.7 * ii + 0.3 * jj + 2.0
    out = res(bist)

    # independent recomputation of the fractional coordinates per pixel
    x = cfg.grid.x_coords()
    y = cfg.grid.y_coords()
    xx, yy = np.meshgrid(x, y, indexing="ij")
    pts = np.stack([xx, yy], axis=-1)
    r_bis = bistatic_range(pair.tx_position_m, pair.rx_position_m, pts)
    theta = wrap_angle(np.arctan2(yy - pair.rx_position_m[1],
                                  xx - pair.rx_position_m[0])
                       - pair.rx_boresight_rad)
    fr = r_bis / pair.range_resolution_m - pair.first_bin
    fc = (theta - cfg.scan.directions_rad[0]) / cfg.scan.step_rad
    valid = (fr >= 0) & (fr <= rows - 1) & (fc >= 0) & (fc <= cols - 1)
    expected = np.where(valid, 0.7 * fr + 0.3 * fc + 2.0, 0.0)
    assert valid.sum() > 100
    assert np.allclose(out, expected, atol=1e-9)


def test_resampler_bounded_by_map_extrema():
    cfg, pair = _pair_and_cfg()
    rng = np.random.default_rng(2)
    res = CartesianResampler(pair, cfg.scan, cfg.grid)
    m = rng.uniform(1.0, 3.0, size=res.map_shape)
    out = res(m)
    covered = res.coverage() > 0
    assert out[covered].min() >= 1.0 - 1e-12
    assert out.max() <= 3.0 + 1e-12
    assert np.all(out[~covered] == 0.0)


def test_resampler_delta_lands_near_source_cell():
    cfg, pair = _pair_and_cfg()
    res = CartesianResampler(pair, cfg.scan, cfg.grid)
    m = np.zeros(res.map_shape)
    # impulse at the map cell containing the grid origin
    r0 = bistatic_range(pair.tx_position_m, pair.rx_position_m, (0.0, 0.0))
    theta0 = wrap_angle(np.arctan2(-pair.rx_position_m[1], -pair.rx_position_m[0])
                        - pair.rx_boresight_rad)
    row = round(r0 / pair.range_resolution_m - pair.first_bin)
    col = round((theta0 - cfg.scan.directions_rad[0]) / cfg.scan.step_rad)
    m[row, col] = 1.0
    out = res(m)
    assert out.max() > 0
    i, j = np.unravel_index(np.argmax(out), out.shape)
    # the peak pixel's bistatic coordinates are within one cell of the source
    x = cfg.grid.x_coords()[i]
    y = cfg.grid.y_coords()[j]
    r_bis = bistatic_range(pair.tx_position_m, pair.rx_position_m, (x, y))
    assert abs(r_bis / pair.range_resolution_m - pair.first_bin - row) <= 1.0


def test_resampler_shape_check():
    cfg, pair = _pair_and_cfg()
    res = CartesianResampler(pair, cfg.scan, cfg.grid)
    with pytest.raises(ValueError):
        res(np.zeros((3, 3)))


def test_resampler_coverage_geometry():
    """Covered pixels lie between the blind zone and the maximum range."""
    cfg, pair = _pair_and_cfg()
    res = CartesianResampler(pair, cfg.scan, cfg.grid)
    cov = res.coverage()
    x = cfg.grid.x_coords()
    y = cfg.grid.y_coords()
    xx, yy = np.meshgrid(x, y, indexing="ij")
    pts = np.stack([xx, yy], axis=-1)
    r_bis = bistatic_range(pair.tx_position_m, pair.rx_position_m, pts)
    assert np.all(r_bis[cov > 0] >= pair.first_bin * pair.range_resolution_m - 1e-9)
    assert np.all(r_bis[cov > 0] <= (pair.last_bin - 1) * pair.range_resolution_m + 1e-9)


def test_one_shot_resample_matches_class():
    cfg, pair = _pair_and_cfg()
    rng = np.random.default_rng(3)
    res = CartesianResampler(pair, cfg.scan, cfg.grid)
    m = rng.uniform(size=res.map_shape)
    assert np.array_equal(resample_to_cartesian(m, pair, cfg.scan, cfg.grid),
                          res(m))


def test_fuse_round_sums():
    a = np.ones((4, 4))
    b = 2 * np.ones((4, 4))
    assert np.array_equal(fuse_round([a, b]), 3 * np.ones((4, 4)))
    assert np.array_equal(fuse_round([a]), a)


def test_fuse_round_rejects_bad_input():
    with pytest.raises(ValueError):
        fuse_round([])
    with pytest.raises(ValueError):
        fuse_round([np.ones((2, 2)), np.ones((3, 3))])


def test_aggregate_rounds_count_check():
    maps = [np.ones((2, 2))] * 3
    assert np.array_equal(aggregate_rounds(maps, expected_rounds=3),
                          3 * np.ones((2, 2)))
    with pytest.raises(ValueError):
        aggregate_rounds(maps, expected_rounds=5)


def test_full_grid_resampler_covers_center():
    """On the deployment-scale grid the monitored center is covered by all pairs."""
    cfg = default_config(fast_grid=True)
    pairs = all_pairs(cfg)
    center = (cfg.grid.nx // 2, cfg.grid.ny // 2)
    for pair in pairs[:4]:
        res = CartesianResampler(pair, cfg.scan, cfg.grid)
        assert res.coverage()[center] == 1.0
