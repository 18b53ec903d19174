import numpy as np
import pytest
import scipy.stats

from multistatic.periodogram import (
    apply_doppler_notch,
    build_bistatic_map,
    compute_periodogram,
    doppler_window,
    extract_range_profile,
    notch_column_indices,
)


def test_window_unit_mean_square():
    for m in (16, 48, 336):
        w = doppler_window(m)
        assert np.mean(w ** 2) == pytest.approx(1.0, rel=1e-12)


def test_window_rectangular_limit():
    assert np.allclose(doppler_window(32, beta=0.0), 1.0)


def make_tone(k_count, m_count, l0, p0, amp=1.0):
    k = np.arange(k_count)[:, None]
    m = np.arange(m_count)[None, :]
    return amp * np.exp(-2j * np.pi * k * l0 / k_count
                        + 2j * np.pi * m * p0 / m_count)


def test_on_grid_tone_peak_location_and_height():
    k_count, m_count = 64, 32
    l0, p0 = 17, 5
    grid = make_tone(k_count, m_count, l0, p0)
    # rectangular window: an on-grid tone transforms to a single K*M peak
    rd = compute_periodogram(grid, k_count, m_count, window=np.ones(m_count))
    peak = np.unravel_index(np.argmax(rd), rd.shape)
    assert peak == (l0, p0)
    assert rd[l0, p0] == pytest.approx(k_count * m_count, rel=1e-10)
    off = rd.copy()
    off[l0, p0] = 0.0
    assert off.max() < 1e-15 * rd[l0, p0]


def test_tone_peak_survives_kaiser_window():
    k_count, m_count = 64, 32
    grid = make_tone(k_count, m_count, 9, 11)
    rd = compute_periodogram(grid, k_count, m_count)
    assert np.unravel_index(np.argmax(rd), rd.shape) == (9, 11)


def test_periodogram_total_energy():
    # Parseval: the transform scalings cancel to sum(rd) = sum|g*w|^2
    rng = np.random.default_rng(0)
    k_count, m_count = 24, 18
    grid = rng.normal(size=(k_count, m_count)) + 1j * rng.normal(size=(k_count, m_count))
    w = doppler_window(m_count)
    rd = compute_periodogram(grid, k_count, m_count)
    expected = np.sum(np.abs(grid * w) ** 2)
    assert np.sum(rd) == pytest.approx(expected, rel=1e-10)


def test_padded_transform_shape_and_peak_refinement():
    k_count, m_count = 32, 16
    grid = make_tone(k_count, m_count, 10, 3)
    rd = compute_periodogram(grid, 4 * k_count, 2 * m_count,
                             window=np.ones(m_count))
    assert rd.shape == (128, 32)
    assert np.unravel_index(np.argmax(rd), rd.shape) == (40, 6)


def test_truncating_sizes_rejected():
    grid = np.zeros((16, 8), dtype=complex)
    with pytest.raises(ValueError):
        compute_periodogram(grid, 8, 8)
    with pytest.raises(ValueError):
        compute_periodogram(grid, 16, 4)


def test_window_length_mismatch_rejected():
    grid = np.zeros((16, 8), dtype=complex)
    with pytest.raises(ValueError):
        compute_periodogram(grid, 16, 8, window=np.ones(6))


def test_noise_bins_exponential():
    """White CN(0, sigma^2) input gives Exp(sigma^2) periodogram bins."""
    rng = np.random.default_rng(42)
    sigma2 = 3.0
    k_count, m_count = 64, 64
    n_rep = 30
    samples = []
    for _ in range(n_rep):
        g = np.sqrt(sigma2 / 2) * (rng.normal(size=(k_count, m_count))
                                   + 1j * rng.normal(size=(k_count, m_count)))
        rd = compute_periodogram(g, k_count, m_count, window=np.ones(m_count))
        samples.append(rd.ravel())
    x = np.concatenate(samples)
    assert x.mean() == pytest.approx(sigma2, rel=0.01)
    # Kolmogorov-Smirnov against the exponential law at the 1% level
    stat = scipy.stats.kstest(x, "expon", args=(0, sigma2))
    assert stat.pvalue > 0.01


def test_notch_indices_wrap():
    assert notch_column_indices(16, 2).tolist() == [0, 1, 2, 14, 15]
    assert notch_column_indices(16, 0).tolist() == [0]


def test_apply_notch_zeroes_guard_band_only():
    rng = np.random.default_rng(1)
    rd = rng.uniform(1.0, 2.0, size=(10, 16))
    out = apply_doppler_notch(rd, 2)
    assert np.all(out[:, [0, 1, 2, 14, 15]] == 0.0)
    keep = [c for c in range(16) if c not in (0, 1, 2, 14, 15)]
    assert np.array_equal(out[:, keep], rd[:, keep])
    # input untouched
    assert np.all(rd > 0)


def test_apply_notch_guard_bounds():
    rd = np.ones((4, 8))
    with pytest.raises(ValueError):
        apply_doppler_notch(rd, 4)
    with pytest.raises(ValueError):
        apply_doppler_notch(rd, -1)


def test_extract_profile_peak_column():
    rd = np.zeros((20, 8))
    rd[12, 5] = 7.0   # inside the gate
    rd[2, 3] = 50.0   # outside the gate: ignored
    profile, p_hat = extract_range_profile(rd, 10, 18)
    assert p_hat == 5
    assert profile.shape == (8,)
    assert profile[2] == 7.0


def test_extract_profile_tie_breaks_row_major():
    rd = np.zeros((6, 4))
    rd[1, 2] = 1.0
    rd[3, 1] = 1.0
    _, p_hat = extract_range_profile(rd, 0, 6)
    assert p_hat == 2


def test_extract_profile_bad_gate():
    rd = np.ones((6, 4))
    with pytest.raises(ValueError):
        extract_range_profile(rd, 3, 3)
    with pytest.raises(ValueError):
        extract_range_profile(rd, 0, 7)


def test_build_map_stacks_columns():
    profiles = [np.full(5, float(j)) for j in range(3)]
    out = build_bistatic_map(profiles)
    assert out.shape == (5, 3)
    assert np.all(out[:, 1] == 1.0)


def test_build_map_rejects_mismatch():
    with pytest.raises(ValueError):
        build_bistatic_map([np.zeros(4), np.zeros(5)])
