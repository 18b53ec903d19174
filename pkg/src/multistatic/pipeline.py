"""Per-pair range-angle map production.

Two routes produce the same gated bistatic range-angle map:

* the reference route synthesizes full (K, M) symbol grids per scan
  direction and pushes them through the periodogram, literally;
* the fast route evaluates the transform directly on the gated range rows.
  Each scatterer's range response is a closed-form Dirichlet kernel and its
  Doppler response a short FFT, so no K x M grid ever exists. Noise is drawn
  directly in the range-transformed domain, which is distribution-exact when
  the range transform is unpadded (the DFT of white noise is white).

The fast route's signal part agrees with the reference route to floating
point rounding; tests pin both the signal equivalence and the noise
statistics.
"""

from __future__ import annotations

import numpy as np
import scipy.fft

from .beamforming import BeamformerBank
from .channel import phase_grids, scatterer_coefficients, synthesize_beamformed
from .config import ScenarioConfig
from .geometry import BistaticPair
from .periodogram import (
    apply_doppler_notch,
    build_bistatic_map,
    compute_periodogram,
    doppler_window,
    extract_range_profile,
    notch_column_indices,
)


def dirichlet_sum(x: np.ndarray, n_terms: int) -> np.ndarray:
    """Closed form of sum_{k=0}^{K-1} exp(j 2 pi k x)."""
    x = np.asarray(x, dtype=float)
    s = np.sin(np.pi * x)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.sin(np.pi * n_terms * x) / s
    envelope = np.exp(1j * np.pi * (n_terms - 1) * x)
    out = envelope * ratio
    return np.where(np.abs(s) < 1e-12, float(n_terms) + 0j, out)


def range_angle_map_fast(config: ScenarioConfig, pair: BistaticPair,
                         scatterers, bank: BeamformerBank,
                         rng: np.random.Generator | None = None,
                         noise: bool = True,
                         dtype=np.complex64) -> np.ndarray:
    """Gated range-angle map for one pair, transform-domain route.

    Applies the Doppler clutter notch and peak-Doppler extraction; returns
    shape (pair.n_range_bins, N_dir).
    """
    num = config.numerology
    k_count, m_count = num.active_subcarriers, num.symbols
    k_fft, m_fft = config.padding.resolve(num)
    n_dir = bank.scan_weights.shape[0]
    rows = np.arange(pair.first_bin, pair.last_bin)
    w = doppler_window(m_count)

    spectra = np.zeros((n_dir, rows.size, m_fft), dtype=dtype)
    if scatterers:
        toa = np.array([s.toa_s for s in scatterers])
        # range response on the gated rows only
        x = rows[None, :] / k_fft - num.subcarrier_spacing_hz * toa[:, None]
        u_t = dirichlet_sum(x, k_count).astype(dtype)                   # (L, rows)
        v = np.stack([phase_grids(s, num)[1] for s in scatterers])      # (L, M)
        v_t = scipy.fft.fft(v * w, n=m_fft, axis=1).astype(dtype)       # (L, m_fft)
        coeff = scatterer_coefficients(scatterers, bank).astype(dtype)  # (N_dir, L)
        per_scatterer = u_t[:, :, None] * v_t[:, None, :]               # (L, rows, m_fft)
        spectra += np.tensordot(coeff, per_scatterer, axes=(1, 0))

    if noise:
        if rng is None:
            raise ValueError("rng required when noise is on")
        sigma2 = num.noise_variance_w
        float_dtype = np.zeros(1, dtype=dtype).real.dtype
        if k_fft == k_count:
            # white in, white out: draw the range-transformed noise directly
            scale = np.sqrt(k_count * sigma2 / 2.0)
            raw = rng.standard_normal(size=(2, n_dir, rows.size, m_count),
                                      dtype=float_dtype)
            n_rows = (raw[0] + 1j * raw[1]) * (scale * w).astype(float_dtype)
            spectra += scipy.fft.fft(n_rows, n=m_fft, axis=-1)
        else:
            # zero-padded range transform correlates bins; do it literally
            scale = np.sqrt(sigma2 / 2.0)
            raw = rng.standard_normal(size=(2, n_dir, k_count, m_count),
                                      dtype=float_dtype)
            grid = (raw[0] + 1j * raw[1]) * (scale * w).astype(float_dtype)
            inner = scipy.fft.fft(grid, n=m_fft, axis=-1)
            outer = scipy.fft.ifft(inner, n=k_fft, axis=-2) * k_fft
            spectra += outer[:, pair.first_bin:pair.last_bin, :]

    power = (np.abs(spectra) ** 2) / (k_count * m_count)
    power[..., notch_column_indices(m_fft, config.detection.doppler_guard_bins)] = 0.0

    profiles = []
    for j in range(n_dir):
        flat = int(np.argmax(power[j]))
        p_hat = flat % m_fft
        profiles.append(power[j][:, p_hat])
    return build_bistatic_map(profiles).astype(np.float64)


def range_angle_map_reference(config: ScenarioConfig, pair: BistaticPair,
                              scatterers, bank: BeamformerBank,
                              rng: np.random.Generator | None = None,
                              noise_mode: str = "factored",
                              symbols: np.ndarray | None = None) -> np.ndarray:
    """Gated range-angle map via full grid synthesis and the periodogram."""
    num = config.numerology
    k_fft, m_fft = config.padding.resolve(num)
    grids = synthesize_beamformed(config, pair, scatterers, bank,
                                  symbols=symbols,
                                  noise_mode=noise_mode if noise_mode else "off",
                                  rng=rng)
    profiles = []
    for grid in grids:
        rd = compute_periodogram(grid, k_fft, m_fft)
        rd = apply_doppler_notch(rd, config.detection.doppler_guard_bins)
        profile, _ = extract_range_profile(rd, pair.first_bin, pair.last_bin)
        profiles.append(profile)
    return build_bistatic_map(profiles)
