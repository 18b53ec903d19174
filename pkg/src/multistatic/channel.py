"""Frequency-domain channel synthesis for one bistatic pair.

Scatterer gains follow the radar equation with Swerling-I (exponential) RCS
draws, independent per receiver. Synthesis works per scan direction on the
rank-1 per-scatterer factorization of the channel, so the full N_R x N_T
matrix is never materialized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SPEED_OF_LIGHT, OfdmNumerology, ScenarioConfig
from .geometry import BistaticPair, bistatic_doppler, wrap_angle
from .beamforming import BeamformerBank, steering


@dataclass(frozen=True)
class ScattererRealization:
    kind: str                       # "target" | "clutter"
    position_m: tuple[float, float]
    velocity_mps: tuple[float, float]
    rcs_m2: float
    gain: complex                   # alpha: radar-equation amplitude, random phase
    toa_s: float
    doppler_hz: float
    dod_rad: float                  # from the Tx array boresight
    doa_rad: float                  # from the Rx array boresight


def gain_magnitude(rcs_m2: float, r_tx_m: float, r_rx_m: float,
                   carrier_frequency_hz: float, rx_element_gain: float = 1.0) -> float:
    """Radar-equation path amplitude |alpha| for a bistatic leg pair."""
    lam2 = (SPEED_OF_LIGHT / carrier_frequency_hz) ** 2
    return np.sqrt(rx_element_gain * lam2 * rcs_m2
                   / ((4.0 * np.pi) ** 3 * (r_tx_m * r_rx_m) ** 2))


def draw_scatterers(config: ScenarioConfig, pair: BistaticPair,
                    rng: np.random.Generator) -> list[ScattererRealization]:
    """One realization per target and clutter point for this Tx/Rx pair.

    RCS ~ Exponential(mean sigma_bar) and the gain phase ~ Uniform(0, 2pi),
    both drawn fresh per call (per receiver and per round).
    """
    tx_bs = config.base_stations[pair.tx_index]
    rx_bs = config.base_stations[pair.rx_index]
    tx = np.asarray(pair.tx_position_m)
    rx = np.asarray(pair.rx_position_m)
    f_c = config.numerology.carrier_frequency_hz

    out: list[ScattererRealization] = []
    scene = [("target", t.position_m, t.velocity_mps, t.mean_rcs_m2) for t in config.targets]
    scene += [("clutter", c.position_m, (0.0, 0.0), c.mean_rcs_m2) for c in config.clutter]
    for kind, pos, vel, mean_rcs in scene:
        p = np.asarray(pos, dtype=float)
        r_t = float(np.linalg.norm(p - tx))
        r_r = float(np.linalg.norm(p - rx))
        rcs = float(rng.exponential(mean_rcs))
        phase = float(rng.uniform(0.0, 2.0 * np.pi))
        amp = gain_magnitude(rcs, r_t, r_r, f_c, config.rx_element_gain)
        doppler = 0.0
        if kind == "target":
            doppler = bistatic_doppler(tx, rx, p, vel, f_c)
        out.append(ScattererRealization(
            kind=kind,
            position_m=tuple(pos),
            velocity_mps=tuple(vel),
            rcs_m2=rcs,
            gain=amp * np.exp(1j * phase),
            toa_s=(r_t + r_r) / SPEED_OF_LIGHT,
            doppler_hz=doppler,
            dod_rad=wrap_angle(np.arctan2(p[1] - tx[1], p[0] - tx[0]) - tx_bs.boresight_rad),
            doa_rad=wrap_angle(np.arctan2(p[1] - rx[1], p[0] - rx[0]) - rx_bs.boresight_rad),
        ))
    return out


def draw_symbols(k: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-modulus QPSK symbol grid, uniform over the 4-point alphabet."""
    idx = rng.integers(0, 4, size=(k, m))
    return np.exp(1j * (np.pi / 4.0 + np.pi / 2.0 * idx))


def phase_grids(scatterer: ScattererRealization, numerology: OfdmNumerology,
                dtype=np.complex128) -> tuple[np.ndarray, np.ndarray]:
    """Per-scatterer subcarrier and symbol phase ramps (u_k, v_m)."""
    k = np.arange(numerology.active_subcarriers)
    m = np.arange(numerology.symbols)
    u = np.exp(-2j * np.pi * k * numerology.subcarrier_spacing_hz * scatterer.toa_s)
    v = np.exp(2j * np.pi * m * numerology.symbol_duration_s * scatterer.doppler_hz)
    return u.astype(dtype), v.astype(dtype)


def scatterer_coefficients(scatterers, bank: BeamformerBank) -> np.ndarray:
    """(N_dir, L) complex amplitude seen per scan direction and scatterer.

    Combines gain alpha, Tx beam factor gamma(phi) = a(phi)^T w_T, and the
    per-direction Rx beam factor w_{R,j}^T b(theta).
    """
    if not scatterers:
        return np.zeros((bank.scan_weights.shape[0], 0), dtype=complex)
    dod = np.array([s.dod_rad for s in scatterers])
    doa = np.array([s.doa_rad for s in scatterers])
    alpha = np.array([s.gain for s in scatterers])
    gamma = steering(bank.tx_weights.size, dod) @ bank.tx_weights       # (L,)
    rx_fac = bank.rx_response(doa)                                      # (N_dir, L)
    return rx_fac * (alpha * gamma)


def synthesize_beamformed(config: ScenarioConfig, pair: BistaticPair,
                          scatterers, bank: BeamformerBank,
                          symbols: np.ndarray | None = None,
                          noise_mode: str = "factored",
                          rng: np.random.Generator | None = None,
                          dtype=np.complex128) -> np.ndarray:
    """Post-reciprocal-filter symbol grids g for every scan direction.

    Returns shape (N_dir, K, M). With unit-modulus symbols the reciprocal
    filter g = y / x is folded in as multiplication by conj(x), which cancels
    the symbol factor of the signal exactly and leaves the noise statistics
    unchanged.

    noise_mode "factored" draws independent noise per direction; "exact"
    draws one N_R-element noise vector per (k, m) and projects it through
    every scan weight vector (noise correlated across overlapping beams);
    "off" adds none.
    """
    num = config.numerology
    k_count, m_count = num.active_subcarriers, num.symbols
    n_dir = bank.scan_weights.shape[0]
    p_avg = num.per_subcarrier_power_w
    if not np.isclose(np.linalg.norm(bank.tx_weights) ** 2, p_avg, rtol=1e-6):
        raise ValueError("tx weights must satisfy ||w_T||^2 = per-subcarrier power")
    norms = np.linalg.norm(bank.scan_weights, axis=1)
    if not np.allclose(norms, 1.0, rtol=1e-9):
        raise ValueError("scan weights must be unit norm")

    grids = np.zeros((n_dir, k_count, m_count), dtype=dtype)
    if scatterers:
        coeff = scatterer_coefficients(scatterers, bank).astype(dtype)  # (N_dir, L)
        u = np.stack([phase_grids(s, num, dtype)[0] for s in scatterers])  # (L, K)
        v = np.stack([phase_grids(s, num, dtype)[1] for s in scatterers])  # (L, M)
        for j in range(n_dir):
            grids[j] = (coeff[j][:, None] * u).T @ v

    if noise_mode == "off":
        return grids
    if rng is None:
        raise ValueError("rng required when noise is on")
    sigma = np.sqrt(num.noise_variance_w / 2.0)
    if noise_mode == "factored":
        noise = rng.normal(scale=sigma, size=(2, n_dir, k_count, m_count))
        combined = noise[0] + 1j * noise[1]
    elif noise_mode == "exact":
        n_rx = bank.scan_weights.shape[1]
        noise = rng.normal(scale=sigma, size=(2, n_rx, k_count, m_count))
        vec = noise[0] + 1j * noise[1]
        combined = np.tensordot(bank.scan_weights, vec, axes=(1, 0))
    else:
        raise ValueError(f"unknown noise_mode {noise_mode!r}")
    if symbols is not None:
        combined = combined * symbols.conj()
    grids += combined.astype(dtype)
    return grids
