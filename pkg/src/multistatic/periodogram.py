"""Range-Doppler periodograms and range-angle map assembly.

The 2-D transform runs an FFT over OFDM symbols (Doppler) and an
inverse-direction transform over subcarriers (range), so propagation delays
land on positive range bins. Sizes need not be powers of two.
"""

from __future__ import annotations

import numpy as np
import scipy.fft

DEFAULT_KAISER_BETA = 3.0


def doppler_window(m: int, beta: float = DEFAULT_KAISER_BETA) -> np.ndarray:
    """Kaiser window normalized to unit mean square (noise-preserving)."""
    w = np.kaiser(m, beta)
    return w / np.sqrt(np.mean(w ** 2))


def compute_periodogram(grid: np.ndarray, k_fft: int, m_fft: int,
                        kaiser_beta: float = DEFAULT_KAISER_BETA,
                        window: np.ndarray | None = None) -> np.ndarray:
    """Squared-magnitude 2-D transform of one beamformed symbol grid.

    ``grid`` is (K, M) complex; the result is (k_fft, m_fft) real, scaled by
    1/(K*M). ``window`` overrides the default normalized Kaiser window along
    the symbol axis (pass np.ones(M) for a rectangular window).
    """
    k, m = grid.shape
    if k_fft < k or m_fft < m:
        raise ValueError("transform sizes must not truncate the grid")
    w = doppler_window(m, kaiser_beta) if window is None else np.asarray(window)
    if w.shape != (m,):
        raise ValueError("window length must match the symbol count")
    inner = scipy.fft.fft(grid * w, n=m_fft, axis=1)
    outer = scipy.fft.ifft(inner, n=k_fft, axis=0) * k_fft
    return (np.abs(outer) ** 2) / (k * m)


def notch_column_indices(m_fft: int, p0: int) -> np.ndarray:
    """Wrap-aware Doppler column indices with |frequency bin| <= p0."""
    p = np.arange(m_fft)
    folded = np.minimum(p, m_fft - p)
    return np.flatnonzero(folded <= p0)


def apply_doppler_notch(rd_map: np.ndarray, p0: int) -> np.ndarray:
    """Zero Doppler columns within the clutter guard band (copy)."""
    m_fft = rd_map.shape[-1]
    if not 0 <= p0 < m_fft / 2:
        raise ValueError("doppler guard must satisfy 0 <= p0 < m_fft/2")
    out = rd_map.copy()
    out[..., notch_column_indices(m_fft, p0)] = 0.0
    return out


def extract_range_profile(rd_map: np.ndarray, first_bin: int,
                          last_bin: int) -> tuple[np.ndarray, int]:
    """Peak-Doppler column of the range-gated map.

    Returns (profile over gated bins, peak Doppler index). The argmax scans
    the gated rows only; ties break on the lowest (range, Doppler) index.
    """
    if not 0 <= first_bin < last_bin <= rd_map.shape[0]:
        raise ValueError("empty or out-of-bounds range gate")
    gated = rd_map[first_bin:last_bin]
    flat = int(np.argmax(gated))
    p_hat = flat % gated.shape[1]
    return gated[:, p_hat].copy(), p_hat


def build_bistatic_map(profiles: list[np.ndarray]) -> np.ndarray:
    """Column-stack per-direction range profiles into a range-angle map."""
    lengths = {p.shape[0] for p in profiles}
    if len(lengths) != 1:
        raise ValueError("range profiles have mismatched lengths")
    return np.column_stack(profiles)
