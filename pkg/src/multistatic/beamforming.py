"""Array steering, wide-sector Tx beam design, Chebyshev-tapered scan bank.

Angles are measured from the array normal (boresight) of the owning station.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal.windows import chebwin


def steering(n_elements: int, theta) -> np.ndarray:
    """Half-wavelength ULA steering vector(s).

    Element n (0-based) carries phase pi * (n - (N-1)/2) * sin(theta).
    Scalar theta gives shape (N,); array theta gives shape theta.shape + (N,).
    """
    if n_elements < 1:
        raise ValueError("n_elements must be >= 1")
    n = np.arange(n_elements) - (n_elements - 1) / 2.0
    phase = np.pi * np.multiply.outer(np.sin(np.asarray(theta, dtype=float)), n)
    return np.exp(1j * phase)


@dataclass(frozen=True)
class BeamformerBank:
    """Immutable transmit beam + receive scan weights for one station layout."""

    tx_weights: np.ndarray          # (N_T,), ||w_T||^2 = P_avg
    scan_weights: np.ndarray        # (N_dir, N_R), each row unit norm
    scan_directions_rad: np.ndarray  # (N_dir,), from boresight

    def tx_gain(self, phi) -> np.ndarray:
        """EIRP factor |a(phi)^T w_T|^2 toward direction(s) phi."""
        g = steering(self.tx_weights.size, phi) @ self.tx_weights
        return np.abs(g) ** 2

    def rx_response(self, theta) -> np.ndarray:
        """(N_dir, ...) complex response w_{R,j}^T b(theta)."""
        b = steering(self.scan_weights.shape[1], theta)
        return self.scan_weights @ np.moveaxis(b, -1, 0)


def design_wide_tx_beam(n_elements: int, sector_rad: tuple[float, float],
                        p_avg: float, grid_points: int = 1024,
                        ridge: float = 1e-3) -> np.ndarray:
    """Least-squares flat-top beam over a sector, scaled to ||w||^2 = p_avg.

    Fits |a(phi)^T w| to 1 inside the sector and 0 outside on a dense angular
    grid, with a small ridge term for conditioning.
    """
    if n_elements == 1:
        return np.array([np.sqrt(p_avg)], dtype=complex)
    lo, hi = sector_rad
    phi = np.linspace(-np.pi / 2, np.pi / 2, grid_points)
    a = steering(n_elements, phi)                     # (G, N)
    desired = ((phi >= lo) & (phi <= hi)).astype(float)
    gram = a.conj().T @ a
    lam = ridge * np.trace(gram).real / n_elements
    w = np.linalg.solve(gram + lam * np.eye(n_elements), a.conj().T @ desired)
    w *= np.sqrt(p_avg) / np.linalg.norm(w)
    return w


def design_scan_bank(n_elements: int, start_rad: float, step_rad: float,
                     n_directions: int, sidelobe_db: float = 30.0) -> np.ndarray:
    """Conjugate-steering weights with a Dolph-Chebyshev taper, unit norm.

    Directions are start + j*step for j = 1..n_directions.
    Returns shape (n_directions, n_elements).
    """
    if n_directions < 1:
        raise ValueError("n_directions must be >= 1")
    directions = start_rad + step_rad * np.arange(1, n_directions + 1)
    base = steering(n_elements, directions).conj() / np.sqrt(n_elements)
    if n_elements > 1:
        with warnings.catch_warnings():
            # scipy warns about spectral-analysis use; this is array tapering
            warnings.simplefilter("ignore", UserWarning)
            taper = chebwin(n_elements, at=sidelobe_db)
        base = base * taper
    base /= np.linalg.norm(base, axis=1, keepdims=True)
    return base


def make_bank(n_tx: int, n_rx: int, scan, p_avg: float) -> BeamformerBank:
    """Bank for one station: wide Tx beam spanning the scan sector plus bank."""
    directions = scan.start_rad + scan.step_rad * np.arange(1, scan.n_directions + 1)
    half_bw = scan.beamwidth_rad / 2.0
    sector = (directions[0] - half_bw, directions[-1] + half_bw)
    return BeamformerBank(
        tx_weights=design_wide_tx_beam(n_tx, sector, p_avg),
        scan_weights=design_scan_bank(n_rx, scan.start_rad, scan.step_rad,
                                      scan.n_directions, scan.sidelobe_db),
        scan_directions_rad=directions,
    )
