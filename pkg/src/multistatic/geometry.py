"""Bistatic geometry: ranges, Doppler, frame transforms, range gating.

Conventions: positions are 2-D (x, y) in the global frame, meters.
A receiver's scan angle is measured from its array boresight; converting a
bistatic range to a receiver-target range additionally needs the angle
between the receiver->target ray and the receiver->transmitter baseline ray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SPEED_OF_LIGHT, OfdmNumerology


def wrap_angle(theta):
    """Wrap angle(s) to (-pi, pi]."""
    out = np.mod(np.asarray(theta) + np.pi, 2.0 * np.pi) - np.pi
    out = np.where(out == -np.pi, np.pi, out)
    if np.isscalar(theta) or np.ndim(theta) == 0:
        return float(out)
    return out


def bistatic_range(tx_pos, rx_pos, point):
    """Tx-to-point plus point-to-Rx distance. Broadcasts over leading dims."""
    tx = np.asarray(tx_pos, dtype=float)
    rx = np.asarray(rx_pos, dtype=float)
    p = np.asarray(point, dtype=float)
    r_t = np.linalg.norm(p - tx, axis=-1)
    r_r = np.linalg.norm(p - rx, axis=-1)
    out = r_t + r_r
    return float(out) if out.ndim == 0 else out


def bistatic_doppler(tx_pos, rx_pos, point, velocity, carrier_frequency_hz):
    """Doppler shift of a point scatterer; closing on both nodes -> positive.

    f_d = -(f_c / c) * d/dt (|p - tx| + |p - rx|).
    """
    tx = np.asarray(tx_pos, dtype=float)
    rx = np.asarray(rx_pos, dtype=float)
    p = np.asarray(point, dtype=float)
    v = np.asarray(velocity, dtype=float)
    d_t = p - tx
    d_r = p - rx
    n_t = np.linalg.norm(d_t, axis=-1)
    n_r = np.linalg.norm(d_r, axis=-1)
    if np.any(n_t == 0.0) or np.any(n_r == 0.0):
        raise ValueError("point coincides with the Tx or Rx position")
    range_rate = np.sum(v * d_t, axis=-1) / n_t + np.sum(v * d_r, axis=-1) / n_r
    out = -(carrier_frequency_hz / SPEED_OF_LIGHT) * range_rate
    return float(out) if np.ndim(out) == 0 else out


def bistatic_to_rx_range(r_bis, theta, baseline_m):
    """Convert a bistatic range to the target-to-Rx range on the ellipse.

    ``theta`` is the angle at the Rx between the target line of sight and the
    baseline ray toward the Tx; equivalent to the law-of-cosines solution
    r_R = (R^2 - L^2) / (2 (R - L cos(theta))).
    """
    r_bis = np.asarray(r_bis, dtype=float)
    theta = np.asarray(theta, dtype=float)
    # factored form avoids cancellation near the baseline: R - L cos(theta)
    # = (R - L) + 2 L sin^2(theta/2) and R^2 - L^2 = (R - L)(R + L)
    excess = r_bis - baseline_m
    half_denom = excess + 2.0 * baseline_m * np.sin(theta / 2.0) ** 2
    if np.any(half_denom <= 0.0):
        raise ValueError("non-positive denominator: bistatic range too small for this geometry")
    out = excess * (r_bis + baseline_m) / (2.0 * half_denom)
    return float(out) if out.ndim == 0 else out


def rx_to_bistatic_range(tx_pos, rx_pos, point):
    """Forward counterpart of :func:`bistatic_to_rx_range` (test oracle aid)."""
    return bistatic_range(tx_pos, rx_pos, point)


def local_to_global(rx_pos, boresight_rad, r, theta_scan):
    """Polar (range, scan angle from boresight) -> global Cartesian point."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta_scan, dtype=float) + boresight_rad
    x = rx_pos[0] + r * np.cos(theta)
    y = rx_pos[1] + r * np.sin(theta)
    return np.stack(np.broadcast_arrays(x, y), axis=-1)

def global_to_local(rx_pos, boresight_rad, point):
    """Inverse of :func:`local_to_global`: returns (range, scan angle)."""
    p = np.asarray(point, dtype=float)
    d = p - np.asarray(rx_pos, dtype=float)
    r = np.linalg.norm(d, axis=-1)
    theta = wrap_angle(np.arctan2(d[..., 1], d[..., 0]) - boresight_rad)
    return r, theta


@dataclass(frozen=True)
class BistaticPair:
    """Derived geometry of one Tx/Rx station pair with its range gate."""

    tx_index: int
    rx_index: int
    tx_position_m: tuple[float, float]
    rx_position_m: tuple[float, float]
    rx_boresight_rad: float
    baseline_m: float
    range_resolution_m: float
    max_bistatic_range_m: float
    min_bistatic_range_m: float
    first_bin: int   # K'_p: first usable bistatic range bin (inclusive)
    last_bin: int    # K_p,i: one past the last usable bin (exclusive)

    @property
    def n_range_bins(self) -> int:
        return self.last_bin - self.first_bin

    @property
    def baseline_angle_rad(self) -> float:
        """Global direction of the Rx -> Tx ray."""
        return math.atan2(self.tx_position_m[1] - self.rx_position_m[1],
                          self.tx_position_m[0] - self.rx_position_m[0])

    def range_axis_m(self):
        """Bistatic range of each gated map row."""
        return (self.first_bin + np.arange(self.n_range_bins)) * self.range_resolution_m


def make_pair(tx_index: int, rx_index: int, tx_bs, rx_bs,
              numerology: OfdmNumerology, k_fft: int) -> BistaticPair:
    """Build the gated-bin bookkeeping for one bistatic pair.

    The maximum bistatic range is held one range bin below the inter-symbol
    interference limit c*T_g + L, keeping the constraint strict.
    """
    if tx_index == rx_index:
        raise ValueError("a bistatic pair needs distinct Tx and Rx stations")
    baseline = math.dist(tx_bs.position_m, rx_bs.position_m)
    delta_r = SPEED_OF_LIGHT / (k_fft * numerology.subcarrier_spacing_hz)
    r_max = SPEED_OF_LIGHT * numerology.guard_time_s + baseline - delta_r
    first_bin = math.ceil(baseline * k_fft * numerology.subcarrier_spacing_hz / SPEED_OF_LIGHT)
    last_bin = math.floor(r_max * k_fft * numerology.subcarrier_spacing_hz / SPEED_OF_LIGHT)
    # the range transform has k_fft rows; beyond that, ranges alias
    if last_bin > k_fft:
        last_bin = k_fft
        r_max = min(r_max, (k_fft - 1) * delta_r)
    if first_bin >= last_bin:
        raise ValueError(
            f"empty range gate for pair ({tx_index},{rx_index}): "
            f"baseline {baseline:.1f} m leaves no usable bins"
        )
    return BistaticPair(
        tx_index=tx_index,
        rx_index=rx_index,
        tx_position_m=tuple(tx_bs.position_m),
        rx_position_m=tuple(rx_bs.position_m),
        rx_boresight_rad=rx_bs.boresight_rad,
        baseline_m=baseline,
        range_resolution_m=delta_r,
        max_bistatic_range_m=r_max,
        min_bistatic_range_m=baseline + delta_r,
        first_bin=first_bin,
        last_bin=last_bin,
    )


def all_pairs(config) -> list[BistaticPair]:
    """Every ordered (tx, rx) pair in the network, round-robin order."""
    k_fft, _ = config.padding.resolve(config.numerology)
    pairs = []
    for t, tx_bs in enumerate(config.base_stations):
        for i, rx_bs in enumerate(config.base_stations):
            if i == t:
                continue
            pairs.append(make_pair(t, i, tx_bs, rx_bs, config.numerology, k_fft))
    return pairs
