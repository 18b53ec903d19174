"""Geometry-only reliability masks for selective fusion.

A map cell is reliable when the Cartesian footprint of its resolution cell
(one range bin by one beamwidth, mapped through the ellipse range conversion)
has area below a threshold. Near the baseline the footprint balloons, so
those cells are masked out before fusion.
"""

from __future__ import annotations

import numpy as np

from .geometry import BistaticPair, wrap_angle

_INVALID = np.inf  # sentinel area for cells outside the valid ellipse geometry


def _corner_points(pair: BistaticPair, r_bis, theta_scan):
    """Cartesian corner for given bistatic range(s) and local scan angle(s).

    Returns (x, y, valid); invalid where the ellipse conversion breaks down.
    """
    r_bis = np.asarray(r_bis, dtype=float)
    theta_scan = np.asarray(theta_scan, dtype=float)
    global_angle = pair.rx_boresight_rad + theta_scan
    psi = wrap_angle(global_angle - pair.baseline_angle_rad)
    denom = 2.0 * (r_bis - pair.baseline_m * np.cos(psi))
    valid = (r_bis > pair.baseline_m) & (denom > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r_r = (r_bis ** 2 - pair.baseline_m ** 2) / denom
    valid &= np.isfinite(r_r) & (r_r > 0.0)
    x = pair.rx_position_m[0] + r_r * np.cos(global_angle)
    y = pair.rx_position_m[1] + r_r * np.sin(global_angle)
    return x, y, valid


def resolution_cell_area(pair: BistaticPair, r_bis, theta_scan,
                         delta_r: float, delta_theta: float):
    """Quadrilateral footprint area of a (range, angle) resolution cell.

    The four corners are (r_bis +/- delta_r/2, theta +/- delta_theta/2)
    mapped through the ellipse conversion, ordered counter-clockwise around
    the cell; the area is the absolute shoelace value. Cells with any corner
    outside the valid geometry get infinite area (never reliable).
    """
    offsets = [(-0.5, -0.5), (-0.5, +0.5), (+0.5, +0.5), (+0.5, -0.5)]
    xs, ys, valid = [], [], None
    for dr, dt in offsets:
        x, y, ok = _corner_points(pair, np.asarray(r_bis) + dr * delta_r,
                                  np.asarray(theta_scan) + dt * delta_theta)
        xs.append(x)
        ys.append(y)
        valid = ok if valid is None else (valid & ok)
    area = np.zeros_like(np.asarray(xs[0], dtype=float))
    for i in range(4):
        j = (i + 1) % 4
        area = area + xs[i] * ys[j] - xs[j] * ys[i]
    area = 0.5 * np.abs(area)
    out = np.where(valid, area, _INVALID)
    return float(out) if out.ndim == 0 else out


def build_mask(pair: BistaticPair, scan, gamma_res_m2: float) -> np.ndarray:
    """Binary (n_range_bins, N_dir) mask: 1 where the cell area < threshold."""
    if gamma_res_m2 <= 0:
        raise ValueError("gamma_res must be > 0")
    ranges = pair.range_axis_m()
    directions = scan.directions_rad
    area = resolution_cell_area(
        pair,
        ranges[:, None],
        directions[None, :],
        pair.range_resolution_m,
        scan.beamwidth_rad,
    )
    return (area < gamma_res_m2).astype(np.float64)


def apply_mask(bistatic_map: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Element-wise product of a range-angle map and its reliability mask."""
    if bistatic_map.shape != mask.shape:
        raise ValueError(
            f"map shape {bistatic_map.shape} does not match mask shape {mask.shape}")
    return bistatic_map * mask


class MaskCache:
    """Per-pair mask cache keyed by the pair geometry (masks are pure)."""

    def __init__(self):
        self._store: dict = {}

    def get(self, pair: BistaticPair, scan, gamma_res_m2: float) -> np.ndarray:
        key = (pair.tx_position_m, pair.rx_position_m, pair.rx_boresight_rad,
               pair.first_bin, pair.last_bin, pair.range_resolution_m,
               scan.start_rad, scan.step_rad, scan.n_directions,
               scan.beamwidth_rad, gamma_res_m2)
        if key not in self._store:
            self._store[key] = build_mask(pair, scan, gamma_res_m2)
        return self._store[key]
