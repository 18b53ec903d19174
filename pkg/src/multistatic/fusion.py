"""Pixel thresholding, polar-to-Cartesian resampling, and map fusion.

Resampling is inverse-mapped: every Cartesian pixel center is converted to
its exact (bistatic range, scan angle) coordinate in a pair's frame and the
range-angle map is interpolated bilinearly there. The interpolation stencil
depends only on geometry, so it is precomputed once per pair and reused for
every Monte Carlo trial.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import GridConfig
from .geometry import BistaticPair, wrap_angle


@dataclass(frozen=True)
class ThresholdSpec:
    """Noise-floor test threshold for one range-angle map."""

    far: float
    search_space_size: int
    noise_variance_w: float

    @property
    def p_fa_point(self) -> float:
        return self.far / self.search_space_size

    @property
    def eta(self) -> float:
        return -self.noise_variance_w * np.log(self.p_fa_point)


def threshold_map(bistatic_map: np.ndarray, spec: ThresholdSpec) -> np.ndarray:
    """Zero sub-threshold pixels; keep supra-threshold soft values."""
    return np.where(bistatic_map >= spec.eta, bistatic_map, 0.0)


class CartesianResampler:
    """Precomputed bilinear stencil from one pair's map onto the grid."""

    def __init__(self, pair: BistaticPair, scan, grid: GridConfig):
        x = grid.x_coords()
        y = grid.y_coords()
        xx, yy = np.meshgrid(x, y, indexing="ij")
        tx = np.asarray(pair.tx_position_m)
        rx = np.asarray(pair.rx_position_m)
        r_bis = (np.hypot(xx - tx[0], yy - tx[1])
                 + np.hypot(xx - rx[0], yy - rx[1]))
        theta = wrap_angle(np.arctan2(yy - rx[1], xx - rx[0]) - pair.rx_boresight_rad)

        # fractional (row, column) coordinates in the gated map
        fr = r_bis / pair.range_resolution_m - pair.first_bin
        fc = (theta - scan.directions_rad[0]) / scan.step_rad
        n_rows = pair.n_range_bins
        n_cols = scan.n_directions
        valid = (fr >= 0.0) & (fr <= n_rows - 1) & (fc >= 0.0) & (fc <= n_cols - 1)

        self.shape = (grid.nx, grid.ny)
        self.map_shape = (n_rows, n_cols)
        self.valid = valid
        i0 = np.clip(np.floor(fr[valid]).astype(np.intp), 0, n_rows - 2 if n_rows > 1 else 0)
        j0 = np.clip(np.floor(fc[valid]).astype(np.intp), 0, n_cols - 2 if n_cols > 1 else 0)
        di = fr[valid] - i0
        dj = fc[valid] - j0
        i1 = np.minimum(i0 + 1, n_rows - 1)
        j1 = np.minimum(j0 + 1, n_cols - 1)
        self._flat = (i0 * n_cols + j0, i0 * n_cols + j1,
                      i1 * n_cols + j0, i1 * n_cols + j1)
        self._weights = ((1 - di) * (1 - dj), (1 - di) * dj,
                         di * (1 - dj), di * dj)

    def __call__(self, bistatic_map: np.ndarray) -> np.ndarray:
        if bistatic_map.shape != self.map_shape:
            raise ValueError(
                f"map shape {bistatic_map.shape} does not match stencil {self.map_shape}")
        flat = bistatic_map.ravel()
        vals = sum(w * flat[idx] for idx, w in zip(self._flat, self._weights))
        out = np.zeros(self.shape)
        out[self.valid] = vals
        return out

    def coverage(self) -> np.ndarray:
        """1 where this pair's map reaches the grid pixel, else 0."""
        return self.valid.astype(np.float64)


def resample_to_cartesian(bistatic_map: np.ndarray, pair: BistaticPair,
                          scan, grid: GridConfig) -> np.ndarray:
    """One-shot resampling (builds a throwaway stencil)."""
    return CartesianResampler(pair, scan, grid)(bistatic_map)


def fuse_round(maps: list[np.ndarray]) -> np.ndarray:
    """Soft map of one Tx round: element-wise sum of the receiver maps."""
    if not maps:
        raise ValueError("no maps to fuse")
    shapes = {m.shape for m in maps}
    if len(shapes) != 1:
        raise ValueError("maps to fuse must share a grid")
    out = np.zeros_like(maps[0])
    for m in maps:
        out += m
    return out


def aggregate_rounds(soft_maps: list[np.ndarray], expected_rounds: int | None = None) -> np.ndarray:
    """Aggregated map: element-wise sum over all transmitter rounds."""
    if expected_rounds is not None and len(soft_maps) != expected_rounds:
        raise ValueError(f"expected {expected_rounds} round maps, got {len(soft_maps)}")
    return fuse_round(soft_maps)
