"""Excision filtering, intensity-weighted density clustering, localization.

Map pixels surviving the excision filter are clustered with a weighted
DBSCAN: each pixel counts as ceil(value / gamma) duplicated points, so the
weakest surviving pixel weighs exactly 1. Weights are never materialized as
copies; core status sums duplication weights inside the radius.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .config import GridConfig


@dataclass(frozen=True)
class ClusterParams:
    eps_m: float
    min_weight: float


@dataclass(frozen=True)
class DetectionSet:
    positions_m: np.ndarray   # (n, 2)
    masses: np.ndarray        # (n,) total amplitude per cluster

    def __len__(self) -> int:
        return self.positions_m.shape[0]


def excise(cart_map: np.ndarray, gamma_d: float) -> tuple[np.ndarray, float]:
    """Zero pixels below gamma_d * peak; returns (filtered map, threshold)."""
    if not 0.0 < gamma_d < 1.0:
        raise ValueError("gamma_d must lie in (0, 1)")
    peak = float(cart_map.max(initial=0.0))
    if peak <= 0.0:
        return np.zeros_like(cart_map), 0.0
    gamma = gamma_d * peak
    return np.where(cart_map >= gamma, cart_map, 0.0), gamma


def duplication_weights(values: np.ndarray, gamma: float) -> np.ndarray:
    """Integer duplication count per pixel: ceil(value / gamma)."""
    return np.ceil(values / gamma).astype(np.int64)


def cluster_points(points: np.ndarray, weights: np.ndarray,
                   params: ClusterParams) -> list[np.ndarray]:
    """Weighted DBSCAN on explicit points; returns index arrays per cluster.

    A point is core iff the summed weight within eps (itself included) is at
    least min_weight. Clusters grow from cores by the usual reachability;
    iteration order is the given point order, so labels are deterministic.
    """
    n = points.shape[0]
    if n == 0:
        return []
    tree = cKDTree(points)
    neighbors = tree.query_ball_point(points, r=params.eps_m)
    in_reach = np.array([weights[nb].sum() for nb in neighbors])
    core = in_reach >= params.min_weight

    labels = np.full(n, -1, dtype=np.int64)
    clusters: list[list[int]] = []
    for seed in range(n):
        if labels[seed] != -1 or not core[seed]:
            continue
        cid = len(clusters)
        members = [seed]
        labels[seed] = cid
        queue = deque([seed])
        while queue:
            p = queue.popleft()
            for q in neighbors[p]:
                if labels[q] == -1:
                    labels[q] = cid
                    members.append(q)
                    if core[q]:
                        queue.append(q)
        clusters.append(members)
    return [np.array(sorted(m), dtype=np.intp) for m in clusters]


def map_pixels(cart_map: np.ndarray, grid: GridConfig) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero pixel centers (row-major order) and their values."""
    ii, jj = np.nonzero(cart_map > 0.0)
    x = grid.x_coords()[ii]
    y = grid.y_coords()[jj]
    return np.column_stack([x, y]), cart_map[ii, jj]


def cluster(cart_map: np.ndarray, grid: GridConfig, gamma: float,
            params: ClusterParams) -> tuple[list[np.ndarray], np.ndarray, np.ndarray]:
    """Cluster an excised map; returns (clusters, points, values)."""
    points, values = map_pixels(cart_map, grid)
    if points.shape[0] == 0:
        return [], points, values
    weights = duplication_weights(values, gamma)
    return cluster_points(points, weights, params), points, values


def estimate_positions(clusters: list[np.ndarray], points: np.ndarray,
                       values: np.ndarray) -> DetectionSet:
    """Amplitude-weighted centroid of every cluster."""
    positions = np.zeros((len(clusters), 2))
    masses = np.zeros(len(clusters))
    for k, members in enumerate(clusters):
        v = values[members]
        mass = v.sum()
        assert mass > 0.0, "cluster with zero amplitude cannot survive excision"
        positions[k] = (points[members] * v[:, None]).sum(axis=0) / mass
        masses[k] = mass
    return DetectionSet(positions_m=positions, masses=masses)


def detect(cart_map: np.ndarray, grid: GridConfig, gamma_d: float,
           params: ClusterParams) -> DetectionSet:
    """Excise, cluster, and localize in one call."""
    excised, gamma = excise(cart_map, gamma_d)
    if gamma == 0.0:
        return DetectionSet(positions_m=np.zeros((0, 2)), masses=np.zeros(0))
    clusters, points, values = cluster(excised, grid, gamma, params)
    return estimate_positions(clusters, points, values)
