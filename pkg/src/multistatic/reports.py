"""Delimited outputs and figure rendering.

All matrix dumps share one CSV convention: two leading comment lines
describing the axes (name, unit, start, step, count), then dense rows.
Rendering is a thin optional layer over these dumps; the numeric pipeline
never depends on it.
"""

from __future__ import annotations

import csv
import json
import time
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

RESULT_FIELDS = ["trial", "q", "mask_on", "tx_power_dbm", "mean_rcs_m2",
                 "gospa", "rmse", "detection_rate", "false_rate",
                 "missed_rate", "n_estimates"]
SWEEP_FIELDS = ["q", "mask_on", "n_trials", "mean_gospa", "stderr_gospa",
                "mean_rmse", "mean_detection_rate", "mean_false_rate",
                "mean_missed_rate", "mean_cardinality_error"]
DETECTION_FIELDS = ["trial_id", "cluster_id", "x_m", "y_m", "mass"]


def write_grid_csv(path, matrix: np.ndarray,
                   axis0: tuple[str, float, float],
                   axis1: tuple[str, float, float]) -> None:
    """Dense matrix dump; axisN = (name_with_unit, start, step)."""
    matrix = np.asarray(matrix)
    with open(path, "w", newline="") as f:
        f.write(f"# rows: {axis0[0]} start={axis0[1]:.9g} step={axis0[2]:.9g} "
                f"count={matrix.shape[0]}\n")
        f.write(f"# cols: {axis1[0]} start={axis1[1]:.9g} step={axis1[2]:.9g} "
                f"count={matrix.shape[1]}\n")
        writer = csv.writer(f)
        for row in matrix:
            writer.writerow([f"{v:.9g}" for v in row])


def read_grid_csv(path) -> tuple[np.ndarray, dict, dict]:
    """Read a matrix dump; returns (matrix, rows_axis, cols_axis)."""

    def parse_axis(line: str) -> dict:
        if not line.startswith("#"):
            raise ValueError(f"malformed header line: {line!r}")
        body = line.lstrip("#").strip()
        kind, rest = body.split(":", 1)
        tokens = rest.split()
        meta = {"kind": kind.strip(), "name": tokens[0]}
        for tok in tokens[1:]:
            key, val = tok.split("=")
            meta[key] = float(val) if key != "count" else int(val)
        return meta

    with open(path) as f:
        ax0 = parse_axis(f.readline())
        ax1 = parse_axis(f.readline())
        matrix = np.array([[float(v) for v in row] for row in csv.reader(f)])
    return matrix, ax0, ax1


def write_rows_csv(path, rows: list[dict], fields: list[str]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k)) for k in fields})


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.9g}"
    return v


def write_detections_csv(path, trial_results) -> None:
    rows = []
    for res in trial_results:
        for cid, (pos, mass) in enumerate(zip(res.detections.positions_m,
                                              res.detections.masses)):
            rows.append({"trial_id": res.trial_id, "cluster_id": cid,
                         "x_m": float(pos[0]), "y_m": float(pos[1]),
                         "mass": float(mass)})
    write_rows_csv(path, rows, DETECTION_FIELDS)


def write_manifest(path, config_path, config_hash: str, seed: int,
                   command: str, started: float, outputs: list[str]) -> None:
    from . import __version__

    manifest = {
        "config_path": str(config_path) if config_path else None,
        "config_sha256": config_hash,
        "master_seed": seed,
        "command": command,
        "version": __version__,
        "started_unix": started,
        "finished_unix": time.time(),
        "wall_time_s": time.time() - started,
        "outputs": sorted(str(o) for o in outputs),
    }
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    tmp.replace(path)


# --- figures --------------------------------------------------------------

def render_heatmap(matrix: np.ndarray, extent, out_path, title: str = "",
                   db_scale: bool = False, binary: bool = False) -> None:
    """Render a map dump as a PNG; extent = (x0, x1, y0, y1) in meters.

    ``matrix`` is indexed (x, y); it is transposed for display so x runs
    along the horizontal axis.
    """
    fig, ax = plt.subplots(figsize=(6.0, 5.0), dpi=150)
    img = matrix.T
    if binary:
        cmap = matplotlib.colors.ListedColormap(["tab:orange", "tab:green"])
        im = ax.imshow(img, origin="lower", extent=extent, cmap=cmap,
                       vmin=0, vmax=1, interpolation="nearest")
        fig.colorbar(im, ax=ax, ticks=[0, 1], label="reliable")
    else:
        if db_scale:
            floor = img[img > 0].min() if np.any(img > 0) else 1.0
            img = 10.0 * np.log10(np.maximum(img, floor))
            label = "intensity [dB]"
        else:
            label = "intensity"
        im = ax.imshow(img, origin="lower", extent=extent, cmap="viridis",
                       interpolation="nearest")
        fig.colorbar(im, ax=ax, label=label)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)


def render_sweep(cells, out_dir) -> list[Path]:
    """One line chart per metric as a function of the target count."""
    out_dir = Path(out_dir)
    metrics = [("mean_gospa", "GOSPA [m]"),
               ("mean_rmse", "RMSE [m]"),
               ("mean_detection_rate", "detection rate"),
               ("mean_false_rate", "false rate"),
               ("mean_cardinality_error", "cardinality error")]
    written = []
    by_mask: dict[int, list] = {}
    for c in cells:
        by_mask.setdefault(int(c.mask_on), []).append(c)
    for key, label in metrics:
        fig, ax = plt.subplots(figsize=(5.0, 3.8), dpi=150)
        for mask_on, group in sorted(by_mask.items(), reverse=True):
            group = sorted(group, key=lambda c: c.q)
            qs = [c.q for c in group]
            vals = [getattr(c, key) for c in group]
            style = "-o" if mask_on else "--s"
            name = "masks on" if mask_on else "masks off"
            ax.plot(qs, vals, style, label=name)
        ax.set_xlabel("number of targets")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = out_dir / f"sweep_{key}.png"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written


def write_pattern_csv(path, angles_rad: np.ndarray, gains_db: np.ndarray,
                      label: str) -> None:
    with open(path, "w", newline="") as f:
        f.write(f"# {label}\n")
        writer = csv.DictWriter(f, fieldnames=["angle_deg", "gain_db"])
        writer.writeheader()
        for a, g in zip(angles_rad, gains_db):
            writer.writerow({"angle_deg": f"{float(np.degrees(a)):.6g}",
                             "gain_db": f"{float(g):.6g}"})
