"""Command-line entry point.

Subcommands: run, render, dump-masks, dump-patterns, print-default-config.
The output directory defaults to ./multistatic-out and can be overridden by
--out or the MULTISTATIC_OUT environment variable.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .beamforming import steering
from .config import (
    config_json,
    default_config,
    load_config,
    validate,
)
from .geometry import all_pairs
from .harness import Precomputed, draw_trial, run_sweep, run_trial
from .reports import (
    RESULT_FIELDS,
    SWEEP_FIELDS,
    read_grid_csv,
    render_heatmap,
    render_sweep,
    write_detections_csv,
    write_grid_csv,
    write_manifest,
    write_pattern_csv,
    write_rows_csv,
)

EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_INTERNAL = 3


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("MULTISTATIC_OUT") or "multistatic-out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load(args):
    if args.config:
        config = load_config(args.config)
    else:
        config = default_config(fast_grid=args.fast)
    if args.fast and args.config:
        config = dataclasses.replace(
            config, grid=dataclasses.replace(config.grid, nx=351, ny=351,
                                             cell_x_m=0.2, cell_y_m=0.2))
    result = validate(config)
    if not result:
        for v in result.violations:
            print(f"config error: {v}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    return config


def _parse_sweep(expr: str) -> list[int]:
    # "q=1..5" or "q=1,3,5"
    key, _, spec = expr.partition("=")
    if key.strip() != "q":
        raise ValueError(f"unsupported sweep axis {key!r}")
    spec = spec.strip()
    if ".." in spec:
        lo, hi = spec.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in spec.split(",")]


def cmd_run(args) -> int:
    started = time.time()
    if args.print_default_config:
        print(config_json(default_config(fast_grid=args.fast)))
        return 0
    config = _load(args)
    seed = args.seed if args.seed is not None else config.rng_seed
    out = _out_dir(args)
    outputs = []

    q_values = _parse_sweep(args.sweep) if args.sweep else [args.q]
    all_cells = []
    all_rows = []
    mask_settings = [True, False] if args.compare_masks else [args.masks]
    for mask_on in mask_settings:
        sweep = run_sweep(config, q_values, args.trials, args.rcs_mean,
                          mask_on=mask_on, master_seed=seed,
                          workers=args.workers)
        all_cells.extend(sweep.cells)
        all_rows.extend(sweep.trials)

    results_csv = out / "results.csv"
    write_rows_csv(results_csv, all_rows, RESULT_FIELDS)
    outputs.append(results_csv)
    sweep_csv = out / "sweep.csv"
    write_rows_csv(sweep_csv, [dataclasses.asdict(c) for c in all_cells],
                   SWEEP_FIELDS)
    outputs.append(sweep_csv)
    if len(q_values) > 1 or args.compare_masks:
        outputs.extend(render_sweep(all_cells, out))

    if args.dump_aggregated or args.render_map:
        pre = Precomputed(config)
        trial = draw_trial(q_values[0] * 1_000_000, q_values[0], args.rcs_mean,
                           seed, config.min_target_separation_m)
        res = run_trial(pre, trial, mask_on=mask_settings[0], master_seed=seed,
                        keep_map=True)
        grid = config.grid
        x = grid.x_coords()
        y = grid.y_coords()
        map_csv = Path(args.dump_aggregated) if args.dump_aggregated \
            else out / "aggregated_map.csv"
        write_grid_csv(map_csv, res.aggregated_map,
                       ("x_m", float(x[0]), grid.cell_x_m),
                       ("y_m", float(y[0]), grid.cell_y_m))
        outputs.append(map_csv)
        det_csv = out / "detections.csv"
        write_detections_csv(det_csv, [res])
        outputs.append(det_csv)
        if args.render_map:
            png = out / "aggregated_map.png"
            render_heatmap(res.aggregated_map,
                           (float(x[0]), float(x[-1]), float(y[0]), float(y[-1])),
                           png, title="aggregated map", db_scale=args.db)
            outputs.append(png)

    config_text = config_json(config)
    manifest = out / "manifest.json"
    write_manifest(manifest, args.config,
                   hashlib.sha256(config_text.encode()).hexdigest(),
                   seed, " ".join(sys.argv), started, outputs)
    print(f"wrote {len(outputs)} outputs to {out}")
    return 0


def cmd_render(args) -> int:
    out = _out_dir(args)
    src = Path(args.input)
    try:
        if src.name.startswith("sweep") or args.kind == "sweep":
            import csv as _csv
            from types import SimpleNamespace

            with open(src) as f:
                cells = [SimpleNamespace(**{k: (int(v) if k in ("q", "mask_on", "n_trials")
                                               else float(v))
                                            for k, v in row.items()})
                         for row in _csv.DictReader(f)]
            written = render_sweep(cells, out)
            print("\n".join(str(w) for w in written))
            return 0
        matrix, ax0, ax1 = read_grid_csv(src)
    except (OSError, ValueError, KeyError) as err:
        print(f"cannot read {src}: {err}", file=sys.stderr)
        return EXIT_IO
    extent = (ax0["start"], ax0["start"] + ax0["step"] * (ax0["count"] - 1),
              ax1["start"], ax1["start"] + ax1["step"] * (ax1["count"] - 1))
    png = out / (src.stem + ".png")
    binary = args.kind == "mask" or set(np.unique(matrix)) <= {0.0, 1.0}
    render_heatmap(matrix, extent, png, title=src.stem, db_scale=args.db,
                   binary=binary)
    print(str(png))
    return 0


def cmd_dump_masks(args) -> int:
    config = _load(args)
    out = _out_dir(args)
    from .reliability import build_mask

    for pair in all_pairs(config):
        mask = build_mask(pair, config.scan, config.detection.gamma_res_m2)
        path = out / f"mask_tx{pair.tx_index}_rx{pair.rx_index}.csv"
        write_grid_csv(path, mask,
                       ("bistatic_range_m", pair.first_bin * pair.range_resolution_m,
                        pair.range_resolution_m),
                       ("scan_angle_deg", float(np.degrees(config.scan.directions_rad[0])),
                        float(np.degrees(config.scan.step_rad))))
        print(str(path))
    return 0


def cmd_dump_patterns(args) -> int:
    config = _load(args)
    out = _out_dir(args)
    pre = Precomputed(config)
    bank = pre.bank_for(pre.pairs[0])
    phi = np.linspace(-np.pi / 2, np.pi / 2, 1801)

    tx_gain = bank.tx_gain(phi)
    ref = tx_gain.max()
    path = out / "pattern_tx.csv"
    write_pattern_csv(path, phi, 10 * np.log10(np.maximum(tx_gain / ref, 1e-12)),
                      "wide transmit beam, gain relative to peak")
    print(str(path))
    b = steering(bank.scan_weights.shape[1], phi)
    for j, w in enumerate(bank.scan_weights):
        g = np.abs(b @ w) ** 2
        path = out / f"pattern_scan_{j:02d}.csv"
        write_pattern_csv(path, phi, 10 * np.log10(np.maximum(g / g.max(), 1e-12)),
                          f"scan beam {j}, "
                          f"{np.degrees(bank.scan_directions_rad[j]):.1f} deg")
    print(f"wrote {bank.scan_weights.shape[0]} scan patterns to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multistatic",
                                     description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON scenario config path")
        p.add_argument("--out", help="output directory")
        p.add_argument("--fast", action="store_true",
                       help="coarse 351x351 grid at 0.2 m")

    run = sub.add_parser("run", help="single run or Monte Carlo sweep")
    common(run)
    run.add_argument("--print-default-config", action="store_true")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--trials", type=int, default=50)
    run.add_argument("--q", type=int, default=3, help="number of targets")
    run.add_argument("--sweep", help='sweep axis, e.g. "q=1..5"')
    run.add_argument("--rcs-mean", type=float, default=0.5)
    run.add_argument("--masks", action=argparse.BooleanOptionalAction, default=True,
                     help="apply reliability masks")
    run.add_argument("--compare-masks", action="store_true",
                     help="run both with and without reliability masks")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--dump-aggregated", metavar="PATH",
                     help="write one aggregated map CSV")
    run.add_argument("--render-map", action="store_true",
                     help="also render the aggregated map PNG")
    run.add_argument("--db", action="store_true", help="dB color scale")
    run.set_defaults(func=cmd_run)

    render = sub.add_parser("render", help="render a CSV dump to PNG")
    render.add_argument("input")
    render.add_argument("--out")
    render.add_argument("--kind", choices=["map", "mask", "sweep"], default="map")
    render.add_argument("--db", action="store_true")
    render.set_defaults(func=cmd_render)

    masks = sub.add_parser("dump-masks", help="write reliability mask CSVs")
    common(masks)
    masks.set_defaults(func=cmd_dump_masks)

    patterns = sub.add_parser("dump-patterns", help="write beam pattern CSVs")
    common(patterns)
    patterns.set_defaults(func=cmd_dump_patterns)

    default = sub.add_parser("print-default-config",
                             help="emit the built-in default config as JSON")
    default.add_argument("--fast", action="store_true")
    default.set_defaults(func=lambda a: (print(config_json(
        default_config(fast_grid=a.fast))), 0)[1])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    except AssertionError as err:
        print(f"internal assertion failed: {err}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
