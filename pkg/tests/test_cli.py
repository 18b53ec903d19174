import dataclasses
import json

import pytest

from multistatic.cli import main
from multistatic.config import config_from_dict, save_config

from conftest import small_config


@pytest.fixture
def cfg_path(tmp_path):
    path = tmp_path / "scenario.json"
    save_config(small_config(), path)
    return path


def test_print_default_config_subcommand(capsys):
    assert main(["print-default-config"]) == 0
    out = capsys.readouterr().out
    cfg = config_from_dict(json.loads(out))
    assert len(cfg.base_stations) == 5


def test_run_print_default_config_flag(capsys):
    assert main(["run", "--print-default-config", "--fast"]) == 0
    cfg = config_from_dict(json.loads(capsys.readouterr().out))
    assert cfg.grid.nx == 351


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_run_small_scenario(tmp_path, cfg_path, capsys):
    out = tmp_path / "out"
    rc = main(["run", "--config", str(cfg_path), "--out", str(out),
               "--trials", "1", "--q", "1", "--seed", "3",
               "--dump-aggregated", str(out / "agg.csv"), "--render-map"])
    assert rc == 0
    for name in ("results.csv", "sweep.csv", "agg.csv", "detections.csv",
                 "aggregated_map.png", "manifest.json"):
        assert (out / name).exists(), name
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["master_seed"] == 3
    assert str(out / "results.csv") in manifest["outputs"]
    header = (out / "results.csv").read_text().splitlines()[0]
    assert header.startswith("trial,q,mask_on")


def test_run_byte_identical_across_invocations(tmp_path, cfg_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["run", "--config", str(cfg_path), "--out", str(out),
                     "--trials", "2", "--q", "1", "--seed", "5"]) == 0
    assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()
    assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()


def test_run_compare_masks_renders_sweep(tmp_path, cfg_path):
    out = tmp_path / "out"
    rc = main(["run", "--config", str(cfg_path), "--out", str(out),
               "--trials", "1", "--q", "1", "--compare-masks"])
    assert rc == 0
    assert (out / "sweep_mean_gospa.png").exists()
    lines = (out / "sweep.csv").read_text().splitlines()
    assert len(lines) == 3  # header + masks on + masks off


def test_run_invalid_config_exit_code(tmp_path, capsys):
    cfg = small_config()
    bad = dataclasses.replace(cfg, base_stations=cfg.base_stations[:1])
    path = tmp_path / "bad.json"
    save_config(bad, path)
    with pytest.raises(SystemExit) as exc:
        main(["run", "--config", str(path), "--trials", "1"])
    assert exc.value.code == 1
    assert "config error" in capsys.readouterr().err


def test_render_grid_csv(tmp_path, cfg_path, capsys):
    out = tmp_path / "out"
    main(["run", "--config", str(cfg_path), "--out", str(out),
          "--trials", "1", "--q", "1",
          "--dump-aggregated", str(out / "agg.csv")])
    capsys.readouterr()
    rc = main(["render", str(out / "agg.csv"), "--out", str(out)])
    assert rc == 0
    assert (out / "agg.png").exists()


def test_render_missing_file_exit_code(tmp_path, capsys):
    rc = main(["render", str(tmp_path / "absent.csv"), "--out", str(tmp_path)])
    assert rc == 2
    assert "cannot read" in capsys.readouterr().err


def test_dump_masks(tmp_path, cfg_path, capsys):
    out = tmp_path / "masks"
    rc = main(["dump-masks", "--config", str(cfg_path), "--out", str(out)])
    assert rc == 0
    written = list(out.glob("mask_tx*_rx*.csv"))
    assert len(written) == 6
    # masks render as binary PNGs
    rc = main(["render", str(written[0]), "--out", str(out), "--kind", "mask"])
    assert rc == 0
    capsys.readouterr()


def test_dump_patterns(tmp_path, cfg_path, capsys):
    out = tmp_path / "patterns"
    rc = main(["dump-patterns", "--config", str(cfg_path), "--out", str(out)])
    assert rc == 0
    assert (out / "pattern_tx.csv").exists()
    assert len(list(out.glob("pattern_scan_*.csv"))) == 23


def test_out_env_var(tmp_path, cfg_path, monkeypatch, capsys):
    target = tmp_path / "envout"
    monkeypatch.setenv("MULTISTATIC_OUT", str(target))
    rc = main(["dump-masks", "--config", str(cfg_path)])
    assert rc == 0
    assert any(target.glob("mask_*.csv"))
