import math

import numpy as np
import pytest

from multistatic.config import (
    BaseStation,
    DetectionConfig,
    GridConfig,
    ScanConfig,
    ScenarioConfig,
    Target,
    derive_numerology,
)


def _boresight(pos):
    # 0.0 - x avoids -0.0, which would wrap atan2 to -pi (out of range)
    return math.atan2(0.0 - pos[1], 0.0 - pos[0])


def small_numerology(tx_power_dbm=20.0):
    # 480 kHz spacing, 128 subcarriers, 48 symbols: coarse but fast.
    # The long guard stretches the scan so target Doppler shifts land well
    # outside the clutter notch despite the short symbol count.
    spacing = 480e3
    symbols = 48
    guard = 20e-6
    return derive_numerology(
        carrier_frequency_hz=28e9,
        subcarrier_spacing_hz=spacing,
        active_subcarriers=128,
        symbols=symbols,
        scan_duration_s=symbols * (1.0 / spacing + guard),
        tx_power_dbm=tx_power_dbm,
        noise_figure_db=13.0,
    )


def small_config(targets=(), clutter=(), tx_power_dbm=20.0, seed=0):
    stations = tuple(
        BaseStation(position_m=p, tx_elements=12, rx_elements=12,
                    boresight_rad=_boresight(p))
        for p in ((0.0, 30.0), (-30.0, 0.0), (30.0, 0.0))
    )
    return ScenarioConfig(
        numerology=small_numerology(tx_power_dbm),
        base_stations=stations,
        targets=tuple(targets),
        clutter=tuple(clutter),
        scan=ScanConfig(start_rad=math.radians(-60.0), step_rad=math.radians(5.0),
                        n_directions=23, beamwidth_rad=math.radians(5.0)),
        detection=DetectionConfig(cluster_min_weight=10.0, doppler_guard_bins=1),
        grid=GridConfig(nx=71, ny=71, cell_x_m=1.0, cell_y_m=1.0),
        rng_seed=seed,
    )


@pytest.fixture
def config():
    return small_config()


@pytest.fixture
def config_one_target():
    return small_config(targets=[Target(position_m=(5.0, -8.0),
                                        velocity_mps=(12.0, -7.0),
                                        mean_rcs_m2=1.0)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
