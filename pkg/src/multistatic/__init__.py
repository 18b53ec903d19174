"""Multistatic MIMO-OFDM sensing simulator.

Synthesizes bistatic radar returns for a network of base stations, builds
per-receiver range-angle maps, fuses the reliable map regions over a
round-robin transmitter schedule, detects and localizes targets by weighted
density clustering, and scores the result with GOSPA and RMSE.
"""

__version__ = "0.1.0"

from .config import (
    ScenarioConfig,
    OfdmNumerology,
    BaseStation,
    Target,
    ClutterPoint,
    default_config,
    derive_numerology,
    load_config,
    save_config,
    validate,
)
from .geometry import (
    BistaticPair,
    all_pairs,
    bistatic_doppler,
    bistatic_range,
    bistatic_to_rx_range,
    global_to_local,
    local_to_global,
    make_pair,
)
from .beamforming import BeamformerBank, design_scan_bank, design_wide_tx_beam, make_bank, steering
from .channel import ScattererRealization, draw_scatterers, draw_symbols, synthesize_beamformed
from .periodogram import (
    apply_doppler_notch,
    build_bistatic_map,
    compute_periodogram,
    extract_range_profile,
)
from .reliability import apply_mask, build_mask, resolution_cell_area
from .fusion import (
    CartesianResampler,
    ThresholdSpec,
    aggregate_rounds,
    fuse_round,
    resample_to_cartesian,
    threshold_map,
)
from .detection import ClusterParams, DetectionSet, cluster_points, detect, estimate_positions, excise
from .metrics import GospaResult, brute_force_gospa, gospa, rmse
from .harness import (
    Precomputed,
    SweepResult,
    TrialSpec,
    draw_trial,
    run_sweep,
    run_trial,
    search_time,
)
