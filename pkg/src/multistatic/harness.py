"""Round-robin scheduling, Monte Carlo trials, and sweep aggregation.

Randomness is keyed: every draw comes from a substream seeded by
(master seed, trial, stage, tx, rx), so results are bit-identical no matter
how trials are distributed over workers.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .beamforming import BeamformerBank, design_scan_bank, design_wide_tx_beam, make_bank
from .channel import draw_scatterers
from .config import ClutterPoint, ScenarioConfig, Target, validate
from .detection import ClusterParams, DetectionSet, detect
from .fusion import CartesianResampler, ThresholdSpec, aggregate_rounds, fuse_round, threshold_map
from .geometry import BistaticPair, all_pairs
from .metrics import GospaResult, gospa
from .pipeline import range_angle_map_fast, range_angle_map_reference
from .reliability import apply_mask, build_mask

_STAGE_SCENE = 0
_STAGE_SCATTER = 1
_STAGE_NOISE = 2

TARGET_AREA_M = 70.0     # targets drawn in this square, centered at origin
CLUTTER_AREA_M = 120.0   # static clutter drawn in the monitored square
N_CLUTTER = 25
VELOCITY_MAX_MPS = 20.0


def substream(master_seed: int, trial_id: int, stage: int,
              tx: int = 0, rx: int = 0) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=(master_seed, trial_id, stage, tx, rx)))


@dataclass(frozen=True)
class TrialSpec:
    trial_id: int
    targets: tuple[Target, ...]
    clutter: tuple[ClutterPoint, ...]


def draw_trial(trial_id: int, q: int, mean_rcs_m2: float, master_seed: int,
               min_separation_m: float = 1.0,
               n_clutter: int = N_CLUTTER) -> TrialSpec:
    """Random scene: q separated targets plus static clutter."""
    rng = substream(master_seed, trial_id, _STAGE_SCENE)
    half = TARGET_AREA_M / 2.0
    positions: list[tuple[float, float]] = []
    while len(positions) < q:
        cand = tuple(rng.uniform(-half, half, size=2))
        if all(np.hypot(cand[0] - p[0], cand[1] - p[1]) >= min_separation_m
               for p in positions):
            positions.append(cand)
    targets = tuple(
        Target(position_m=pos,
               velocity_mps=tuple(rng.uniform(-VELOCITY_MAX_MPS, VELOCITY_MAX_MPS, size=2)),
               mean_rcs_m2=mean_rcs_m2)
        for pos in positions
    )
    ch = CLUTTER_AREA_M / 2.0
    clutter = tuple(
        ClutterPoint(position_m=tuple(rng.uniform(-ch, ch, size=2)),
                     mean_rcs_m2=mean_rcs_m2)
        for _ in range(n_clutter)
    )
    return TrialSpec(trial_id=trial_id, targets=targets, clutter=clutter)


class Precomputed:
    """Everything reusable across trials: pairs, banks, masks, stencils."""

    def __init__(self, config: ScenarioConfig):
        result = validate(config)
        if not result:
            raise ValueError("invalid config:\n" + "\n".join(result.violations))
        self.config = config
        self.pairs: list[BistaticPair] = all_pairs(config)
        p_avg = config.numerology.per_subcarrier_power_w
        # identical stations share one bank; build per distinct (N_T, N_R)
        self._banks: dict[tuple[int, int], BeamformerBank] = {}
        for bs in config.base_stations:
            key = (bs.tx_elements, bs.rx_elements)
            if key not in self._banks:
                self._banks[key] = make_bank(bs.tx_elements, bs.rx_elements,
                                             config.scan, p_avg)
        self.masks = [build_mask(p, config.scan, config.detection.gamma_res_m2)
                      for p in self.pairs]
        self.resamplers = [CartesianResampler(p, config.scan, config.grid)
                           for p in self.pairs]
        self.thresholds = [
            ThresholdSpec(far=config.detection.far,
                          search_space_size=p.n_range_bins * config.scan.n_directions,
                          noise_variance_w=config.numerology.noise_variance_w)
            for p in self.pairs
        ]
        eps = config.detection.cluster_eps
        if config.detection.cluster_eps_unit == "px":
            eps *= config.grid.cell_x_m
        self.cluster_params = ClusterParams(eps_m=eps,
                                            min_weight=config.detection.cluster_min_weight)

    def bank_for(self, pair: BistaticPair) -> BeamformerBank:
        tx_bs = self.config.base_stations[pair.tx_index]
        rx_bs = self.config.base_stations[pair.rx_index]
        key = (tx_bs.tx_elements, rx_bs.rx_elements)
        if key in self._banks:
            return self._banks[key]
        p_avg = self.config.numerology.per_subcarrier_power_w
        bank = BeamformerBank(
            tx_weights=design_wide_tx_beam(
                tx_bs.tx_elements,
                (float(self.config.scan.directions_rad[0] - self.config.scan.beamwidth_rad / 2),
                 float(self.config.scan.directions_rad[-1] + self.config.scan.beamwidth_rad / 2)),
                p_avg),
            scan_weights=design_scan_bank(rx_bs.rx_elements, self.config.scan.start_rad,
                                          self.config.scan.step_rad,
                                          self.config.scan.n_directions,
                                          self.config.scan.sidelobe_db),
            scan_directions_rad=np.asarray(self.config.scan.directions_rad),
        )
        self._banks[key] = bank
        return bank


@dataclass
class TrialResult:
    trial_id: int
    n_targets: int
    detections: DetectionSet
    score: GospaResult
    truth: np.ndarray
    aggregated_map: np.ndarray | None = None

    @property
    def n_estimates(self) -> int:
        return len(self.detections)


def run_trial(pre: Precomputed, trial: TrialSpec, mask_on: bool = True,
              master_seed: int | None = None, use_fast: bool = True,
              noise: bool = True, keep_map: bool = False) -> TrialResult:
    """Full pipeline for one Monte Carlo trial.

    Every station transmits once; all others receive. Per pair: synthesize,
    periodogram, notch, range-angle map, threshold, mask, resample; fuse per
    round, aggregate, excise, cluster, localize, score.
    """
    config = pre.config
    if master_seed is None:
        master_seed = config.rng_seed
    scene_config = dataclasses.replace(config, targets=trial.targets,
                                       clutter=trial.clutter)
    n_stations = len(config.base_stations)

    round_maps = []
    for t in range(n_stations):
        rx_maps = []
        for pair, mask, resampler, spec in zip(pre.pairs, pre.masks,
                                               pre.resamplers, pre.thresholds):
            if pair.tx_index != t:
                continue
            bank = pre.bank_for(pair)
            scatter_rng = substream(master_seed, trial.trial_id, _STAGE_SCATTER,
                                    pair.tx_index, pair.rx_index)
            scatterers = draw_scatterers(scene_config, pair, scatter_rng)
            noise_rng = substream(master_seed, trial.trial_id, _STAGE_NOISE,
                                  pair.tx_index, pair.rx_index)
            if use_fast:
                ra_map = range_angle_map_fast(scene_config, pair, scatterers,
                                              bank, noise_rng, noise=noise)
            else:
                ra_map = range_angle_map_reference(
                    scene_config, pair, scatterers, bank,
                    rng=noise_rng, noise_mode="factored" if noise else "off")
            ra_map = threshold_map(ra_map, spec)
            if mask_on:
                ra_map = apply_mask(ra_map, mask)
            rx_maps.append(resampler(ra_map))
        round_maps.append(fuse_round(rx_maps))
    aggregated = aggregate_rounds(round_maps, expected_rounds=n_stations)

    detections = detect(aggregated, config.grid, config.detection.gamma_d,
                        pre.cluster_params)
    truth = np.array([t.position_m for t in trial.targets]).reshape(-1, 2)
    score = gospa(truth, detections.positions_m,
                  p=config.gospa.order, gate=config.gospa.cutoff_m)
    return TrialResult(
        trial_id=trial.trial_id,
        n_targets=len(trial.targets),
        detections=detections,
        score=score,
        truth=truth,
        aggregated_map=aggregated if keep_map else None,
    )


def search_time(config: ScenarioConfig) -> float:
    """Total search phase duration: one scan per station."""
    return config.numerology.scan_duration_s * len(config.base_stations)


# --- sweeps ---------------------------------------------------------------

@dataclass
class SweepCell:
    q: int
    mask_on: bool
    n_trials: int
    mean_gospa: float
    stderr_gospa: float
    mean_rmse: float        # nan when no trial produced an assignment
    mean_detection_rate: float
    mean_false_rate: float
    mean_missed_rate: float
    mean_cardinality_error: float


@dataclass
class SweepResult:
    cells: list[SweepCell]
    trials: list[dict]      # flat per-trial metric rows


_WORKER_PRE: Precomputed | None = None


def _worker_init(config: ScenarioConfig):
    global _WORKER_PRE
    _WORKER_PRE = Precomputed(config)


def _worker_run(args) -> dict:
    trial, mask_on, master_seed, q, mean_rcs = args
    res = run_trial(_WORKER_PRE, trial, mask_on=mask_on, master_seed=master_seed)
    return _trial_row(res, q, mean_rcs, mask_on, _WORKER_PRE.config)


def _trial_row(res: TrialResult, q: int, mean_rcs: float, mask_on: bool,
               config: ScenarioConfig) -> dict:
    import math

    s = res.score
    return {
        "trial": res.trial_id,
        "q": q,
        "mask_on": int(mask_on),
        "tx_power_dbm": 10.0 * math.log10(config.numerology.tx_power_w * 1e3),
        "mean_rcs_m2": mean_rcs,
        "gospa": s.gospa,
        "rmse": s.rmse if s.rmse is not None else float("nan"),
        "detection_rate": s.detection_rate,
        "false_rate": s.false_rate,
        "missed_rate": s.missed_rate,
        "n_estimates": res.n_estimates,
    }


def run_sweep(config: ScenarioConfig, q_values, n_trials: int,
              mean_rcs_m2: float, mask_on: bool = True,
              master_seed: int | None = None, workers: int = 1) -> SweepResult:
    """Monte Carlo sweep over target counts; trials independent per cell."""
    if master_seed is None:
        master_seed = config.rng_seed
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")

    jobs = []
    for q in q_values:
        for t in range(n_trials):
            # distinct trial ids across cells keep scene draws independent
            trial_id = q * 1_000_000 + t
            trial = draw_trial(trial_id, q, mean_rcs_m2, master_seed,
                               config.min_target_separation_m)
            jobs.append((trial, mask_on, master_seed, q, mean_rcs_m2))

    if workers <= 1:
        pre = Precomputed(config)
        rows = [_trial_row(run_trial(pre, trial, mask_on=mask_on,
                                     master_seed=master_seed),
                           q, mean_rcs, mask_on, config)
                for trial, mask_on, master_seed, q, mean_rcs in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_worker_init,
                                 initargs=(config,)) as pool:
            rows = list(pool.map(_worker_run, jobs))
    rows.sort(key=lambda r: (r["q"], r["trial"]))

    cells = []
    for q in q_values:
        sub = [r for r in rows if r["q"] == q]
        g = np.array([r["gospa"] for r in sub])
        rm = np.array([r["rmse"] for r in sub])
        rm = rm[~np.isnan(rm)]
        cells.append(SweepCell(
            q=q,
            mask_on=mask_on,
            n_trials=len(sub),
            mean_gospa=float(g.mean()),
            stderr_gospa=float(g.std(ddof=1) / np.sqrt(len(g))) if len(g) > 1 else 0.0,
            mean_rmse=float(rm.mean()) if rm.size else float("nan"),
            mean_detection_rate=float(np.mean([r["detection_rate"] for r in sub])),
            mean_false_rate=float(np.mean([r["false_rate"] for r in sub])),
            mean_missed_rate=float(np.mean([r["missed_rate"] for r in sub])),
            mean_cardinality_error=float(np.mean(
                [abs(r["n_estimates"] - q) for r in sub])),
        ))
    return SweepResult(cells=cells, trials=rows)
