"""Scenario configuration: OFDM numerology, base stations, targets, clutter.

All angles are stored in radians internally; the JSON config format uses
degrees for human-facing angle fields (suffix ``_deg``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

SPEED_OF_LIGHT = 299_792_458.0
BOLTZMANN = 1.38e-23  # J/K

_REL_TOL = 1e-9


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0) * 1e-3


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


@dataclass(frozen=True)
class OfdmNumerology:
    """OFDM waveform and power/noise figures for one scan."""

    carrier_frequency_hz: float
    subcarrier_spacing_hz: float
    active_subcarriers: int
    symbols: int
    guard_time_s: float
    symbol_duration_s: float
    tx_power_w: float
    per_subcarrier_power_w: float
    noise_psd_w_per_hz: float
    noise_variance_w: float

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency_hz

    @property
    def scan_duration_s(self) -> float:
        return self.symbols * self.symbol_duration_s


def derive_numerology(
    carrier_frequency_hz: float,
    subcarrier_spacing_hz: float,
    active_subcarriers: int,
    symbols: int,
    scan_duration_s: float,
    tx_power_dbm: float,
    noise_figure_db: float,
    noise_temperature_k: float = 290.0,
) -> OfdmNumerology:
    """Build a consistent numerology from primary quantities.

    The symbol duration is the scan time split over the symbols; the guard
    time is whatever exceeds the useful symbol length 1/subcarrier_spacing.
    Noise PSD is k_B * T0 * F.
    """
    symbol_duration = scan_duration_s / symbols
    guard_time = symbol_duration - 1.0 / subcarrier_spacing_hz
    if guard_time <= 0.0:
        raise ValueError(
            f"non-positive guard time {guard_time:g} s: scan duration too short "
            f"for {symbols} symbols at {subcarrier_spacing_hz:g} Hz spacing"
        )
    tx_power_w = dbm_to_watts(tx_power_dbm)
    noise_psd = BOLTZMANN * noise_temperature_k * db_to_linear(noise_figure_db)
    return OfdmNumerology(
        carrier_frequency_hz=carrier_frequency_hz,
        subcarrier_spacing_hz=subcarrier_spacing_hz,
        active_subcarriers=active_subcarriers,
        symbols=symbols,
        guard_time_s=guard_time,
        symbol_duration_s=symbol_duration,
        tx_power_w=tx_power_w,
        per_subcarrier_power_w=tx_power_w / active_subcarriers,
        noise_psd_w_per_hz=noise_psd,
        noise_variance_w=noise_psd * subcarrier_spacing_hz,
    )


@dataclass(frozen=True)
class BaseStation:
    position_m: tuple[float, float]
    tx_elements: int
    rx_elements: int
    boresight_rad: float


@dataclass(frozen=True)
class Target:
    position_m: tuple[float, float]
    velocity_mps: tuple[float, float]
    mean_rcs_m2: float


@dataclass(frozen=True)
class ClutterPoint:
    # Static by definition: no velocity field, zero Doppler.
    position_m: tuple[float, float]
    mean_rcs_m2: float


@dataclass(frozen=True)
class ScanConfig:
    start_rad: float        # first direction is start + step (j runs 1..n)
    step_rad: float
    n_directions: int
    beamwidth_rad: float
    sidelobe_db: float = 30.0

    @property
    def directions_rad(self):
        import numpy as np

        j = np.arange(1, self.n_directions + 1)
        return self.start_rad + j * self.step_rad


@dataclass(frozen=True)
class DetectionConfig:
    far: float = 1e-2               # total false-alarm rate per map
    gamma_res_m2: float = 5.0       # reliability area threshold
    gamma_d: float = 0.05           # excision fraction of peak
    cluster_eps: float = 2.0        # DBSCAN radius
    cluster_eps_unit: str = "m"     # "m" or "px"
    cluster_min_weight: float = 50.0
    doppler_guard_bins: int = 2     # p0: |bin| <= p0 notched out


@dataclass(frozen=True)
class GridConfig:
    nx: int = 701
    ny: int = 701
    cell_x_m: float = 0.1
    cell_y_m: float = 0.1
    center_m: tuple[float, float] = (0.0, 0.0)

    def x_coords(self):
        import numpy as np

        return self.center_m[0] + (np.arange(self.nx) - (self.nx - 1) / 2.0) * self.cell_x_m

    def y_coords(self):
        import numpy as np

        return self.center_m[1] + (np.arange(self.ny) - (self.ny - 1) / 2.0) * self.cell_y_m


@dataclass(frozen=True)
class GospaConfig:
    order: float = 2.0
    cutoff_m: float = 5.0


@dataclass(frozen=True)
class PaddingConfig:
    k_fft: int = 0   # 0 means "equal to active_subcarriers" (no padding)
    m_fft: int = 0   # 0 means "equal to symbols"

    def resolve(self, num: OfdmNumerology) -> tuple[int, int]:
        kp = self.k_fft or num.active_subcarriers
        mp = self.m_fft or num.symbols
        return kp, mp


@dataclass(frozen=True)
class ScenarioConfig:
    numerology: OfdmNumerology
    base_stations: tuple[BaseStation, ...]
    targets: tuple[Target, ...] = ()
    clutter: tuple[ClutterPoint, ...] = ()
    scan: ScanConfig = field(default_factory=lambda: ScanConfig(
        start_rad=math.radians(-58.8), step_rad=math.radians(2.4),
        n_directions=50, beamwidth_rad=math.radians(2.4)))
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    gospa: GospaConfig = field(default_factory=GospaConfig)
    padding: PaddingConfig = field(default_factory=PaddingConfig)
    rx_element_gain: float = 1.0          # G_R, linear
    min_target_separation_m: float = 1.0
    rng_seed: int = 0


@dataclass
class ValidationResult:
    ok: bool
    violations: list[str]

    def __bool__(self) -> bool:
        return self.ok


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=_REL_TOL, abs_tol=0.0)


def validate(config: ScenarioConfig) -> ValidationResult:
    """Check every structural invariant; report the full list of breaches."""
    v: list[str] = []
    num = config.numerology

    for name in (
        "carrier_frequency_hz", "subcarrier_spacing_hz", "active_subcarriers",
        "symbols", "guard_time_s", "symbol_duration_s", "tx_power_w",
        "per_subcarrier_power_w", "noise_psd_w_per_hz", "noise_variance_w",
    ):
        if getattr(num, name) <= 0:
            v.append(f"numerology.{name}: must be strictly positive")

    if not _close(num.symbol_duration_s, 1.0 / num.subcarrier_spacing_hz + num.guard_time_s):
        v.append("numerology.symbol_duration_s: T_s must equal 1/subcarrier_spacing + guard_time")
    if not _close(num.per_subcarrier_power_w, num.tx_power_w / num.active_subcarriers):
        v.append("numerology.per_subcarrier_power_w: must equal tx_power / active_subcarriers")
    if not _close(num.noise_variance_w, num.noise_psd_w_per_hz * num.subcarrier_spacing_hz):
        v.append("numerology.noise_variance_w: must equal noise_psd * subcarrier_spacing")

    if len(config.base_stations) < 2:
        v.append("base_stations: |S| >= 2 required (at least one bistatic pair)")
    for i, bs in enumerate(config.base_stations):
        if bs.tx_elements < 1:
            v.append(f"base_stations[{i}].tx_elements: must be >= 1")
        if bs.rx_elements < 1:
            v.append(f"base_stations[{i}].rx_elements: must be >= 1")
        if not (-math.pi < bs.boresight_rad <= math.pi):
            v.append(f"base_stations[{i}].boresight_rad: must lie in (-pi, pi]")

    for i, t in enumerate(config.targets):
        if t.mean_rcs_m2 <= 0:
            v.append(f"targets[{i}].mean_rcs_m2: must be > 0")
    for i, c in enumerate(config.clutter):
        if c.mean_rcs_m2 <= 0:
            v.append(f"clutter[{i}].mean_rcs_m2: must be > 0")

    sep = config.min_target_separation_m
    for i in range(len(config.targets)):
        for j in range(i + 1, len(config.targets)):
            d = math.dist(config.targets[i].position_m, config.targets[j].position_m)
            if d < sep:
                v.append(f"targets[{i}]/targets[{j}]: separation {d:.3f} m < {sep:g} m minimum")

    kp, mp = config.padding.k_fft, config.padding.m_fft
    if kp and kp < num.active_subcarriers:
        v.append("padding.k_fft: K_p >= K required")
    if mp and mp < num.symbols:
        v.append("padding.m_fft: M_p >= M required")

    if config.scan.n_directions < 1:
        v.append("scan.n_directions: must be >= 1")
    if config.scan.step_rad <= 0:
        v.append("scan.step_rad: must be > 0")
    if config.scan.beamwidth_rad <= 0:
        v.append("scan.beamwidth_rad: must be > 0")

    det = config.detection
    if not (0.0 < det.far < 1.0):
        v.append("detection.far: must lie in (0, 1)")
    if det.gamma_res_m2 <= 0:
        v.append("detection.gamma_res_m2: must be > 0")
    if not (0.0 < det.gamma_d < 1.0):
        v.append("detection.gamma_d: must lie in (0, 1)")
    if det.cluster_eps <= 0:
        v.append("detection.cluster_eps: must be > 0")
    if det.cluster_eps_unit not in ("m", "px"):
        v.append("detection.cluster_eps_unit: must be 'm' or 'px'")
    if det.cluster_min_weight < 1:
        v.append("detection.cluster_min_weight: must be >= 1")
    if det.doppler_guard_bins < 0:
        v.append("detection.doppler_guard_bins: must be >= 0")
    _, mp_res = config.padding.resolve(num)
    if det.doppler_guard_bins >= mp_res / 2:
        v.append("detection.doppler_guard_bins: must be < m_fft/2")

    if config.grid.nx < 1 or config.grid.ny < 1:
        v.append("grid: nx and ny must be >= 1")
    if config.grid.cell_x_m <= 0 or config.grid.cell_y_m <= 0:
        v.append("grid: cell sizes must be > 0")

    if config.gospa.order < 1:
        v.append("gospa.order: p >= 1 required")
    if config.gospa.cutoff_m <= 0:
        v.append("gospa.cutoff_m: must be > 0")
    if config.rx_element_gain <= 0:
        v.append("rx_element_gain: must be > 0")

    return ValidationResult(ok=not v, violations=v)


# --- Table-style defaults -------------------------------------------------

DEFAULT_BS_POSITIONS = (
    (0.0, 60.0), (-60.0, 0.0), (-30.0, -52.0), (30.0, -52.0), (60.0, 0.0),
)


def _boresight_toward(point: tuple[float, float], pos: tuple[float, float]) -> float:
    return math.atan2(point[1] - pos[1], point[0] - pos[0])


def default_config(
    tx_power_dbm: float = 20.0,
    fast_grid: bool = False,
    rng_seed: int = 0,
) -> ScenarioConfig:
    """Reference 28 GHz five-station scenario with all default parameters."""
    num = derive_numerology(
        carrier_frequency_hz=28e9,
        subcarrier_spacing_hz=120e3,
        active_subcarriers=3168,
        symbols=336,
        scan_duration_s=3e-3,
        tx_power_dbm=tx_power_dbm,
        noise_figure_db=13.0,
    )
    stations = tuple(
        BaseStation(position_m=p, tx_elements=50, rx_elements=50,
                    boresight_rad=_boresight_toward((0.0, 0.0), p))
        for p in DEFAULT_BS_POSITIONS
    )
    grid = GridConfig(nx=351, ny=351, cell_x_m=0.2, cell_y_m=0.2) if fast_grid else GridConfig()
    return ScenarioConfig(numerology=num, base_stations=stations, grid=grid,
                          rng_seed=rng_seed)


# --- JSON config I/O ------------------------------------------------------

def config_to_dict(config: ScenarioConfig) -> dict:
    num = config.numerology
    return {
        "numerology": {
            "carrier_frequency_hz": num.carrier_frequency_hz,
            "subcarrier_spacing_hz": num.subcarrier_spacing_hz,
            "active_subcarriers": num.active_subcarriers,
            "symbols": num.symbols,
            "guard_time_s": num.guard_time_s,
            "symbol_duration_s": num.symbol_duration_s,
            "tx_power_w": num.tx_power_w,
            "per_subcarrier_power_w": num.per_subcarrier_power_w,
            "noise_psd_w_per_hz": num.noise_psd_w_per_hz,
            "noise_variance_w": num.noise_variance_w,
        },
        "base_stations": [
            {
                "position_m": list(bs.position_m),
                "tx_elements": bs.tx_elements,
                "rx_elements": bs.rx_elements,
                "boresight_deg": math.degrees(bs.boresight_rad),
            }
            for bs in config.base_stations
        ],
        "targets": [
            {"position_m": list(t.position_m), "velocity_mps": list(t.velocity_mps),
             "mean_rcs_m2": t.mean_rcs_m2}
            for t in config.targets
        ],
        "clutter": [
            {"position_m": list(c.position_m), "mean_rcs_m2": c.mean_rcs_m2}
            for c in config.clutter
        ],
        "scan": {
            "start_deg": math.degrees(config.scan.start_rad),
            "step_deg": math.degrees(config.scan.step_rad),
            "n_directions": config.scan.n_directions,
            "beamwidth_deg": math.degrees(config.scan.beamwidth_rad),
            "sidelobe_db": config.scan.sidelobe_db,
        },
        "detection": asdict(config.detection),
        "grid": {
            "nx": config.grid.nx, "ny": config.grid.ny,
            "cell_x_m": config.grid.cell_x_m, "cell_y_m": config.grid.cell_y_m,
            "center_m": list(config.grid.center_m),
        },
        "gospa": asdict(config.gospa),
        "padding": asdict(config.padding),
        "rx_element_gain": config.rx_element_gain,
        "min_target_separation_m": config.min_target_separation_m,
        "rng_seed": config.rng_seed,
    }


def config_from_dict(d: dict) -> ScenarioConfig:
    n = d["numerology"]
    num = OfdmNumerology(
        carrier_frequency_hz=n["carrier_frequency_hz"],
        subcarrier_spacing_hz=n["subcarrier_spacing_hz"],
        active_subcarriers=int(n["active_subcarriers"]),
        symbols=int(n["symbols"]),
        guard_time_s=n["guard_time_s"],
        symbol_duration_s=n["symbol_duration_s"],
        tx_power_w=n["tx_power_w"],
        per_subcarrier_power_w=n["per_subcarrier_power_w"],
        noise_psd_w_per_hz=n["noise_psd_w_per_hz"],
        noise_variance_w=n["noise_variance_w"],
    )
    stations = tuple(
        BaseStation(
            position_m=tuple(b["position_m"]),
            tx_elements=int(b["tx_elements"]),
            rx_elements=int(b["rx_elements"]),
            boresight_rad=math.radians(b["boresight_deg"]),
        )
        for b in d["base_stations"]
    )
    targets = tuple(
        Target(position_m=tuple(t["position_m"]), velocity_mps=tuple(t["velocity_mps"]),
               mean_rcs_m2=t["mean_rcs_m2"])
        for t in d.get("targets", ())
    )
    clutter = tuple(
        ClutterPoint(position_m=tuple(c["position_m"]), mean_rcs_m2=c["mean_rcs_m2"])
        for c in d.get("clutter", ())
    )
    s = d["scan"]
    scan = ScanConfig(
        start_rad=math.radians(s["start_deg"]),
        step_rad=math.radians(s["step_deg"]),
        n_directions=int(s["n_directions"]),
        beamwidth_rad=math.radians(s["beamwidth_deg"]),
        sidelobe_db=s.get("sidelobe_db", 30.0),
    )
    g = d["grid"]
    grid = GridConfig(nx=int(g["nx"]), ny=int(g["ny"]), cell_x_m=g["cell_x_m"],
                      cell_y_m=g["cell_y_m"], center_m=tuple(g.get("center_m", (0.0, 0.0))))
    return ScenarioConfig(
        numerology=num,
        base_stations=stations,
        targets=targets,
        clutter=clutter,
        scan=scan,
        detection=DetectionConfig(**d.get("detection", {})),
        grid=grid,
        gospa=GospaConfig(**d.get("gospa", {})),
        padding=PaddingConfig(**d.get("padding", {})),
        rx_element_gain=d.get("rx_element_gain", 1.0),
        min_target_separation_m=d.get("min_target_separation_m", 1.0),
        rng_seed=int(d.get("rng_seed", 0)),
    )


def load_config(path) -> ScenarioConfig:
    with open(path) as f:
        return config_from_dict(json.load(f))


def save_config(config: ScenarioConfig, path) -> None:
    with open(path, "w") as f:
        json.dump(config_to_dict(config), f, indent=2)
        f.write("\n")


def config_json(config: ScenarioConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2, sort_keys=True)
