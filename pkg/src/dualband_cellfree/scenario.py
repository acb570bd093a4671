"""Deployment configuration, placement generation and power normalization."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ConfigurationError

BOLTZMANN = 1.380649e-23  # J/K
NOISE_TEMPERATURE_K = 290.0


@dataclass(frozen=True)
class SystemConfig:
    """Static deployment and radio parameters.

    Defaults reproduce the baseline dual-band setup: a 128-antenna CPU with a
    28 GHz / 2 GHz fronthaul serving 100 single-antenna APs and 10 UEs over a
    3.5 GHz / 20 MHz access channel in a 100 m x 100 m area.
    """

    num_aps: int = 100
    num_ues: int = 10
    cpu_antennas: int = 128
    phase_bits: int = 3
    fronthaul_carrier_ghz: float = 28.0
    access_carrier_ghz: float = 3.5
    fronthaul_bw_hz: float = 2e9
    access_bw_hz: float = 20e6
    cpu_tx_power_dbm: float = 30.0
    ap_tx_power_dbm: float = 10.0
    pilot_tx_power_dbm: float = 10.0
    noise_figure_db: float = 9.0
    pilot_length: int = 10
    area_side_m: float = 100.0
    cpu_offset_m: float = 100.0
    realizations: int = 25
    master_seed: int = 1
    min_distance_m: float = 1.0

    def __post_init__(self):
        for name in ("num_aps", "num_ues", "cpu_antennas", "phase_bits",
                     "pilot_length", "realizations"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1")
        if self.fronthaul_bw_hz <= 0 or self.access_bw_hz <= 0:
            raise ConfigurationError("bandwidths must be positive")
        if self.pilot_length < self.num_ues:
            raise ConfigurationError(
                "pilot_length must be >= num_ues for orthogonal pilots")
        if self.area_side_m < 0:
            raise ConfigurationError("area_side_m must be >= 0")
        if self.min_distance_m <= 0:
            raise ConfigurationError("min_distance_m must be positive")


@dataclass(frozen=True)
class Placement:
    """CPU, AP and UE coordinates (2-D, meters)."""

    cpu_position: np.ndarray
    ap_positions: np.ndarray  # (M, 2)
    ue_positions: np.ndarray  # (K, 2)


@dataclass(frozen=True)
class ClusterLayout:
    """Disjoint AP clusters with one leader AP per cluster."""

    clusters: list  # list of int arrays, partition of {0..M-1}
    leaders: np.ndarray  # (L,) AP indices, leaders[l] in clusters[l]

    @property
    def num_clusters(self) -> int:
        return len(self.clusters)


@dataclass(frozen=True)
class NormalizedPowers:
    """Linear transmit powers normalized by the per-channel noise power."""

    rho_fh: float
    rho_ac: float
    rho_t: float

    def __post_init__(self):
        for v in (self.rho_fh, self.rho_ac, self.rho_t):
            if not (0 < v < np.inf):
                raise ConfigurationError("normalized powers must be positive and finite")


def derive_seed(master_seed: int, index: int) -> int:
    """Per-realization seed from the master seed; order-insensitive split."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


def generate_placement(config: SystemConfig, seed: int) -> Placement:
    """Drop APs and UEs uniformly over the square area; CPU at (-D, 0)."""
    rng = np.random.default_rng(seed)
    half = config.area_side_m / 2.0
    aps = rng.uniform(-half, half, size=(config.num_aps, 2))
    ues = rng.uniform(-half, half, size=(config.num_ues, 2))
    cpu = np.array([-config.cpu_offset_m, 0.0])
    return Placement(cpu_position=cpu, ap_positions=aps, ue_positions=ues)


def generate_grid_clusters(config: SystemConfig, rows: int, cols: int,
                           seed: int | None = None) -> tuple[Placement, ClusterLayout]:
    """Regular rows x cols AP grid with one cluster per column.

    The CPU sits at the origin and each cluster's leader is its AP closest to
    the CPU.  UEs are dropped uniformly using `seed` (master_seed when None).
    """
    if rows * cols != config.num_aps:
        raise ConfigurationError(
            f"rows*cols = {rows * cols} does not match num_aps = {config.num_aps}")
    side = config.area_side_m
    xs = (np.arange(cols) + 0.5) / cols * side - side / 2.0
    ys = (np.arange(rows) + 0.5) / rows * side - side / 2.0
    # column-major ordering: AP index = col * rows + row
    ap_positions = np.array([[x, y] for x in xs for y in ys])
    cpu = np.array([0.0, 0.0])

    clusters = [np.arange(c * rows, (c + 1) * rows) for c in range(cols)]
    leaders = np.empty(cols, dtype=int)
    for l, members in enumerate(clusters):
        d = np.linalg.norm(ap_positions[members] - cpu, axis=1)
        leaders[l] = members[np.argmin(d)]

    rng = np.random.default_rng(config.master_seed if seed is None else seed)
    half = side / 2.0
    ues = rng.uniform(-half, half, size=(config.num_ues, 2))
    placement = Placement(cpu_position=cpu, ap_positions=ap_positions, ue_positions=ues)
    return placement, ClusterLayout(clusters=clusters, leaders=leaders)


def noise_power_w(bandwidth_hz: float, noise_figure_db: float) -> float:
    """Thermal noise power k*T*B scaled by the linear noise figure."""
    return (BOLTZMANN * NOISE_TEMPERATURE_K * bandwidth_hz
            * 10.0 ** (noise_figure_db / 10.0))


def normalize_powers(config: SystemConfig) -> NormalizedPowers:
    """Transmit powers divided by the noise power of their channel."""
    def rho(power_dbm, bandwidth_hz):
        watts = 10.0 ** ((power_dbm - 30.0) / 10.0)
        return watts / noise_power_w(bandwidth_hz, config.noise_figure_db)

    return NormalizedPowers(
        rho_fh=rho(config.cpu_tx_power_dbm, config.fronthaul_bw_hz),
        rho_ac=rho(config.ap_tx_power_dbm, config.access_bw_hz),
        rho_t=rho(config.pilot_tx_power_dbm, config.access_bw_hz),
    )


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> SystemConfig:
    """Build a SystemConfig from a flat JSON file plus key=value overrides."""
    values: dict = {}
    if path is not None:
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigurationError("config file must hold a flat JSON object")
        values.update(data)
    if overrides:
        values.update(overrides)

    known = {f.name: f.type for f in fields(SystemConfig)}
    unknown = set(values) - set(known)
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    typed = {}
    for name, raw in values.items():
        caster = int if known[name] == "int" else float
        typed[name] = caster(raw)
    return SystemConfig(**typed)
