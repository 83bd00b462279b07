"""Simulation configuration, task sampling, and the seeded RNG contract.

The configuration file format is flat ``key = value`` text.  Lines starting
with ``#`` and blank lines are ignored.  Vector values are comma separated
(``bs_position_m = 800, 200, 25``).  Any key absent from the file keeps its
default.  Unknown keys and out-of-range values raise :class:`ConfigError`
naming the offending key.

Power-like quantities are configured on the dB scale they are usually quoted
in (``tx_power_dbm``, ``noise_dbm``, ``rician_factor_db``) and converted to
linear SI units once, via the ``tx_power_w`` / ``noise_w`` /
``rician_factor_linear`` properties.  All internal math is linear.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields, replace
from typing import Tuple

import numpy as np

__all__ = [
    "ConfigError",
    "SimConfig",
    "Task",
    "RngStream",
    "load_config",
    "parse_config_text",
    "serialize_config",
    "config_hash",
    "sample_task",
]


class ConfigError(ValueError):
    """Raised for unparseable files, unknown keys, or invalid values."""


def _db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class SimConfig:
    """All scenario, cost, and learner parameters with their default values.

    Instances are immutable; derive variants with :func:`dataclasses.replace`.
    """

    # --- area and fleet ---
    area_x_m: float = 1000.0
    area_y_m: float = 1000.0
    num_vehicles: int = 10
    num_irs: int = 2
    elements_per_irs: int = 64
    slot_duration_s: float = 1.0
    num_slots: int = 100

    # --- geometry ---
    uav_altitude_m: float = 100.0
    bs_position_m: Tuple[float, float, float] = (800.0, 200.0, 25.0)
    fixed_irs_position_m: Tuple[float, float, float] = (200.0, 800.0, 75.0)
    # vertical offset of the UAV-carried reflecting panel relative to the UAV
    uav_irs_relative_alt_m: float = 0.0

    # --- radio ---
    tx_power_dbm: float = 25.0
    noise_dbm: float = -98.0
    path_loss_ref: float = 1e-3
    rician_factor_db: float = 3.0
    path_loss_exp_vehicle_uav: float = 2.2
    path_loss_exp_vehicle_bs: float = 3.5
    path_loss_exp_vehicle_irs: float = 2.2
    path_loss_exp_irs_bs: float = 2.2
    bandwidth_uav_hz: float = 10e6
    bandwidth_bs_hz: float = 20e6
    carrier_freq_hz: float = 2e9

    # --- compute ---
    vehicle_cpu_hz: float = 1e9
    uav_cpu_hz: float = 15e9
    bs_cpu_hz: float = 30e9
    uav_cores: int = 2
    bs_cores: int = 8
    kappa_vehicle: float = 1e-28
    varpi_uav: float = 8.2e-9
    varpi_bs: float = 8.2e-9

    # --- rotary-wing flight power constants ---
    eta1: float = 79.86
    eta2: float = 88.63
    eta3: float = 263.9
    eta4: float = 0.018
    rotor_tip_speed_mps: float = 120.0

    # --- cost weights and penalties ---
    weight_vehicle: float = 0.5
    weight_server: float = 0.5
    weight_cost: float = 0.5
    penalty_boundary: float = 10.0
    penalty_deadline: float = 5.0

    # --- task ranges ---
    task_size_min_mb: float = 1.0
    task_size_max_mb: float = 5.0
    task_intensity_min: float = 500.0
    task_intensity_max: float = 1000.0
    task_deadline_min_s: float = 1.0
    task_deadline_max_s: float = 5.0

    # --- mobility ---
    mobility_memory: float = 0.8
    mean_velocity_mps: Tuple[float, float] = (10.0, 0.0)
    velocity_std_mps: float = 1.0
    uav_speed_max_mps: float = 25.0

    # --- state history ---
    history_len: int = 1

    # --- learner ---
    actor_lr: float = 3e-4
    critic_lr: float = 3e-4
    batch_size: int = 256
    discount: float = 0.99
    soft_update_rate: float = 5e-3
    policy_delay: int = 2
    diffusion_steps: int = 10
    beta_min: float = 0.1
    beta_max: float = 10.0
    hidden_width: int = 400
    replay_capacity: int = 100_000
    smoothing_noise_std: float = 0.2
    smoothing_noise_clip: float = 0.5
    exploration_noise_std: float = 0.1
    time_embed_dim: int = 16

    # --- baseline parameters ---
    cutc_radius_m: float = 200.0
    fipsc_zero_phases: bool = False

    # Derived linear-unit views -------------------------------------------------

    @property
    def tx_power_w(self) -> float:
        return _db_to_linear(self.tx_power_dbm) / 1e3

    @property
    def noise_w(self) -> float:
        return _db_to_linear(self.noise_dbm) / 1e3

    @property
    def rician_factor_linear(self) -> float:
        return _db_to_linear(self.rician_factor_db)

    @property
    def task_size_min_bits(self) -> float:
        return self.task_size_min_mb * 1e6

    @property
    def task_size_max_bits(self) -> float:
        return self.task_size_max_mb * 1e6

    @property
    def carrier_wavelength_m(self) -> float:
        return 299_792_458.0 / self.carrier_freq_hz

    def server_cpu_hz(self, server: str) -> float:
        return self.uav_cpu_hz if server == "uav" else self.bs_cpu_hz

    def server_cores(self, server: str) -> int:
        return self.uav_cores if server == "uav" else self.bs_cores

    def server_varpi(self, server: str) -> float:
        return self.varpi_uav if server == "uav" else self.varpi_bs

    def server_bandwidth_hz(self, server: str) -> float:
        return self.bandwidth_uav_hz if server == "uav" else self.bandwidth_bs_hz


@dataclass(frozen=True)
class Task:
    """One computation job: payload bits, cycles per bit, and a deadline."""

    size_bits: float
    intensity_cpb: float
    deadline_s: float

    @property
    def workload_cycles(self) -> float:
        return self.size_bits * self.intensity_cpb


_STREAM_NAMES = ("mobility", "channel", "task", "learning")


class RngStream:
    """Seeded bundle of independent named generators.

    Equal seeds give bit-identical draw sequences per sub-stream, and draws
    on one sub-stream never perturb another.  Sub-streams are single-owner:
    do not share one generator across concurrent consumers.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gens = {
            name: np.random.default_rng(
                np.random.SeedSequence(entropy=self.seed, spawn_key=(idx,))
            )
            for idx, name in enumerate(_STREAM_NAMES)
        }

    def get(self, name: str) -> np.random.Generator:
        return self._gens[name]

    @property
    def mobility(self) -> np.random.Generator:
        return self._gens["mobility"]

    @property
    def channel(self) -> np.random.Generator:
        return self._gens["channel"]

    @property
    def task(self) -> np.random.Generator:
        return self._gens["task"]

    @property
    def learning(self) -> np.random.Generator:
        return self._gens["learning"]


# --- parsing -----------------------------------------------------------------

_TUPLE_FIELDS = {"bs_position_m", "fixed_irs_position_m", "mean_velocity_mps"}


def _parse_value(key: str, raw: str, default) -> object:
    raw = raw.strip()
    try:
        if key in _TUPLE_FIELDS:
            parts = tuple(float(p) for p in raw.split(","))
            if len(parts) != len(default):
                raise ValueError(f"expected {len(default)} components")
            return parts
        if isinstance(default, bool):
            low = raw.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError("expected true/false")
        if isinstance(default, int):
            val = float(raw)
            if val != int(val):
                raise ValueError("expected an integer")
            return int(val)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"config key '{key}': cannot parse {raw!r} ({exc})") from None


def parse_config_text(text: str) -> SimConfig:
    """Parse flat key-value text into a validated :class:`SimConfig`."""
    defaults = SimConfig()
    known = {f.name: getattr(defaults, f.name) for f in fields(SimConfig)}
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in known:
            raise ConfigError(f"unknown config key '{key}'")
        overrides[key] = _parse_value(key, raw, known[key])
    cfg = replace(defaults, **overrides)
    validate_config(cfg)
    return cfg


def load_config(path: str) -> SimConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def serialize_config(cfg: SimConfig) -> str:
    """Canonical text form; ``parse_config_text`` round-trips it exactly."""
    lines = []
    for f in fields(SimConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            rendered = ", ".join(repr(float(v)) for v in value)
        elif isinstance(value, bool):
            rendered = "true" if value else "false"
        else:
            rendered = repr(value)
        lines.append(f"{f.name} = {rendered}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: SimConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()


def _require(cond: bool, key: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"config key '{key}': {message}")


def validate_config(cfg: SimConfig) -> None:
    """Check positivity, range, and ordering constraints, naming the bad key."""
    positive = [
        "area_x_m", "area_y_m", "slot_duration_s", "uav_altitude_m",
        "path_loss_ref", "bandwidth_uav_hz", "bandwidth_bs_hz",
        "carrier_freq_hz", "vehicle_cpu_hz", "uav_cpu_hz", "bs_cpu_hz",
        "kappa_vehicle", "varpi_uav", "varpi_bs", "eta1", "eta2", "eta3",
        "eta4", "rotor_tip_speed_mps", "uav_speed_max_mps",
        "task_size_min_mb", "task_intensity_min", "task_deadline_min_s",
        "path_loss_exp_vehicle_uav", "path_loss_exp_vehicle_bs",
        "path_loss_exp_vehicle_irs", "path_loss_exp_irs_bs",
    ]
    for key in positive:
        _require(getattr(cfg, key) > 0, key, "must be strictly positive")

    counts = ["num_vehicles", "num_irs", "elements_per_irs", "num_slots",
              "uav_cores", "bs_cores", "history_len", "batch_size",
              "diffusion_steps", "hidden_width", "replay_capacity"]
    for key in counts:
        _require(getattr(cfg, key) >= 1, key, "must be at least 1")

    for key in ["weight_vehicle", "weight_server", "weight_cost",
                "mobility_memory", "discount"]:
        _require(0.0 <= getattr(cfg, key) <= 1.0, key, "must lie in [0, 1]")

    for key in ["penalty_boundary", "penalty_deadline", "velocity_std_mps",
                "actor_lr", "critic_lr", "smoothing_noise_std",
                "exploration_noise_std"]:
        _require(getattr(cfg, key) >= 0, key, "must be nonnegative")

    _require(cfg.task_size_max_mb >= cfg.task_size_min_mb,
             "task_size_max_mb", "must be >= task_size_min_mb")
    _require(cfg.task_intensity_max >= cfg.task_intensity_min,
             "task_intensity_max", "must be >= task_intensity_min")
    _require(cfg.task_deadline_max_s >= cfg.task_deadline_min_s,
             "task_deadline_max_s", "must be >= task_deadline_min_s")
    _require(cfg.beta_min > 0, "beta_min", "must be strictly positive")
    _require(cfg.beta_max > cfg.beta_min, "beta_max", "must exceed beta_min")
    _require(0 < cfg.soft_update_rate <= 1.0, "soft_update_rate",
             "must lie in (0, 1]")
    _require(cfg.policy_delay >= 0, "policy_delay", "must be nonnegative")
    _require(cfg.smoothing_noise_clip >= 0, "smoothing_noise_clip",
             "must be nonnegative")
    _require(cfg.time_embed_dim >= 2 and cfg.time_embed_dim % 2 == 0,
             "time_embed_dim", "must be an even number >= 2")
    _require(cfg.replay_capacity >= cfg.batch_size, "replay_capacity",
             "must be >= batch_size")
    _require(cfg.cutc_radius_m > 0, "cutc_radius_m", "must be strictly positive")
    _require(2 * cfg.cutc_radius_m <= min(cfg.area_x_m, cfg.area_y_m),
             "cutc_radius_m", "circle must fit inside the service area")


def sample_task(rng: np.random.Generator, cfg: SimConfig) -> Task:
    """Draw one task uniformly from the configured ranges."""
    size_mb = rng.uniform(cfg.task_size_min_mb, cfg.task_size_max_mb)
    intensity = rng.uniform(cfg.task_intensity_min, cfg.task_intensity_max)
    deadline = rng.uniform(cfg.task_deadline_min_s, cfg.task_deadline_max_s)
    return Task(size_bits=size_mb * 1e6, intensity_cpb=intensity,
                deadline_s=deadline)
