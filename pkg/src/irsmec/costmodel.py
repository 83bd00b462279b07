"""Delay, energy, and cost accounting for local and offloaded execution.

Target codes: 0 = local, 1 = aerial server, 2 = ground server.  A decision
vector holds one code per vehicle.  The vehicle is charged full local energy
when computing on board but only the uplink transmission energy when
offloading; the server side is charged the full offloading delay and energy
plus the flight energy of the aerial platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import SimConfig, Task

__all__ = [
    "LOCAL", "TARGET_UAV", "TARGET_BS", "SERVERS", "TARGET_OF_SERVER",
    "SlotCosts", "EpisodeMetrics",
    "local_delay", "edge_delay", "local_energy", "edge_energy",
    "uav_flight_energy", "vehicle_cost", "server_cost",
    "validate_decision", "accumulate_totals",
]

LOCAL = 0
TARGET_UAV = 1
TARGET_BS = 2
SERVERS = ("uav", "bs")
TARGET_OF_SERVER = {"uav": TARGET_UAV, "bs": TARGET_BS}


def validate_decision(decision: np.ndarray, cfg: SimConfig) -> None:
    """Exactly one target per vehicle and per-server core capacity respected."""
    decision = np.asarray(decision)
    if decision.shape != (cfg.num_vehicles,):
        raise ValueError("decision must hold one target per vehicle")
    if not np.all(np.isin(decision, (LOCAL, TARGET_UAV, TARGET_BS))):
        raise ValueError("decision entries must be in {local, uav, bs}")
    if np.sum(decision == TARGET_UAV) > cfg.uav_cores:
        raise ValueError("aerial server over core capacity")
    if np.sum(decision == TARGET_BS) > cfg.bs_cores:
        raise ValueError("ground server over core capacity")


def local_delay(task: Task, cfg: SimConfig) -> float:
    """On-board processing time: D G / F_vehicle."""
    return task.workload_cycles / cfg.vehicle_cpu_hz


def edge_delay(task: Task, rate_bps: float, f_alloc_hz: float) -> float:
    """Uplink plus remote compute time: D / R + D G / f."""
    if rate_bps <= 0:
        raise ValueError(f"link outage: rate {rate_bps} <= 0")
    if f_alloc_hz <= 0:
        raise ValueError(f"unallocated server: f {f_alloc_hz} <= 0")
    return task.size_bits / rate_bps + task.workload_cycles / f_alloc_hz


def local_energy(task: Task, cfg: SimConfig) -> float:
    """Switched-capacitance CPU energy: kappa F^2 D G."""
    return cfg.kappa_vehicle * cfg.vehicle_cpu_hz ** 2 * task.workload_cycles


def edge_energy(task: Task, rate_bps: float, tx_power_w: float,
                varpi: float) -> float:
    """Uplink transmission energy plus server compute energy."""
    if rate_bps <= 0:
        raise ValueError(f"link outage: rate {rate_bps} <= 0")
    return tx_power_w * task.size_bits / rate_bps \
        + varpi * task.workload_cycles


def uav_flight_energy(speed_mps: float, cfg: SimConfig) -> float:
    """Rotary-wing propulsion energy for one slot at the given speed."""
    if speed_mps < 0:
        raise ValueError("speed must be nonnegative")
    v2 = speed_mps ** 2
    blade = cfg.eta1 * (1.0 + 3.0 * v2 / cfg.rotor_tip_speed_mps ** 2)
    parasite = cfg.eta4 * speed_mps ** 3
    induced = cfg.eta2 * np.sqrt(
        np.sqrt(cfg.eta3 + v2 ** 2 / 4.0) - v2 / 2.0)
    return cfg.slot_duration_s * (blade + parasite + induced)


def vehicle_cost(delay_s: float, charged_energy_j: float, weight: float,
                 delay_scale: float = 1.0, energy_scale: float = 1.0) -> float:
    """Weighted blend of the vehicle's delay and its charged energy.

    ``charged_energy_j`` is the full local energy when computing on board,
    but only the transmission energy when offloading.  Scales of 1 give the
    raw unit-mixed cost; the environment passes normalizers for the reward.
    """
    return weight * delay_s / delay_scale \
        + (1.0 - weight) * charged_energy_j / energy_scale


def server_cost(offloaded_delay_sum_s: float, offloaded_energy_sum_j: float,
                flight_energy_j: float, weight: float,
                delay_scale: float = 1.0, energy_scale: float = 1.0) -> float:
    """Provider-side cost: offloaded delays and energies plus flight energy."""
    return weight * offloaded_delay_sum_s / delay_scale \
        + (1.0 - weight) * (offloaded_energy_sum_j + flight_energy_j) \
        / energy_scale


@dataclass(frozen=True)
class SlotCosts:
    """Raw physical quantities and unit-mixed costs for one slot.

    ``energy_j`` holds the chosen-target total energy per vehicle (full
    offloading energy when remote); ``vehicle_energy_j`` holds only what is
    charged to the vehicle.  ``vehicle_costs`` / ``server_cost_value`` are
    the unscaled cost blends recomputable from the other fields.
    """

    decision: np.ndarray
    delay_s: np.ndarray
    energy_j: np.ndarray
    vehicle_energy_j: np.ndarray
    flight_energy_j: float
    vehicle_costs: np.ndarray
    server_cost_value: float


@dataclass(frozen=True)
class EpisodeMetrics:
    """Episode totals: delay, energy (with flight), costs, and reward."""

    total_delay_s: float
    total_energy_j: float
    total_vehicle_cost: float
    total_server_cost: float
    total_reward: float


def accumulate_totals(slots: Sequence[SlotCosts],
                      rewards: Sequence[float] | None = None) -> EpisodeMetrics:
    """Sum per-slot records into episode totals.

    Total energy adds the flight energy of every slot on top of the
    chosen-target task energies.
    """
    total_delay = float(sum(np.sum(s.delay_s) for s in slots))
    total_energy = float(sum(np.sum(s.energy_j) + s.flight_energy_j
                             for s in slots))
    total_vc = float(sum(np.sum(s.vehicle_costs) for s in slots))
    total_sc = float(sum(s.server_cost_value for s in slots))
    total_reward = float(sum(rewards)) if rewards is not None else 0.0
    return EpisodeMetrics(total_delay, total_energy, total_vc, total_sc,
                          total_reward)
