"""Benchmark decision rules: each freezes exactly one decision of the full
pipeline and leaves the rest untouched.

``nearest_offload`` replaces the matching mechanism with nearest-server
selection, ``equal_alloc`` replaces the closed-form CPU split with an even
one, ``fixed_phase`` freezes the panel phases for a whole episode,
``circular_uav`` scripts the flight commands along a circle, and the
``td3`` / ``ddpg`` variants swap the learner internals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .allocation import AllocationResult
from .config import SimConfig
from .costmodel import LOCAL, TARGET_BS, TARGET_UAV
from .mobility import UavCommand

__all__ = [
    "VARIANTS",
    "PolicySpec",
    "nao_decide",
    "ecra_allocate",
    "fipsc_phases",
    "cutc_command",
    "cutc_start_xy",
    "learner_variant",
]

VARIANTS = ("full", "nearest_offload", "equal_alloc", "fixed_phase",
            "circular_uav", "td3", "ddpg")


@dataclass(frozen=True)
class PolicySpec:
    """Which variant to run plus its frozen-decision parameters."""

    variant: str = "full"
    circle_radius_m: Optional[float] = None   # defaults to cfg.cutc_radius_m
    zero_phases: Optional[bool] = None        # defaults to cfg.fipsc_zero_phases

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; "
                             f"choose from {VARIANTS}")


def nao_decide(world, cfg: SimConfig) -> np.ndarray:
    """Send every task to its nearest server, capacity permitting.

    Distances are 3D (the aerial server sits at altitude).  Vehicles are
    admitted in ascending distance to their preferred server; a vehicle
    whose nearest server is full takes the other one if it has a free
    core, and runs locally once both are full.  Equidistant vehicles pick
    the aerial server.
    """
    uav3 = np.array([world.uav_pos[0], world.uav_pos[1], cfg.uav_altitude_m])
    bs3 = np.asarray(cfg.bs_position_m, dtype=float)
    decision = np.full(cfg.num_vehicles, LOCAL, dtype=np.int64)
    entries = []
    for i in range(cfg.num_vehicles):
        v3 = np.array([world.vehicle_pos[i, 0], world.vehicle_pos[i, 1], 0.0])
        d_uav = float(np.linalg.norm(v3 - uav3))
        d_bs = float(np.linalg.norm(v3 - bs3))
        if d_uav <= d_bs:
            entries.append((d_uav, i, TARGET_UAV, TARGET_BS))
        else:
            entries.append((d_bs, i, TARGET_BS, TARGET_UAV))
    entries.sort()
    remaining = {TARGET_UAV: cfg.uav_cores, TARGET_BS: cfg.bs_cores}
    for _, i, preferred, fallback in entries:
        for target in (preferred, fallback):
            if remaining[target] > 0:
                decision[i] = target
                remaining[target] -= 1
                break
    return decision


def ecra_allocate(workloads_cycles: np.ndarray,
                  capacity_hz: float) -> AllocationResult:
    """Even CPU split across however many tasks the server holds."""
    w = np.asarray(workloads_cycles, dtype=float)
    f = np.zeros_like(w)
    if w.size:
        f[:] = capacity_hz / w.size
    return AllocationResult(f_hz=f, multiplier=0.0)


def fipsc_phases(cfg: SimConfig, rng: np.random.Generator,
                 zero: Optional[bool] = None) -> np.ndarray:
    """One phase draw held for the whole horizon; optionally all zeros."""
    if zero is None:
        zero = cfg.fipsc_zero_phases
    shape = (cfg.num_irs, cfg.elements_per_irs)
    if zero:
        return np.zeros(shape)
    return rng.uniform(0.0, 2.0 * np.pi, size=shape)


def _circle_geometry(cfg: SimConfig, radius: Optional[float]):
    r = cfg.cutc_radius_m if radius is None else radius
    center = np.array([cfg.area_x_m / 2.0, cfg.area_y_m / 2.0])
    if center[0] - r < 0 or center[0] + r > cfg.area_x_m \
            or center[1] - r < 0 or center[1] + r > cfg.area_y_m:
        raise ValueError("circle exceeds the service area")
    return r, center


def cutc_start_xy(cfg: SimConfig,
                  radius: Optional[float] = None) -> np.ndarray:
    """Start point on the circle (zero angle)."""
    r, center = _circle_geometry(cfg, radius)
    return center + np.array([r, 0.0])


def cutc_command(slot: int, cfg: SimConfig,
                 radius: Optional[float] = None) -> UavCommand:
    """Scripted command tracing the circle at near-constant speed.

    Speed is the circumference over the horizon, capped at the maximum.
    Heading follows the tangent at the midpoint of the slot's arc so the
    integrated positions stay on the circle instead of spiraling outward.
    """
    r, _ = _circle_geometry(cfg, radius)
    speed = min(2.0 * np.pi * r / (cfg.num_slots * cfg.slot_duration_s),
                cfg.uav_speed_max_mps)
    d_angle = speed * cfg.slot_duration_s / r
    angle = slot * d_angle
    heading = angle + d_angle / 2.0 + np.pi / 2.0
    heading = (heading + np.pi) % (2.0 * np.pi) - np.pi
    if heading >= np.pi:
        heading = -np.pi
    return UavCommand(speed_mps=float(speed), heading_rad=float(heading))


def learner_variant(spec: PolicySpec, cfg: SimConfig):
    """Learner internals for each variant, as ``AgentSettings``.

    The plain "td3" drops the generative actor for a direct tanh head;
    "ddpg" additionally uses the first target critic alone and updates the
    actor every step.  Everything else keeps the generative actor with the
    configured update delay.
    """
    from .learn.agent import AgentSettings  # deferred: learn pulls baselines

    if spec.variant == "td3":
        return AgentSettings(actor_kind="deterministic", twin_min=True,
                             policy_delay=cfg.policy_delay)
    if spec.variant == "ddpg":
        return AgentSettings(actor_kind="deterministic", twin_min=False,
                             policy_delay=0)
    return AgentSettings(actor_kind="diffusion", twin_min=True,
                         policy_delay=cfg.policy_delay)
