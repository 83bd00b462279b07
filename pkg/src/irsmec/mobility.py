"""Per-slot vehicle and UAV kinematics with service-area boundary handling.

Vehicles follow a first-order Gauss-Markov velocity process and reflect off
the area edges (position mirrored, velocity component negated).  The UAV
moves by speed/heading command and is clamped to the area; the clamp is
reported so the caller can charge a boundary penalty instead of rejecting
the command.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .config import SimConfig

__all__ = [
    "UavCommand",
    "step_vehicle_velocity",
    "step_vehicle_position",
    "step_uav",
]


@dataclass(frozen=True)
class UavCommand:
    """Speed in [0, v_max] plus heading in [-pi, pi)."""

    speed_mps: float
    heading_rad: float


def step_vehicle_velocity(velocity: np.ndarray, cfg: SimConfig,
                          rng: np.random.Generator) -> np.ndarray:
    """Advance one Gauss-Markov velocity step.

    v' = a v + (1 - a) v_mean + sqrt(1 - a^2) w,  w ~ N(0, sigma^2 I).
    ``velocity`` may be a single (2,) vector or an (I, 2) batch.
    """
    alpha = cfg.mobility_memory
    mean = np.asarray(cfg.mean_velocity_mps, dtype=float)
    noise = rng.normal(0.0, cfg.velocity_std_mps, size=np.shape(velocity))
    return alpha * np.asarray(velocity, dtype=float) + (1.0 - alpha) * mean \
        + np.sqrt(1.0 - alpha ** 2) * noise


def _reflect(coord: float, velocity: float, limit: float) -> Tuple[float, float]:
    # mirror repeatedly in case a single step overshoots both walls
    while coord < 0.0 or coord > limit:
        if coord < 0.0:
            coord = -coord
            velocity = -velocity
        else:
            coord = 2.0 * limit - coord
            velocity = -velocity
    return coord, velocity


def step_vehicle_position(position: np.ndarray, velocity: np.ndarray,
                          cfg: SimConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Move by one slot and reflect off the area walls.

    Returns the new position and the (possibly sign-flipped) velocity.
    Accepts a single (2,) pair or (I, 2) batches.
    """
    pos = np.atleast_2d(np.asarray(position, dtype=float)).copy()
    vel = np.atleast_2d(np.asarray(velocity, dtype=float)).copy()
    pos += vel * cfg.slot_duration_s
    limits = (cfg.area_x_m, cfg.area_y_m)
    for row in range(pos.shape[0]):
        for axis in range(2):
            pos[row, axis], vel[row, axis] = _reflect(
                pos[row, axis], vel[row, axis], limits[axis])
    if np.ndim(position) == 1:
        return pos[0], vel[0]
    return pos, vel


def step_uav(position: np.ndarray, cmd: UavCommand,
             cfg: SimConfig) -> Tuple[np.ndarray, bool]:
    """Advance the UAV by one commanded step, clamping to the area.

    Returns (new position, boundary_violated).  The flag is consumed by the
    reward's boundary penalty.
    """
    if not (0.0 <= cmd.speed_mps <= cfg.uav_speed_max_mps):
        raise ValueError(f"UAV speed {cmd.speed_mps} outside [0, "
                         f"{cfg.uav_speed_max_mps}]")
    if not (-np.pi <= cmd.heading_rad < np.pi):
        raise ValueError(f"UAV heading {cmd.heading_rad} outside [-pi, pi)")
    dt = cfg.slot_duration_s
    new = np.array([
        position[0] + dt * cmd.speed_mps * np.cos(cmd.heading_rad),
        position[1] + dt * cmd.speed_mps * np.sin(cmd.heading_rad),
    ])
    clamped = np.clip(new, [0.0, 0.0], [cfg.area_x_m, cfg.area_y_m])
    violated = bool(np.any(clamped != new))
    return clamped, violated
