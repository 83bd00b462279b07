"""Slot-stepped decision environment for the leader's continuous control.

Per step the pipeline is: decode the raw action into a flight command and
panel phases, move the UAV, realize this slot's fading, place tasks through
the matching mechanism, split server cycles with the closed-form allocator,
account delays/energies/costs, form the reward, then advance vehicles and
draw next-slot tasks.

The observation is a flat vector in [-1, 1]: normalized UAV position,
normalized vehicle positions, task attributes scaled by their range maxima,
and the most recent ``history_len`` slots of decisions (one-hot placements,
UAV positions, phases scaled to [-1, 1], and per-server allocation
fractions).  First-slot histories are drawn uniformly at random.

Rewards mix seconds and joules, so cost terms entering the reward are
normalized: delays by the maximum task deadline and energies by the hover
flight energy.  Raw unit-mixed quantities remain available in the per-slot
cost records and the trace.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import json

import numpy as np

from .allocation import kkt_allocate
from .channel import (IrsChannelSet, composite_bs_snr, rate, rayleigh_gain,
                      rician_gain)
from .config import RngStream, SimConfig, Task, sample_task
from .costmodel import (LOCAL, SERVERS, TARGET_BS, TARGET_OF_SERVER,
                        TARGET_UAV, SlotCosts, edge_delay, edge_energy,
                        local_delay, local_energy, server_cost,
                        uav_flight_energy, validate_decision, vehicle_cost)
from .matching import run_matching
from .mobility import UavCommand, step_uav, step_vehicle_position, \
    step_vehicle_velocity

__all__ = [
    "WorldState",
    "StepOutcome",
    "MecVehicularEnv",
    "observation_dim",
    "action_dim",
    "decode_action",
    "compute_reward",
    "write_trace",
]

OffloadHook = Callable[["WorldState", Dict[str, np.ndarray]], np.ndarray]
AllocatorHook = Callable[[np.ndarray, float], object]


@dataclass
class WorldState:
    """Ground truth the environment evolves: slot, positions, tasks."""

    slot: int
    vehicle_pos: np.ndarray      # (I, 2)
    vehicle_vel: np.ndarray      # (I, 2)
    uav_pos: np.ndarray          # (2,)
    tasks: List[Task]
    irs_positions: np.ndarray    # (K, 3); row 0 fixed panel, row 1+ ride the UAV


@dataclass(frozen=True)
class StepOutcome:
    """Reward, next observation, termination flag, and the slot's records."""

    reward: float
    observation: np.ndarray
    done: bool
    costs: SlotCosts
    boundary_violated: bool
    deadline_violations: np.ndarray


def observation_dim(cfg: SimConfig) -> int:
    i, k, l, h = (cfg.num_vehicles, cfg.num_irs, cfg.elements_per_irs,
                  cfg.history_len)
    return 2 + 5 * i + h * (3 * i + 2 + k * l + 2 * i)


def action_dim(cfg: SimConfig) -> int:
    return 2 + cfg.num_irs * cfg.elements_per_irs


def decode_action(raw: np.ndarray, cfg: SimConfig) -> tuple[UavCommand, np.ndarray]:
    """Map a raw [-1, 1] vector onto speed, heading, and element phases.

    Out-of-range entries are clamped.  Heading +pi wraps to -pi and phase
    2pi wraps to 0 so the decoded ranges stay half-open.
    """
    raw = np.clip(np.asarray(raw, dtype=float), -1.0, 1.0)
    if raw.shape != (action_dim(cfg),):
        raise ValueError(f"action must have {action_dim(cfg)} entries")
    speed = (raw[0] + 1.0) / 2.0 * cfg.uav_speed_max_mps
    heading = raw[1] * np.pi
    if heading >= np.pi:
        heading = -np.pi
    phases = ((raw[2:] + 1.0) * np.pi) % (2.0 * np.pi)
    phases = phases.reshape(cfg.num_irs, cfg.elements_per_irs)
    return UavCommand(speed_mps=float(speed), heading_rad=float(heading)), phases


def compute_reward(total_vehicle_cost: float, server_cost_value: float,
                   boundary_violated: bool, deadline_violation_count: int,
                   cfg: SimConfig) -> float:
    """Negative weighted cost blend minus boundary and deadline penalties."""
    blended = cfg.weight_cost * total_vehicle_cost \
        + (1.0 - cfg.weight_cost) * server_cost_value
    return -blended \
        - cfg.penalty_boundary * float(boundary_violated) \
        - cfg.penalty_deadline * float(deadline_violation_count)


class MecVehicularEnv:
    """Single-owner, sequentially stepped environment.

    ``offload_hook`` / ``allocator_hook`` replace the matching mechanism or
    the closed-form allocator for benchmark variants; everything else stays
    identical.  ``uav_start_xy`` overrides the default area-center start.
    """

    def __init__(self, cfg: SimConfig, seed: int,
                 offload_hook: Optional[OffloadHook] = None,
                 allocator_hook: Optional[AllocatorHook] = None,
                 uav_start_xy: Optional[Sequence[float]] = None,
                 record_trace: bool = False):
        self.cfg = cfg
        self.rng = RngStream(seed)
        self.offload_hook = offload_hook
        self.allocator_hook = allocator_hook or (
            lambda w, cap: kkt_allocate(w, cap))
        self.uav_start_xy = None if uav_start_xy is None else \
            np.asarray(uav_start_xy, dtype=float)
        self.record_trace = record_trace
        self.trace: List[dict] = []
        self.world: Optional[WorldState] = None
        self._done = True
        self._histories: deque | None = None
        # reward normalizers: max deadline for delays, hover energy for joules
        self._delay_scale = cfg.task_deadline_max_s
        self._energy_scale = uav_flight_energy(0.0, cfg)

    # -- lifecycle -------------------------------------------------------

    def reset(self) -> np.ndarray:
        cfg = self.cfg
        mob = self.rng.mobility
        pos = np.column_stack([
            mob.uniform(0.0, cfg.area_x_m, size=cfg.num_vehicles),
            mob.uniform(0.0, cfg.area_y_m, size=cfg.num_vehicles),
        ])
        vel = np.tile(np.asarray(cfg.mean_velocity_mps, dtype=float),
                      (cfg.num_vehicles, 1))
        uav = self.uav_start_xy.copy() if self.uav_start_xy is not None \
            else np.array([cfg.area_x_m / 2.0, cfg.area_y_m / 2.0])
        tasks = [sample_task(self.rng.task, cfg)
                 for _ in range(cfg.num_vehicles)]
        self.world = WorldState(slot=0, vehicle_pos=pos, vehicle_vel=vel,
                                uav_pos=uav, tasks=tasks,
                                irs_positions=self._irs_positions(uav))
        self._histories = deque(
            (self._random_history() for _ in range(cfg.history_len)),
            maxlen=cfg.history_len)
        self._done = False
        self.trace = []
        return self._observation()

    def _random_history(self) -> dict:
        cfg = self.cfg
        rng = self.rng.task
        one_hot = np.zeros((cfg.num_vehicles, 3))
        one_hot[np.arange(cfg.num_vehicles),
                rng.integers(0, 3, size=cfg.num_vehicles)] = 1.0
        return {
            "placement": one_hot.ravel(),
            "uav": rng.uniform(0.0, 1.0, size=2),
            "phases": rng.uniform(-1.0, 1.0,
                                  size=cfg.num_irs * cfg.elements_per_irs),
            "alloc": rng.uniform(0.0, 1.0, size=2 * cfg.num_vehicles),
        }

    def _irs_positions(self, uav_xy: np.ndarray) -> np.ndarray:
        cfg = self.cfg
        rows = [np.asarray(cfg.fixed_irs_position_m, dtype=float)]
        carried_alt = cfg.uav_altitude_m + cfg.uav_irs_relative_alt_m
        for _ in range(cfg.num_irs - 1):
            rows.append(np.array([uav_xy[0], uav_xy[1], carried_alt]))
        return np.stack(rows)

    # -- per-slot physics --------------------------------------------------

    def _realize_channels(self) -> dict:
        """Draw this slot's fading for every link, in a fixed order."""
        cfg = self.cfg
        rng = self.rng.channel
        world = self.world
        lam = cfg.carrier_wavelength_m
        uav3 = np.array([world.uav_pos[0], world.uav_pos[1],
                         cfg.uav_altitude_m])
        bs3 = np.asarray(cfg.bs_position_m, dtype=float)
        k_lin = cfg.rician_factor_linear

        h_uav = np.zeros(cfg.num_vehicles, dtype=complex)
        h_bs_direct = np.zeros(cfg.num_vehicles, dtype=complex)
        incident = np.zeros((cfg.num_vehicles, cfg.num_irs,
                             cfg.elements_per_irs), dtype=complex)
        for i in range(cfg.num_vehicles):
            v3 = np.array([world.vehicle_pos[i, 0], world.vehicle_pos[i, 1],
                           0.0])
            d_iu = float(np.linalg.norm(v3 - uav3))
            h_uav[i] = rician_gain(d_iu, cfg.path_loss_exp_vehicle_uav,
                                   k_lin, -2.0 * np.pi * d_iu / lam,
                                   cfg.path_loss_ref, rng)
            d_ib = float(np.linalg.norm(v3 - bs3))
            h_bs_direct[i] = rayleigh_gain(d_ib, cfg.path_loss_exp_vehicle_bs,
                                           cfg.path_loss_ref, rng)
            for k in range(cfg.num_irs):
                d_ik = float(np.linalg.norm(v3 - world.irs_positions[k]))
                incident[i, k] = rician_gain(
                    d_ik, cfg.path_loss_exp_vehicle_irs, k_lin,
                    -2.0 * np.pi * d_ik / lam, cfg.path_loss_ref, rng,
                    size=cfg.elements_per_irs)
        outgoing = np.zeros((cfg.num_irs, cfg.elements_per_irs), dtype=complex)
        for k in range(cfg.num_irs):
            d_kb = float(np.linalg.norm(world.irs_positions[k] - bs3))
            outgoing[k] = rician_gain(d_kb, cfg.path_loss_exp_irs_bs, k_lin,
                                      -2.0 * np.pi * d_kb / lam,
                                      cfg.path_loss_ref, rng,
                                      size=cfg.elements_per_irs)
        return {"uav": h_uav, "bs_direct": h_bs_direct,
                "incident": incident, "outgoing": outgoing}

    def _compute_rates(self, channels: dict,
                       phases: np.ndarray) -> Dict[str, np.ndarray]:
        cfg = self.cfg
        p, n0 = cfg.tx_power_w, cfg.noise_w
        r_uav = np.zeros(cfg.num_vehicles)
        r_bs = np.zeros(cfg.num_vehicles)
        for i in range(cfg.num_vehicles):
            snr_u = p * float(np.abs(channels["uav"][i]) ** 2) / n0
            r_uav[i] = rate(cfg.bandwidth_uav_hz, snr_u)
            irs = IrsChannelSet(incident=channels["incident"][i],
                                outgoing=channels["outgoing"],
                                phases=phases)
            snr_b = composite_bs_snr(channels["bs_direct"][i], irs, p, n0)
            r_bs[i] = rate(cfg.bandwidth_bs_hz, snr_b)
        return {"uav": r_uav, "bs": r_bs}

    def _account_costs(self, decision: np.ndarray,
                       rates: Dict[str, np.ndarray],
                       alloc: Dict[str, np.ndarray],
                       flight_energy: float
                       ) -> tuple[SlotCosts, np.ndarray]:
        """Account the slot; returns the cost record and violation flags.

        A task whose raw completion time exceeds its deadline is abandoned
        at the deadline: it is flagged (feeding the reward penalty) and its
        charged delay is capped there.  Without the cap a deep fade charges
        a fictional multi-second service inside a one-second slot, giving
        the costs an unbounded heavy tail.
        """
        cfg = self.cfg
        world = self.world
        i_count = cfg.num_vehicles
        delay = np.zeros(i_count)
        energy = np.zeros(i_count)
        veh_energy = np.zeros(i_count)
        violated = np.zeros(i_count, dtype=bool)
        for i, task in enumerate(world.tasks):
            target = decision[i]
            if target == LOCAL:
                raw_delay = local_delay(task, cfg)
                energy[i] = local_energy(task, cfg)
                veh_energy[i] = energy[i]
            else:
                server = "uav" if target == TARGET_UAV else "bs"
                r = float(rates[server][i])
                f = float(alloc[server][i])
                raw_delay = edge_delay(task, r, f)
                energy[i] = edge_energy(task, r, cfg.tx_power_w,
                                        cfg.server_varpi(server))
                veh_energy[i] = cfg.tx_power_w * task.size_bits / r
            violated[i] = raw_delay > task.deadline_s
            delay[i] = min(raw_delay, task.deadline_s)
        offloaded = decision != LOCAL
        veh_costs = np.array([
            vehicle_cost(delay[i], veh_energy[i], cfg.weight_vehicle)
            for i in range(i_count)])
        sc = server_cost(float(np.sum(delay[offloaded])),
                         float(np.sum(energy[offloaded])),
                         flight_energy, cfg.weight_server)
        costs = SlotCosts(decision=decision, delay_s=delay, energy_j=energy,
                          vehicle_energy_j=veh_energy,
                          flight_energy_j=flight_energy,
                          vehicle_costs=veh_costs, server_cost_value=sc)
        return costs, violated

    def _normalized_costs(self, costs: SlotCosts) -> tuple[float, float]:
        """Vehicle-cost sum and server cost with delay/energy normalizers."""
        cfg = self.cfg
        ds, es = self._delay_scale, self._energy_scale
        veh = sum(
            vehicle_cost(costs.delay_s[i], costs.vehicle_energy_j[i],
                         cfg.weight_vehicle, ds, es)
            for i in range(cfg.num_vehicles))
        offloaded = costs.decision != LOCAL
        srv = server_cost(float(np.sum(costs.delay_s[offloaded])),
                          float(np.sum(costs.energy_j[offloaded])),
                          costs.flight_energy_j, cfg.weight_server, ds, es)
        return float(veh), float(srv)

    # -- stepping ----------------------------------------------------------

    def step(self, raw_action: np.ndarray) -> StepOutcome:
        if self._done or self.world is None:
            raise RuntimeError("episode finished; call reset() first")
        cfg = self.cfg
        world = self.world

        cmd, phases = decode_action(raw_action, cfg)
        world.uav_pos, boundary = step_uav(world.uav_pos, cmd, cfg)
        world.irs_positions = self._irs_positions(world.uav_pos)

        channels = self._realize_channels()
        rates = self._compute_rates(channels, phases)

        if self.offload_hook is not None:
            decision = self.offload_hook(world, rates)
        else:
            decision, _ = run_matching(world.tasks, rates, cfg)
        validate_decision(decision, cfg)

        alloc = {}
        for server in SERVERS:
            mask = decision == TARGET_OF_SERVER[server]
            workloads = np.where(
                mask, [t.workload_cycles for t in world.tasks], 0.0)
            result = self.allocator_hook(workloads[mask],
                                         cfg.server_cpu_hz(server))
            f_full = np.zeros(cfg.num_vehicles)
            f_full[mask] = result.f_hz
            alloc[server] = f_full

        flight = uav_flight_energy(cmd.speed_mps, cfg)
        costs, deadline_violated = self._account_costs(decision, rates,
                                                       alloc, flight)
        veh_norm, srv_norm = self._normalized_costs(costs)
        reward = compute_reward(veh_norm, srv_norm, boundary,
                                int(np.sum(deadline_violated)), cfg)

        self._push_history(decision, phases, alloc)

        if self.record_trace:
            self.trace.append({
                "slot": world.slot,
                "uav_pos": world.uav_pos.tolist(),
                "vehicle_pos": world.vehicle_pos.tolist(),
                "decision": decision.tolist(),
                "delay_s": costs.delay_s.tolist(),
                "energy_j": costs.energy_j.tolist(),
                "flight_energy_j": costs.flight_energy_j,
                "vehicle_costs": costs.vehicle_costs.tolist(),
                "server_cost": costs.server_cost_value,
                "reward": reward,
                "boundary_violated": boundary,
                "deadline_violations": deadline_violated.tolist(),
            })

        # advance vehicles and draw next-slot tasks
        world.vehicle_pos, world.vehicle_vel = step_vehicle_position(
            world.vehicle_pos, world.vehicle_vel, cfg)
        world.vehicle_vel = step_vehicle_velocity(world.vehicle_vel, cfg,
                                                  self.rng.mobility)
        world.tasks = [sample_task(self.rng.task, cfg)
                       for _ in range(cfg.num_vehicles)]
        world.slot += 1
        self._done = world.slot >= cfg.num_slots

        return StepOutcome(reward=reward, observation=self._observation(),
                           done=self._done, costs=costs,
                           boundary_violated=boundary,
                           deadline_violations=deadline_violated)

    def _push_history(self, decision: np.ndarray, phases: np.ndarray,
                      alloc: Dict[str, np.ndarray]) -> None:
        cfg = self.cfg
        one_hot = np.zeros((cfg.num_vehicles, 3))
        one_hot[np.arange(cfg.num_vehicles), decision] = 1.0
        frac = np.column_stack([alloc["uav"] / cfg.uav_cpu_hz,
                                alloc["bs"] / cfg.bs_cpu_hz])
        self._histories.appendleft({
            "placement": one_hot.ravel(),
            "uav": self.world.uav_pos
            / np.array([cfg.area_x_m, cfg.area_y_m]),
            "phases": phases.ravel() / np.pi - 1.0,
            "alloc": frac.ravel(),
        })

    def _observation(self) -> np.ndarray:
        cfg = self.cfg
        world = self.world
        area = np.array([cfg.area_x_m, cfg.area_y_m])
        parts = [world.uav_pos / area, (world.vehicle_pos / area).ravel()]
        attrs = np.array([
            [t.size_bits / cfg.task_size_max_bits,
             t.intensity_cpb / cfg.task_intensity_max,
             t.deadline_s / cfg.task_deadline_max_s]
            for t in world.tasks])
        parts.append(attrs.ravel())
        for record in self._histories:  # most recent first
            parts.extend([record["placement"], record["uav"],
                          record["phases"], record["alloc"]])
        obs = np.concatenate(parts)
        assert obs.shape == (observation_dim(cfg),)
        return obs


def write_trace(records: Sequence[dict], path: str) -> None:
    """Dump per-slot records as line-delimited JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
