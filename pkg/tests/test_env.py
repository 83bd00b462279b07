from dataclasses import replace

import numpy as np
import pytest

from irsmec import SimConfig
from irsmec.costmodel import LOCAL, TARGET_OF_SERVER, uav_flight_energy, \
    vehicle_cost, server_cost
from irsmec.env import (MecVehicularEnv, action_dim, compute_reward,
                        decode_action, observation_dim)


def test_observation_dim_formula():
    cfg = SimConfig()
    i, k, l, h = 10, 2, 64, 1
    assert observation_dim(cfg) == 2 + 5 * i + h * (3 * i + 2 + k * l + 2 * i)
    assert observation_dim(cfg) == 232


def test_observation_dim_with_longer_history(small_cfg):
    cfg = replace(small_cfg, history_len=3)
    i, k, l = cfg.num_vehicles, cfg.num_irs, cfg.elements_per_irs
    assert observation_dim(cfg) == 2 + 5 * i + 3 * (3 * i + 2 + k * l + 2 * i)


def test_reset_is_deterministic(small_cfg):
    e1 = MecVehicularEnv(small_cfg, seed=5)
    e2 = MecVehicularEnv(small_cfg, seed=5)
    assert np.array_equal(e1.reset(), e2.reset())


def test_observation_bounded(small_cfg):
    env = MecVehicularEnv(small_cfg, seed=0)
    obs = env.reset()
    assert np.all(obs >= -1.0) and np.all(obs <= 1.0)
    rng = np.random.default_rng(0)
    for _ in range(small_cfg.num_slots):
        out = env.step(rng.uniform(-1, 1, size=action_dim(small_cfg)))
        assert np.all(out.observation >= -1.0) and np.all(out.observation <= 1.0)


def test_decode_action_bounds_midpoint_and_wrap():
    cfg = SimConfig()
    dim = action_dim(cfg)
    cmd, phases = decode_action(-np.ones(dim), cfg)
    assert cmd.speed_mps == 0.0 and cmd.heading_rad == -np.pi
    assert np.all(phases == 0.0)
    cmd, phases = decode_action(np.zeros(dim), cfg)
    assert cmd.speed_mps == pytest.approx(cfg.uav_speed_max_mps / 2)
    assert cmd.heading_rad == 0.0
    assert np.all(phases == pytest.approx(np.pi))
    cmd, phases = decode_action(np.ones(dim), cfg)
    assert cmd.speed_mps == pytest.approx(cfg.uav_speed_max_mps)
    assert cmd.heading_rad == -np.pi  # +pi wraps into [-pi, pi)
    assert np.all(phases == 0.0)      # 2pi wraps into [0, 2pi)


def test_decode_action_clamps_out_of_range():
    cfg = SimConfig()
    raw = np.full(action_dim(cfg), 3.0)
    cmd, _ = decode_action(raw, cfg)
    assert cmd.speed_mps == pytest.approx(cfg.uav_speed_max_mps)


def test_compute_reward_cases():
    cfg = SimConfig()
    assert compute_reward(2.0, 4.0, False, 0, cfg) == pytest.approx(-3.0)
    assert compute_reward(2.0, 4.0, False, 1, cfg) == pytest.approx(-8.0)
    assert compute_reward(0.0, 0.0, True, 0, cfg) == pytest.approx(-10.0)


def test_step_determinism_across_instances(small_cfg):
    e1 = MecVehicularEnv(small_cfg, seed=9)
    e2 = MecVehicularEnv(small_cfg, seed=9)
    e1.reset(), e2.reset()
    rng = np.random.default_rng(1)
    for _ in range(2):
        a = rng.uniform(-1, 1, size=action_dim(small_cfg))
        o1, o2 = e1.step(a), e2.step(a)
        assert o1.reward == o2.reward
        assert np.array_equal(o1.observation, o2.observation)
        assert np.array_equal(o1.costs.decision, o2.costs.decision)


def test_done_exactly_at_horizon(small_cfg):
    env = MecVehicularEnv(small_cfg, seed=0)
    env.reset()
    zero = np.zeros(action_dim(small_cfg))
    for step in range(small_cfg.num_slots):
        out = env.step(zero)
        assert out.done == (step == small_cfg.num_slots - 1)
    with pytest.raises(RuntimeError):
        env.step(zero)


def test_step_constraints_every_slot(small_cfg):
    cfg = small_cfg
    from irsmec.allocation import kkt_allocate
    budgets = []

    def recording_allocator(workloads, capacity):
        result = kkt_allocate(workloads, capacity)
        budgets.append((float(np.sum(result.f_hz)), capacity,
                        bool(np.all(result.f_hz >= 0))))
        return result

    env = MecVehicularEnv(cfg, seed=3, allocator_hook=recording_allocator)
    env.reset()
    rng = np.random.default_rng(2)
    for _ in range(cfg.num_slots):
        out = env.step(rng.uniform(-1, 1, size=action_dim(cfg)))
        decision = out.costs.decision
        # one target per vehicle, capacity limits
        assert decision.shape == (cfg.num_vehicles,)
        assert np.sum(decision == TARGET_OF_SERVER["uav"]) <= cfg.uav_cores
        assert np.sum(decision == TARGET_OF_SERVER["bs"]) <= cfg.bs_cores
        assert 0 <= env.world.uav_pos[0] <= cfg.area_x_m
        assert 0 <= env.world.uav_pos[1] <= cfg.area_y_m
    # every in-step cycle split stayed within (and, when used, exhausted)
    # the server budget
    assert budgets
    for total, capacity, nonneg in budgets:
        assert nonneg
        assert total <= capacity * (1 + 1e-12)
        assert total == 0.0 or abs(total - capacity) <= 1e-9 * capacity


def test_local_only_fallback_when_rates_forced_zero(small_cfg, monkeypatch):
    cfg = small_cfg
    env = MecVehicularEnv(cfg, seed=4)
    env.reset()
    tasks = list(env.world.tasks)
    monkeypatch.setattr(env, "_compute_rates", lambda channels, phases: {
        "uav": np.zeros(cfg.num_vehicles), "bs": np.zeros(cfg.num_vehicles)})
    # zero-speed action: raw speed entry -1
    action = np.zeros(action_dim(cfg))
    action[0] = -1.0
    out = env.step(action)
    assert np.all(out.costs.decision == LOCAL)
    # hand-recomputed reward: local costs plus hover-only server cost;
    # a task abandoned at its deadline is charged up to the deadline
    hover = uav_flight_energy(0.0, cfg)
    ds, es = cfg.task_deadline_max_s, hover
    veh = sum(vehicle_cost(min(t.workload_cycles / cfg.vehicle_cpu_hz,
                               t.deadline_s),
                           cfg.kappa_vehicle * cfg.vehicle_cpu_hz ** 2
                           * t.workload_cycles,
                           cfg.weight_vehicle, ds, es) for t in tasks)
    srv = server_cost(0.0, 0.0, hover, cfg.weight_server, ds, es)
    violations = sum(t.workload_cycles / cfg.vehicle_cpu_hz > t.deadline_s
                     for t in tasks)
    expected = compute_reward(veh, srv, False, violations, cfg)
    assert out.reward == pytest.approx(expected, rel=1e-12)


def test_reward_matches_reaggregation_oracle(small_cfg):
    cfg = small_cfg
    env = MecVehicularEnv(cfg, seed=6)
    env.reset()
    rng = np.random.default_rng(3)
    hover = uav_flight_energy(0.0, cfg)
    ds, es = cfg.task_deadline_max_s, hover
    for _ in range(cfg.num_slots):
        tasks = list(env.world.tasks)
        out = env.step(rng.uniform(-1, 1, size=action_dim(cfg)))
        costs = out.costs
        # independent recomputation from the slot record and flags
        veh = sum(vehicle_cost(costs.delay_s[i], costs.vehicle_energy_j[i],
                               cfg.weight_vehicle, ds, es)
                  for i in range(cfg.num_vehicles))
        offl = costs.decision != LOCAL
        srv = server_cost(float(costs.delay_s[offl].sum()),
                          float(costs.energy_j[offl].sum()),
                          costs.flight_energy_j, cfg.weight_server, ds, es)
        expected = compute_reward(veh, srv, out.boundary_violated,
                                  int(np.sum(out.deadline_violations)), cfg)
        assert out.reward == pytest.approx(expected, rel=1e-12)
        # charged delay never exceeds the deadline; a flagged task was
        # abandoned exactly there
        deadlines = np.array([t.deadline_s for t in tasks])
        assert np.all(costs.delay_s <= deadlines + 1e-12)
        assert np.all(costs.delay_s[out.deadline_violations]
                      == deadlines[out.deadline_violations])


def test_boundary_violation_penalizes(small_cfg):
    cfg = small_cfg
    env = MecVehicularEnv(cfg, seed=7, uav_start_xy=(cfg.area_x_m - 1.0,
                                                     cfg.area_y_m / 2))
    env.reset()
    action = np.zeros(action_dim(cfg))
    action[0] = 1.0  # full speed
    action[1] = 0.0  # heading +x, straight out of the area
    out = env.step(action)
    assert out.boundary_violated
    assert env.world.uav_pos[0] == cfg.area_x_m


def test_histories_hold_previous_slots(small_cfg):
    cfg = replace(small_cfg, history_len=2)
    env = MecVehicularEnv(cfg, seed=8)
    env.reset()
    rng = np.random.default_rng(4)
    seen = []
    for _ in range(3):
        action = rng.uniform(-1, 1, size=action_dim(cfg))
        out = env.step(action)
        _, phases = decode_action(action, cfg)
        seen.append((out.costs.decision.copy(), phases.ravel() / np.pi - 1.0))
    obs = out.observation
    i, k, l = cfg.num_vehicles, cfg.num_irs, cfg.elements_per_irs
    block = 3 * i + 2 + k * l + 2 * i
    base = 2 + 5 * i
    for age in range(2):  # age 0 = most recent slot
        chunk = obs[base + age * block: base + (age + 1) * block]
        decision, phase_raw = seen[-1 - age]
        one_hot = chunk[:3 * i].reshape(i, 3)
        assert np.array_equal(one_hot.argmax(axis=1), decision)
        assert np.allclose(chunk[3 * i + 2: 3 * i + 2 + k * l], phase_raw)


def test_trace_records_every_slot(small_cfg, tmp_path):
    import json
    from irsmec.env import write_trace
    env = MecVehicularEnv(small_cfg, seed=1, record_trace=True)
    env.reset()
    rng = np.random.default_rng(5)
    for _ in range(small_cfg.num_slots):
        env.step(rng.uniform(-1, 1, size=action_dim(small_cfg)))
    assert len(env.trace) == small_cfg.num_slots
    path = tmp_path / "trace.jsonl"
    write_trace(env.trace, str(path))
    lines = path.read_text().splitlines()
    assert len(lines) == small_cfg.num_slots
    record = json.loads(lines[0])
    assert {"slot", "decision", "reward", "server_cost"} <= record.keys()
