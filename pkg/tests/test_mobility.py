from dataclasses import replace

import numpy as np
import pytest

from irsmec import SimConfig
from irsmec.mobility import (UavCommand, step_uav, step_vehicle_position,
                             step_vehicle_velocity)


def test_full_memory_keeps_velocity():
    cfg = replace(SimConfig(), mobility_memory=1.0)
    rng = np.random.default_rng(0)
    v = np.array([3.0, -2.0])
    assert np.allclose(step_vehicle_velocity(v, cfg, rng), v)


def test_memoryless_noiseless_jumps_to_mean():
    cfg = replace(SimConfig(), mobility_memory=0.0, velocity_std_mps=0.0,
                  mean_velocity_mps=(4.0, 1.0))
    rng = np.random.default_rng(0)
    out = step_vehicle_velocity(np.array([99.0, 99.0]), cfg, rng)
    assert np.allclose(out, [4.0, 1.0])


def test_one_step_mean_matches_process_moments():
    # Monte-Carlo oracle: mean of a*v + (1-a)*vbar + sqrt(1-a^2) w
    cfg = replace(SimConfig(), mobility_memory=0.8,
                  mean_velocity_mps=(5.0, 0.0), velocity_std_mps=1.0)
    rng = np.random.default_rng(42)
    v0 = np.array([2.0, 1.0])
    n = 100_000
    samples = step_vehicle_velocity(np.tile(v0, (n, 1)), cfg, rng)
    expected = 0.8 * v0 + 0.2 * np.array([5.0, 0.0])
    std_err = np.sqrt(1 - 0.8 ** 2) * 1.0 / np.sqrt(n)
    assert np.all(np.abs(samples.mean(axis=0) - expected) < 3 * std_err)


def test_long_run_velocity_mean_is_stationary():
    cfg = replace(SimConfig(), mobility_memory=0.6,
                  mean_velocity_mps=(3.0, -1.0), velocity_std_mps=0.5)
    rng = np.random.default_rng(1)
    v = np.zeros(2)
    history = []
    for _ in range(20_000):
        v = step_vehicle_velocity(v, cfg, rng)
        history.append(v)
    mean = np.mean(history, axis=0)
    assert np.all(np.abs(mean - [3.0, -1.0]) < 0.05)


def test_position_step_is_linear():
    cfg = SimConfig()
    pos, vel = step_vehicle_position(np.array([0.0, 0.0]),
                                     np.array([3.0, 4.0]), cfg)
    assert np.allclose(pos, [3.0, 4.0])
    assert np.allclose(vel, [3.0, 4.0])


def test_position_reflects_at_wall():
    # hand rule: 999 + 5 = 1004 -> 2*1000 - 1004 = 996 with vx negated
    cfg = SimConfig()
    pos, vel = step_vehicle_position(np.array([999.0, 0.0]),
                                     np.array([5.0, 0.0]), cfg)
    assert np.allclose(pos, [996.0, 0.0])
    assert np.allclose(vel, [-5.0, 0.0])


def test_zero_velocity_rests():
    cfg = SimConfig()
    pos, vel = step_vehicle_position(np.array([10.0, 20.0]),
                                     np.zeros(2), cfg)
    assert np.allclose(pos, [10.0, 20.0])


def test_reflection_keeps_vehicles_inside():
    cfg = SimConfig()
    rng = np.random.default_rng(0)
    pos = rng.uniform(0, 1000, size=(50, 2))
    vel = rng.uniform(-400, 400, size=(50, 2))  # big enough to overshoot
    for _ in range(20):
        pos, vel = step_vehicle_position(pos, vel, cfg)
        assert np.all(pos >= 0) and np.all(pos[:, 0] <= 1000) \
            and np.all(pos[:, 1] <= 1000)


def test_uav_axis_aligned_step():
    cfg = SimConfig()
    pos, violated = step_uav(np.array([0.0, 0.0]),
                             UavCommand(10.0, 0.0), cfg)
    assert np.allclose(pos, [10.0, 0.0]) and not violated


def test_uav_clamped_at_boundary_with_flag():
    cfg = SimConfig()
    pos, violated = step_uav(np.array([995.0, 500.0]),
                             UavCommand(25.0, 0.0), cfg)
    assert np.allclose(pos, [1000.0, 500.0]) and violated


def test_uav_hover_keeps_position():
    cfg = SimConfig()
    pos, violated = step_uav(np.array([123.0, 456.0]),
                             UavCommand(0.0, 1.0), cfg)
    assert np.allclose(pos, [123.0, 456.0]) and not violated


def test_uav_always_inside_area_after_step():
    cfg = SimConfig()
    rng = np.random.default_rng(9)
    pos = np.array([500.0, 500.0])
    for _ in range(500):
        cmd = UavCommand(rng.uniform(0, 25), rng.uniform(-np.pi, np.pi))
        pos, _ = step_uav(pos, cmd, cfg)
        assert 0 <= pos[0] <= 1000 and 0 <= pos[1] <= 1000


def test_uav_command_bounds_enforced():
    cfg = SimConfig()
    with pytest.raises(ValueError):
        step_uav(np.zeros(2), UavCommand(26.0, 0.0), cfg)
    with pytest.raises(ValueError):
        step_uav(np.zeros(2), UavCommand(5.0, np.pi), cfg)
