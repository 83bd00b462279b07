"""Training loop, evaluation rollouts, and checkpoint round-tripping.

Per step the agent generates an action, the environment executes it (the
matching mechanism and the closed-form allocator run inside), the
transition is stored, one critic update runs on a uniform mini-batch, and
every ``policy_delay + 1`` critic updates the actor and targets follow.
Episode metrics accumulate the raw cost totals plus the reward.

Benchmark variants wrap the same loop: frozen phase or scripted flight
entries overwrite the corresponding raw action dimensions, and the
environment hooks swap the offloading or allocation rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from ..baselines import (PolicySpec, cutc_command, cutc_start_xy, ecra_allocate,
                         fipsc_phases, learner_variant, nao_decide)
from ..config import RngStream, SimConfig, config_hash
from ..costmodel import EpisodeMetrics, accumulate_totals
from ..env import MecVehicularEnv, action_dim, observation_dim
from .agent import ReplayBuffer, Td3Agent

__all__ = [
    "TrainResult",
    "make_env",
    "train",
    "evaluate",
    "save_checkpoint",
    "load_checkpoint",
]

CHECKPOINT_FORMAT = 1


def make_env(cfg: SimConfig, seed: int, spec: PolicySpec,
             record_trace: bool = False) -> MecVehicularEnv:
    """Environment with the variant's hooks installed."""
    offload_hook = None
    allocator_hook = None
    uav_start = None
    if spec.variant == "nearest_offload":
        offload_hook = lambda world, rates: nao_decide(world, cfg)
    if spec.variant == "equal_alloc":
        allocator_hook = ecra_allocate
    if spec.variant == "circular_uav":
        uav_start = cutc_start_xy(cfg, spec.circle_radius_m)
    return MecVehicularEnv(cfg, seed, offload_hook=offload_hook,
                           allocator_hook=allocator_hook,
                           uav_start_xy=uav_start,
                           record_trace=record_trace)


class _VariantActionFilter:
    """Overwrites raw action entries for the frozen-decision variants.

    Draws its episode-frozen phases from a dedicated stream so the policy's
    own noise sequence stays identical across variants (paired seeds).
    """

    def __init__(self, cfg: SimConfig, spec: PolicySpec, seed: int):
        self.cfg = cfg
        self.spec = spec
        self.rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(97,)))
        self._frozen_phase_raw: Optional[np.ndarray] = None
        self._slot = 0

    def reset(self) -> None:
        self._slot = 0
        if self.spec.variant == "fixed_phase":
            phases = fipsc_phases(self.cfg, self.rng, self.spec.zero_phases)
            # invert the decoder: raw = theta/pi - 1 maps onto [0, 2pi)
            self._frozen_phase_raw = (phases.ravel() / np.pi) - 1.0

    def __call__(self, action: np.ndarray) -> np.ndarray:
        spec, cfg = self.spec, self.cfg
        if spec.variant == "fixed_phase":
            action = action.copy()
            action[2:] = self._frozen_phase_raw
        elif spec.variant == "circular_uav":
            cmd = cutc_command(self._slot, cfg, spec.circle_radius_m)
            action = action.copy()
            action[0] = 2.0 * cmd.speed_mps / cfg.uav_speed_max_mps - 1.0
            action[1] = cmd.heading_rad / np.pi
        self._slot += 1
        return action


@dataclass
class TrainResult:
    agent: Td3Agent
    metrics: List[EpisodeMetrics]


def train(cfg: SimConfig, seed: int, episodes: int,
          spec: PolicySpec | None = None,
          on_episode: Optional[Callable[[int, EpisodeMetrics], None]] = None
          ) -> TrainResult:
    """Run the full learning loop and return the agent plus episode metrics."""
    if episodes < 1:
        raise ValueError("need at least one episode")
    spec = spec or PolicySpec()
    streams = RngStream(seed)
    learn_rng = streams.learning
    env = make_env(cfg, seed, spec)
    obs_dim, act_dim = observation_dim(cfg), action_dim(cfg)
    agent = Td3Agent(cfg, obs_dim, act_dim, learn_rng,
                     settings=learner_variant(spec, cfg))
    buffer = ReplayBuffer(cfg.replay_capacity, obs_dim, act_dim)
    action_filter = _VariantActionFilter(cfg, spec, seed)

    metrics: List[EpisodeMetrics] = []
    delay_counter = 0
    for episode in range(episodes):
        obs = env.reset()
        action_filter.reset()
        slot_costs, rewards = [], []
        done = False
        while not done:
            action = agent.select_action(obs, learn_rng, explore=True)
            action = action_filter(action)
            outcome = env.step(action)
            buffer.add(obs, action, outcome.reward, outcome.observation,
                       outcome.done)
            obs = outcome.observation
            done = outcome.done
            slot_costs.append(outcome.costs)
            rewards.append(outcome.reward)

            if len(buffer) >= cfg.batch_size:
                batch = buffer.sample(cfg.batch_size, learn_rng)
                agent.critic_update(batch, learn_rng)
                delay_counter += 1
                if delay_counter > agent.settings.policy_delay:
                    agent.actor_update(batch.states, learn_rng)
                    agent.soft_update_targets()
                    delay_counter = 0

        episode_metrics = accumulate_totals(slot_costs, rewards)
        metrics.append(episode_metrics)
        if on_episode is not None:
            on_episode(episode, episode_metrics)
    return TrainResult(agent=agent, metrics=metrics)


def evaluate(cfg: SimConfig, agent: Optional[Td3Agent], spec: PolicySpec,
             episodes: int, seeds: List[int]) -> List[dict]:
    """Frozen-policy rollouts; one row per (seed, episode).

    ``agent`` may be None for a fresh untrained policy.  Identical seed
    lists give paired worlds across variants because the environment and
    policy randomness both derive from the seed.
    """
    rows: List[dict] = []
    for seed in seeds:
        streams = RngStream(seed)
        policy_rng = streams.learning
        env = make_env(cfg, seed, spec)
        local_agent = agent
        if local_agent is None:
            local_agent = Td3Agent(cfg, observation_dim(cfg), action_dim(cfg),
                                   policy_rng,
                                   settings=learner_variant(spec, cfg))
        action_filter = _VariantActionFilter(cfg, spec, seed)
        for episode in range(episodes):
            obs = env.reset()
            action_filter.reset()
            slot_costs, rewards = [], []
            done = False
            while not done:
                action = local_agent.select_action(obs, policy_rng)
                action = action_filter(action)
                outcome = env.step(action)
                obs = outcome.observation
                done = outcome.done
                slot_costs.append(outcome.costs)
                rewards.append(outcome.reward)
            m = accumulate_totals(slot_costs, rewards)
            rows.append(metrics_row(m, cfg, variant=spec.variant, seed=seed,
                                    episode=episode))
    return rows


def metrics_row(m: EpisodeMetrics, cfg: SimConfig, **extra) -> dict:
    """Per-episode averages: delay per task, energy and costs per slot."""
    tasks = cfg.num_vehicles * cfg.num_slots
    row = dict(extra)
    row.update({
        "reward": m.total_reward,
        "avg_delay_s": m.total_delay_s / tasks,
        "avg_energy_j": m.total_energy_j / cfg.num_slots,
        "server_cost": m.total_server_cost / cfg.num_slots,
        "vehicle_cost": m.total_vehicle_cost / tasks,
    })
    return row


# -- checkpointing -------------------------------------------------------


def _pack_params(prefix: str, params: List[np.ndarray], out: dict) -> None:
    for idx, arr in enumerate(params):
        out[f"{prefix}/{idx}"] = arr


def _unpack_params(prefix: str, data, count: int) -> List[np.ndarray]:
    return [data[f"{prefix}/{idx}"] for idx in range(count)]


def checkpoint_path(path: str) -> str:
    return path if path.endswith(".npz") else path + ".npz"


def save_checkpoint(path: str, agent: Td3Agent, cfg: SimConfig,
                    variant: str = "full") -> None:
    """Dump every network, the schedule, and the config hash; exact round-trip."""
    payload: dict = {
        "format_version": np.array(CHECKPOINT_FORMAT),
        "config_hash": np.array(config_hash(cfg)),
        "variant": np.array(variant),
        "actor_kind": np.array(agent.settings.actor_kind),
        "twin_min": np.array(agent.settings.twin_min),
        "policy_delay": np.array(agent.settings.policy_delay),
        "schedule_betas": agent.schedule.betas,
    }
    _pack_params("actor", agent.actor.params, payload)
    _pack_params("actor_target", agent.actor_target.params, payload)
    _pack_params("critic1", agent.critic1.params, payload)
    _pack_params("critic2", agent.critic2.params, payload)
    _pack_params("critic1_target", agent.critic1_target.params, payload)
    _pack_params("critic2_target", agent.critic2_target.params, payload)
    np.savez(checkpoint_path(path), **payload)


def load_checkpoint(path: str, cfg: SimConfig) -> tuple[Td3Agent, str]:
    """Rebuild the agent; raises on config-hash or format mismatch."""
    from .agent import AgentSettings

    with np.load(checkpoint_path(path), allow_pickle=False) as data:
        version = int(data["format_version"])
        if version != CHECKPOINT_FORMAT:
            raise ValueError(f"unsupported checkpoint format {version}")
        stored_hash = str(data["config_hash"])
        if stored_hash != config_hash(cfg):
            raise ValueError("checkpoint/config hash mismatch")
        settings = AgentSettings(actor_kind=str(data["actor_kind"]),
                                 twin_min=bool(data["twin_min"]),
                                 policy_delay=int(data["policy_delay"]))
        agent = Td3Agent(cfg, observation_dim(cfg), action_dim(cfg),
                         np.random.default_rng(0), settings=settings)
        n_actor = len(agent.actor.params)
        n_critic = len(agent.critic1.params)
        agent.actor.net.set_params(_unpack_params("actor", data, n_actor))
        agent.actor_target.net.set_params(
            _unpack_params("actor_target", data, n_actor))
        agent.critic1.set_params(_unpack_params("critic1", data, n_critic))
        agent.critic2.set_params(_unpack_params("critic2", data, n_critic))
        agent.critic1_target.set_params(
            _unpack_params("critic1_target", data, n_critic))
        agent.critic2_target.set_params(
            _unpack_params("critic2_target", data, n_critic))
        variant = str(data["variant"])
    # optimizers must track the freshly loaded arrays
    from .nets import Adam
    agent.actor_opt = Adam(agent.actor.params, cfg.actor_lr)
    agent.critic1_opt = Adam(agent.critic1.params, cfg.critic_lr)
    agent.critic2_opt = Adam(agent.critic2.params, cfg.critic_lr)
    return agent, variant
