"""Twin-critic learner with delayed policy updates and a generative actor.

The default actor is the denoising chain of :mod:`.diffusion`; the plain
variants swap in a direct tanh-output actor ("td3") and additionally drop
the twin minimum and the update delay ("ddpg").  Critic targets smooth the
target action with clipped Gaussian noise.  All gradients come from the
hand-written backward passes in :mod:`.nets`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional

import numpy as np

from ..config import SimConfig
from .diffusion import ChainNoise, DiffusionPolicy, build_schedule
from .nets import Adam, Mlp, soft_update

__all__ = [
    "TransitionBatch",
    "ReplayBuffer",
    "td_target",
    "DeterministicPolicy",
    "Td3Agent",
]


class TransitionBatch(NamedTuple):
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray


class ReplayBuffer:
    """Fixed-capacity ring with uniform no-replacement batch sampling."""

    def __init__(self, capacity: int, state_dim: int, action_dim: int):
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self.dones = np.zeros(capacity)
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def add(self, state, action, reward, next_state, done) -> None:
        idx = self._next
        self.states[idx] = state
        self.actions[idx] = action
        self.rewards[idx] = reward
        self.next_states[idx] = next_state
        self.dones[idx] = float(done)
        self._next = (idx + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int,
               rng: np.random.Generator) -> TransitionBatch:
        if batch_size > self._size:
            raise ValueError("not enough stored transitions")
        idx = rng.choice(self._size, size=batch_size, replace=False)
        return TransitionBatch(self.states[idx], self.actions[idx],
                               self.rewards[idx], self.next_states[idx],
                               self.dones[idx])


def td_target(rewards: np.ndarray, dones: np.ndarray, q1_next: np.ndarray,
              q2_next: np.ndarray, discount: float,
              twin_min: bool) -> np.ndarray:
    """Bootstrap target; the twin variant takes the elementwise minimum."""
    q_next = np.minimum(q1_next, q2_next) if twin_min else q1_next
    return rewards + (1.0 - dones) * discount * q_next


class DeterministicPolicy:
    """Direct saturating-output actor used by the plain learner variants."""

    def __init__(self, state_dim: int, action_dim: int, width: int,
                 rng: np.random.Generator):
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.net = Mlp([state_dim, width, width, action_dim],
                       out_activation="tanh", rng=rng)

    @property
    def params(self) -> List[np.ndarray]:
        return self.net.params

    def copy(self) -> "DeterministicPolicy":
        dup = DeterministicPolicy.__new__(DeterministicPolicy)
        dup.state_dim = self.state_dim
        dup.action_dim = self.action_dim
        dup.net = self.net.copy()
        return dup

    def generate(self, states: np.ndarray,
                 rng: Optional[np.random.Generator] = None,
                 noise=None, with_cache: bool = False):
        states = np.atleast_2d(np.asarray(states, dtype=float))
        if with_cache:
            return self.net.forward_cached(states)
        return self.net.forward(states)

    def backprop(self, cache, d_actions: np.ndarray) -> List[np.ndarray]:
        _, grads = self.net.backward(cache, d_actions)
        return grads


# maps a state/action batch to Q values and dQ/da; injectable for tests
QGradFn = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass
class AgentSettings:
    actor_kind: str = "diffusion"   # "diffusion" | "deterministic"
    twin_min: bool = True
    policy_delay: int = 2


class Td3Agent:
    """Actor, twin critics, their targets, and the update rules."""

    def __init__(self, cfg: SimConfig, obs_dim: int, act_dim: int,
                 rng: np.random.Generator,
                 settings: AgentSettings | None = None):
        self.cfg = cfg
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.settings = settings or AgentSettings()
        self.schedule = build_schedule(cfg.diffusion_steps, cfg.beta_min,
                                       cfg.beta_max)
        width = cfg.hidden_width
        if self.settings.actor_kind == "diffusion":
            self.actor = DiffusionPolicy(obs_dim, act_dim, width,
                                         self.schedule, cfg.time_embed_dim,
                                         rng)
        else:
            self.actor = DeterministicPolicy(obs_dim, act_dim, width, rng)
        self.critic1 = Mlp([obs_dim + act_dim, width, width, 1],
                           out_activation="linear", rng=rng)
        self.critic2 = Mlp([obs_dim + act_dim, width, width, 1],
                           out_activation="linear", rng=rng)
        self.actor_target = self.actor.copy()
        self.critic1_target = self.critic1.copy()
        self.critic2_target = self.critic2.copy()
        self.actor_opt = Adam(self.actor.params, cfg.actor_lr)
        self.critic1_opt = Adam(self.critic1.params, cfg.critic_lr)
        self.critic2_opt = Adam(self.critic2.params, cfg.critic_lr)

    # -- acting -----------------------------------------------------------

    def select_action(self, obs: np.ndarray, rng: np.random.Generator,
                      explore: bool = False) -> np.ndarray:
        action = self.actor.generate(obs[None, :], rng=rng)[0]
        if explore and self.settings.actor_kind == "deterministic":
            action = action + rng.normal(
                0.0, self.cfg.exploration_noise_std, size=action.shape)
        return np.clip(action, -1.0, 1.0)

    # -- updates ----------------------------------------------------------

    def _target_actions(self, next_states: np.ndarray,
                        rng: np.random.Generator) -> np.ndarray:
        actions = self.actor_target.generate(next_states, rng=rng)
        smooth = np.clip(
            rng.normal(0.0, self.cfg.smoothing_noise_std,
                       size=actions.shape),
            -self.cfg.smoothing_noise_clip, self.cfg.smoothing_noise_clip)
        return np.clip(actions + smooth, -1.0, 1.0)

    def critic_update(self, batch: TransitionBatch,
                      rng: np.random.Generator) -> float:
        next_actions = self._target_actions(batch.next_states, rng)
        target_in = np.concatenate([batch.next_states, next_actions], axis=1)
        q1_next = self.critic1_target.forward(target_in)[:, 0]
        q2_next = self.critic2_target.forward(target_in)[:, 0]
        y = td_target(batch.rewards, batch.dones, q1_next, q2_next,
                      self.cfg.discount, self.settings.twin_min)
        batch_in = np.concatenate([batch.states, batch.actions], axis=1)
        n = batch_in.shape[0]
        loss = 0.0
        for critic, opt in ((self.critic1, self.critic1_opt),
                            (self.critic2, self.critic2_opt)):
            pred, cache = critic.forward_cached(batch_in)
            err = pred[:, 0] - y
            loss += float(np.mean(err ** 2))
            _, grads = critic.backward(cache, (2.0 * err / n)[:, None])
            opt.step(grads)
        return loss

    def _q1_value_and_grad(self, states: np.ndarray,
                           actions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        joint = np.concatenate([states, actions], axis=1)
        q, cache = self.critic1.forward_cached(joint)
        d_in, _ = self.critic1.backward(cache, np.ones_like(q))
        return q[:, 0], d_in[:, self.obs_dim:]

    def actor_update(self, states: np.ndarray, rng: np.random.Generator,
                     q_grad_fn: Optional[QGradFn] = None) -> float:
        """Ascend the first critic through the actor's generation graph."""
        result = self.actor.generate(states, rng=rng, with_cache=True)
        actions, cache = result
        q_fn = q_grad_fn or self._q1_value_and_grad
        q_values, dq_da = q_fn(states, actions)
        n = states.shape[0]
        # loss is -mean(Q); gradients flow back through the generator
        grads = self.actor.backprop(cache, -dq_da / n)
        self.actor_opt.step(grads)
        return float(-np.mean(q_values))

    def soft_update_targets(self) -> None:
        tau = self.cfg.soft_update_rate
        soft_update(self.actor.params, self.actor_target.params, tau)
        soft_update(self.critic1.params, self.critic1_target.params, tau)
        soft_update(self.critic2.params, self.critic2_target.params, tau)
