"""Noising schedule and the denoising action generator.

The forward chain injects Gaussian noise with variance ``beta_t`` following
an exponential schedule; its closed form reaches any step in one draw.  The
policy runs the learned reverse chain from pure noise down to an action,
adding posterior noise at every step except the one producing the final
output.

Each reverse step forms its mean from the clean-sample reconstruction
(x_t - sqrt(1-abar_t) eps_hat) / sqrt(abar_t), clamped to the action box,
and each step's output is clamped as well.  Both clamps are load-bearing:
a pure noise-prediction mean amplifies an untrained chain's start noise far
beyond the box and value ascent then ratchets the denoiser output scale up
until every sample saturates, where the clamp gradient is zero everywhere
and learning halts permanently.  Bounding the reconstruction keeps every
step mean near the box so the posterior noise keeps reviving gradients.
``generate`` can retain caches so the whole chain is differentiable wrt
the denoiser parameters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from .nets import Mlp, time_embedding

__all__ = [
    "DiffusionSchedule",
    "build_schedule",
    "forward_sample",
    "ChainNoise",
    "DiffusionPolicy",
]


@dataclass(frozen=True)
class DiffusionSchedule:
    """Arrays indexed 1..n_steps (index 0 unused except alpha_bar[0] = 1)."""

    n_steps: int
    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray
    posterior_vars: np.ndarray


def build_schedule(n_steps: int, beta_min: float,
                   beta_max: float) -> DiffusionSchedule:
    """Exponential variance schedule.

    beta_t = 1 - exp(-beta_min/T - (2t-1)(beta_max-beta_min)/(2 T^2)),
    alpha_t = 1 - beta_t, alpha_bar_t the running product, and the
    posterior variance (1-alpha_bar_{t-1})/(1-alpha_bar_t) * beta_t, which
    is zero at t=1 (no noise on the final denoising step).
    """
    if n_steps < 1:
        raise ValueError("need at least one diffusion step")
    if not (0.0 < beta_min < beta_max):
        raise ValueError("require 0 < beta_min < beta_max")
    t = np.arange(1, n_steps + 1, dtype=float)
    exponent = beta_min / n_steps \
        + (2.0 * t - 1.0) * (beta_max - beta_min) / (2.0 * n_steps ** 2)
    betas = np.concatenate([[np.nan], 1.0 - np.exp(-exponent)])
    alphas = np.concatenate([[np.nan], 1.0 - betas[1:]])
    alpha_bars = np.concatenate([[1.0], np.cumprod(alphas[1:])])
    posterior = np.full(n_steps + 1, np.nan)
    for step in range(1, n_steps + 1):
        posterior[step] = (1.0 - alpha_bars[step - 1]) \
            / (1.0 - alpha_bars[step]) * betas[step]
    return DiffusionSchedule(n_steps=n_steps, betas=betas, alphas=alphas,
                             alpha_bars=alpha_bars, posterior_vars=posterior)


def forward_sample(x0: np.ndarray, step: int, schedule: DiffusionSchedule,
                   rng: np.random.Generator) -> np.ndarray:
    """One-shot noising to step t: sqrt(abar_t) x0 + sqrt(1-abar_t) eps."""
    if not 1 <= step <= schedule.n_steps:
        raise ValueError(f"step {step} outside 1..{schedule.n_steps}")
    abar = schedule.alpha_bars[step]
    eps = rng.standard_normal(np.shape(x0))
    return np.sqrt(abar) * np.asarray(x0, dtype=float) \
        + np.sqrt(1.0 - abar) * eps


class ChainNoise(NamedTuple):
    """Pre-drawn chain randomness, for deterministic replays in tests."""

    x_init: np.ndarray            # (B, A)
    step_noise: List[np.ndarray]  # entries for t = n..2, each (B, A)


class DiffusionPolicy:
    """Action generator: reverse denoising conditioned on the state."""

    def __init__(self, state_dim: int, action_dim: int, width: int,
                 schedule: DiffusionSchedule, time_dim: int,
                 rng: np.random.Generator):
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.time_dim = time_dim
        self.schedule = schedule
        self.net = Mlp([action_dim + time_dim + state_dim, width, width,
                        action_dim], out_activation="linear", rng=rng)
        self._embeds = {
            t: time_embedding(t, time_dim)
            for t in range(1, schedule.n_steps + 1)
        }

    @property
    def params(self) -> List[np.ndarray]:
        return self.net.params

    def copy(self) -> "DiffusionPolicy":
        dup = DiffusionPolicy.__new__(DiffusionPolicy)
        dup.state_dim = self.state_dim
        dup.action_dim = self.action_dim
        dup.time_dim = self.time_dim
        dup.schedule = self.schedule
        dup.net = self.net.copy()
        dup._embeds = self._embeds
        return dup

    def draw_noise(self, batch: int, rng: np.random.Generator) -> ChainNoise:
        x_init = rng.standard_normal((batch, self.action_dim))
        step_noise = [rng.standard_normal((batch, self.action_dim))
                      for _ in range(self.schedule.n_steps - 1)]
        return ChainNoise(x_init=x_init, step_noise=step_noise)

    def generate(self, states: np.ndarray,
                 rng: Optional[np.random.Generator] = None,
                 noise: Optional[ChainNoise] = None,
                 with_cache: bool = False):
        """Run the reverse chain for a batch of states.

        Returns the actions (each denoising step clamps to [-1, 1]), or
        ``(actions, chain_cache)`` when ``with_cache`` so :meth:`backprop`
        can differentiate the chain.
        """
        states = np.atleast_2d(np.asarray(states, dtype=float))
        batch = states.shape[0]
        if noise is None:
            if rng is None:
                raise ValueError("need an rng or pre-drawn noise")
            noise = self.draw_noise(batch, rng)
        sched = self.schedule
        x = noise.x_init.copy()
        chain_cache = [] if with_cache else None
        for idx, t in enumerate(range(sched.n_steps, 0, -1)):
            emb = np.tile(self._embeds[t], (batch, 1))
            inp = np.concatenate([x, emb, states], axis=1)
            if with_cache:
                eps, net_cache = self.net.forward_cached(inp)
            else:
                eps = self.net.forward(inp)
            # clean-sample reconstruction, clamped to the action box
            recon_raw = (x - np.sqrt(1.0 - sched.alpha_bars[t]) * eps) \
                / np.sqrt(sched.alpha_bars[t])
            recon = np.clip(recon_raw, -1.0, 1.0)
            a_coef = np.sqrt(sched.alphas[t]) \
                * (1.0 - sched.alpha_bars[t - 1]) \
                / (1.0 - sched.alpha_bars[t])
            b_coef = np.sqrt(sched.alpha_bars[t - 1]) * sched.betas[t] \
                / (1.0 - sched.alpha_bars[t])
            mean = a_coef * x + b_coef * recon
            if t > 1:
                pre_clip = mean + np.sqrt(sched.posterior_vars[t]) \
                    * noise.step_noise[idx]
            else:
                pre_clip = mean
            if with_cache:
                chain_cache.append((t, net_cache, recon_raw, pre_clip))
            x = np.clip(pre_clip, -1.0, 1.0)
        if with_cache:
            return x, chain_cache
        return x

    def backprop(self, cache, d_actions: np.ndarray) -> List[np.ndarray]:
        """Accumulate parameter gradients through the full reverse chain.

        ``cache`` comes from ``generate(..., with_cache=True)``; the
        reconstruction and output clamps contribute zero gradient where
        they saturate.
        """
        sched = self.schedule
        dx = np.asarray(d_actions, dtype=float)
        totals = [np.zeros_like(p) for p in self.net.params]
        for t, net_cache, recon_raw, pre_clip in reversed(cache):
            d_pre = dx * (np.abs(pre_clip) < 1.0)
            a_coef = np.sqrt(sched.alphas[t]) \
                * (1.0 - sched.alpha_bars[t - 1]) \
                / (1.0 - sched.alpha_bars[t])
            b_coef = np.sqrt(sched.alpha_bars[t - 1]) * sched.betas[t] \
                / (1.0 - sched.alpha_bars[t])
            d_recon_raw = d_pre * b_coef * (np.abs(recon_raw) < 1.0)
            inv_sqrt_abar = 1.0 / np.sqrt(sched.alpha_bars[t])
            d_eps = -d_recon_raw * np.sqrt(1.0 - sched.alpha_bars[t]) \
                * inv_sqrt_abar
            d_inp, grads = self.net.backward(net_cache, d_eps)
            for total, g in zip(totals, grads):
                total += g
            dx = d_pre * a_coef + d_recon_raw * inv_sqrt_abar \
                + d_inp[:, :self.action_dim]
        return totals
