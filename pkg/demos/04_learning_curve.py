"""Train the generative-actor learner for a short desk run and print the
reward trend, then compare against the frozen-phase and circular-flight
baselines on paired seeds.

Takes a couple of minutes.  Run:  python3 demos/04_learning_curve.py
"""

from dataclasses import replace

import numpy as np

from irsmec import SimConfig
from irsmec.baselines import PolicySpec
from irsmec.learn.train import evaluate, train

cfg = replace(SimConfig(), num_vehicles=5, elements_per_irs=16,
              hidden_width=96, batch_size=48, replay_capacity=10_000,
              num_slots=60)

result = train(cfg, seed=1, episodes=60,
               on_episode=lambda ep, m: print(
                   f"episode {ep:3d}  reward {m.total_reward:9.2f}")
               if ep % 10 == 0 else None)

rewards = [m.total_reward for m in result.metrics]
print(f"\nfirst-10 mean reward : {np.mean(rewards[:10]):9.2f}")
print(f"last-10 mean reward  : {np.mean(rewards[-10:]):9.2f}")

seeds = [301, 302, 303]
for variant in ("full", "fixed_phase", "circular_uav"):
    rows = evaluate(cfg, result.agent, PolicySpec(variant=variant),
                    episodes=2, seeds=seeds)
    cost = np.mean([-row["reward"] for row in rows])
    print(f"{variant:13s} mean combined cost {cost:9.2f}")
