"""Step a whole episode with a scripted flight plan and inspect the
per-slot records the environment produces.

Run:  python3 demos/03_episode_rollout.py
"""

from dataclasses import replace

import numpy as np

from irsmec import SimConfig, accumulate_totals
from irsmec.env import MecVehicularEnv, action_dim, write_trace

cfg = replace(SimConfig(), num_vehicles=5, elements_per_irs=16, num_slots=40)
env = MecVehicularEnv(cfg, seed=7, record_trace=True)
env.reset()

rng = np.random.default_rng(7)
slot_costs, rewards = [], []
done = False
while not done:
    action = rng.uniform(-1, 1, size=action_dim(cfg))
    action[0] = -0.2  # cruise at 10 m/s
    out = env.step(action)
    slot_costs.append(out.costs)
    rewards.append(out.reward)
    done = out.done

totals = accumulate_totals(slot_costs, rewards)
print(f"episode totals over {cfg.num_slots} slots")
print(f"  completion delay : {totals.total_delay_s:10.2f} s")
print(f"  energy           : {totals.total_energy_j:10.2f} J")
print(f"  vehicle cost     : {totals.total_vehicle_cost:10.2f}")
print(f"  server cost      : {totals.total_server_cost:10.2f}")
print(f"  reward           : {totals.total_reward:10.2f}")

offloaded = sum(int(np.sum(c.decision != 0)) for c in slot_costs)
print(f"  offloaded tasks  : {offloaded} / {cfg.num_vehicles * cfg.num_slots}")

write_trace(env.trace, "episode_trace.jsonl")
print("per-slot records written to episode_trace.jsonl")
