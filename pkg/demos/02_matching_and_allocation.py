"""Show the two analytic decision layers on a hand-sized example: the
request-and-admission matching, then the square-root CPU split, compared
against an even split.

Run:  python3 demos/02_matching_and_allocation.py
"""

from dataclasses import replace

import numpy as np

from irsmec import SimConfig, Task
from irsmec.allocation import (compute_delay_objective, convex_oracle_allocate,
                               kkt_allocate)
from irsmec.baselines import ecra_allocate
from irsmec.costmodel import LOCAL, SERVERS, TARGET_OF_SERVER
from irsmec.matching import run_matching

cfg = replace(SimConfig(), num_vehicles=4, uav_cores=1, bs_cores=2)
tasks = [
    Task(size_bits=1e6, intensity_cpb=900, deadline_s=3.0),
    Task(size_bits=4e6, intensity_cpb=600, deadline_s=2.0),
    Task(size_bits=2e6, intensity_cpb=800, deadline_s=4.0),
    Task(size_bits=5e6, intensity_cpb=950, deadline_s=5.0),
]
rates = {"uav": np.array([9e7, 6e7, 8e7, 7e7]),
         "bs": np.array([3e7, 5e7, 0.0, 4e7])}  # vehicle 2 cannot reach bs

decision, state = run_matching(tasks, rates, cfg)
names = {0: "local", 1: "uav", 2: "bs"}
print("matching outcome after", state.rounds, "rounds /",
      state.proposals, "proposals:")
for i, target in enumerate(decision):
    print(f"  task {i} (D={tasks[i].size_bits / 1e6:.0f} Mb) -> "
          f"{names[int(target)]}")

for server in SERVERS:
    held = [i for i in range(len(tasks))
            if decision[i] == TARGET_OF_SERVER[server]]
    if not held:
        continue
    w = np.array([tasks[i].workload_cycles for i in held])
    cap = cfg.server_cpu_hz(server)
    best = kkt_allocate(w, cap)
    even = ecra_allocate(w, cap)
    oracle = convex_oracle_allocate(w, cap)
    print(f"\n{server}: workloads {np.round(w / 1e9, 2)} Gcycles, "
          f"budget {cap / 1e9:.0f} GHz")
    print(f"  square-root split  {np.round(best.f_hz / 1e9, 2)} GHz "
          f"-> sum compute delay {compute_delay_objective(w, best.f_hz):.4f} s")
    print(f"  even split         {np.round(even.f_hz / 1e9, 2)} GHz "
          f"-> sum compute delay {compute_delay_objective(w, even.f_hz):.4f} s")
    print(f"  descent oracle agrees to "
          f"{np.max(np.abs(best.f_hz - oracle.f_hz) / oracle.f_hz):.2e} rel")
