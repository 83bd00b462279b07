"""Vehicle-side task placement via many-to-one deferred acceptance.

Each slot, every task ranks the reachable servers by transmission delay and
transmission energy, each server ranks tasks by compute energy (smaller
workloads preferred), and an iterative request-and-admission loop runs until
no rejected task has a server left to ask.  Servers hold at most their core
count; tasks rejected everywhere fall back to local execution.

Ties are broken deterministically: tasks prefer the aerial server over the
ground one at equal score, and servers prefer lower vehicle indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Set

import numpy as np

from .config import SimConfig, Task
from .costmodel import LOCAL, SERVERS, TARGET_OF_SERVER

__all__ = [
    "MatchingState",
    "vehicle_preference_value",
    "server_preference_value",
    "run_matching",
]


def vehicle_preference_value(task: Task, rate_bps: float, weight: float,
                             tx_power_w: float) -> float:
    """Score of a server from the task's viewpoint; higher is better.

    Only the transmission delay and transmission energy enter:
    -(w D/R + (1-w) p D/R).  Undefined for nonpositive rates; the caller
    must exclude unreachable servers instead.
    """
    if rate_bps <= 0:
        raise ValueError("preference undefined for nonpositive rate")
    tx_delay = task.size_bits / rate_bps
    return -(weight * tx_delay + (1.0 - weight) * tx_power_w * tx_delay)


def server_preference_value(task: Task, varpi: float) -> float:
    """Score of a task from the server's viewpoint: -varpi D G."""
    return -varpi * task.workload_cycles


@dataclass
class MatchingState:
    """Participants, preference lists, and the tentative matching.

    ``task_prefs`` shrink as servers reject tasks; ``match_of_task`` maps a
    vehicle index to a server id or None; ``tasks_of_server`` is kept
    mutually consistent with it.  ``proposals`` and ``rounds`` record the
    work done until the fixed point.
    """

    task_ids: List[int]
    servers: Sequence[str]
    task_prefs: Dict[int, List[str]]
    server_prefs: Dict[str, List[int]]
    match_of_task: Dict[int, str | None] = field(default_factory=dict)
    tasks_of_server: Dict[str, List[int]] = field(default_factory=dict)
    rejected: Set[int] = field(default_factory=set)
    proposals: int = 0
    rounds: int = 0


def _build_preferences(tasks: Sequence[Task], rates: Dict[str, np.ndarray],
                       cfg: SimConfig) -> MatchingState:
    task_ids = list(range(len(tasks)))
    task_prefs: Dict[int, List[str]] = {}
    for i in task_ids:
        scored = []
        for order, server in enumerate(SERVERS):
            r = float(rates[server][i])
            if r <= 0:  # unreachable server is omitted, not ranked last
                continue
            score = vehicle_preference_value(tasks[i], r, cfg.weight_vehicle,
                                             cfg.tx_power_w)
            scored.append((-score, order, server))
        scored.sort()
        task_prefs[i] = [server for _, _, server in scored]

    server_prefs: Dict[str, List[int]] = {}
    for server in SERVERS:
        varpi = cfg.server_varpi(server)
        scored = [(-server_preference_value(tasks[i], varpi), i)
                  for i in task_ids]
        scored.sort()
        server_prefs[server] = [i for _, i in scored]

    return MatchingState(
        task_ids=task_ids,
        servers=SERVERS,
        task_prefs=task_prefs,
        server_prefs=server_prefs,
        match_of_task={i: None for i in task_ids},
        tasks_of_server={server: [] for server in SERVERS},
        rejected=set(task_ids),
    )


def run_matching(tasks: Sequence[Task], rates: Dict[str, np.ndarray],
                 cfg: SimConfig) -> tuple[np.ndarray, MatchingState]:
    """Run the request-and-admission loop to its fixed point.

    Returns the per-vehicle target vector (local for tasks left unmatched)
    and the final matching state.  Terminates because each task asks each
    server at most once.
    """
    state = _build_preferences(tasks, rates, cfg)
    rank = {server: {i: pos for pos, i in enumerate(state.server_prefs[server])}
            for server in SERVERS}

    def pending() -> List[int]:
        return [i for i in sorted(state.rejected)
                if state.match_of_task[i] is None and state.task_prefs[i]]

    while True:
        movers = pending()
        if not movers:
            break
        state.rounds += 1
        touched = set()
        for i in movers:
            best = state.task_prefs[i][0]
            state.match_of_task[i] = best
            state.tasks_of_server[best].append(i)
            state.proposals += 1
            touched.add(best)
        for server in SERVERS:
            if server not in touched:
                continue
            held = state.tasks_of_server[server]
            quota = cfg.server_cores(server)
            if len(held) <= quota:
                continue
            held.sort(key=lambda i: rank[server][i])
            kept, dropped = held[:quota], held[quota:]
            state.tasks_of_server[server] = kept
            for i in dropped:
                state.rejected.add(i)
                state.task_prefs[i].remove(server)
                state.match_of_task[i] = None

    decision = np.full(len(tasks), LOCAL, dtype=np.int64)
    for i, server in state.match_of_task.items():
        if server is not None:
            decision[i] = TARGET_OF_SERVER[server]
    return decision, state
