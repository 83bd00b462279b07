"""Server CPU splitting across offloaded tasks.

The closed form follows from the first-order optimality system of
minimizing total compute delay ``sum w_i / f_i`` under a capacity budget:
cycles are split proportionally to the square root of each task's workload,
with the budget met exactly whenever any task is present.  A projected
gradient descent solver over the scaled simplex serves as an independent
check of the closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AllocationResult",
    "kkt_allocate",
    "convex_oracle_allocate",
    "compute_delay_objective",
]


@dataclass(frozen=True)
class AllocationResult:
    """Cycles per task plus the multiplier of the active budget constraint."""

    f_hz: np.ndarray
    multiplier: float


def kkt_allocate(workloads_cycles: np.ndarray,
                 capacity_hz: float) -> AllocationResult:
    """Closed-form optimal split: f_i = sqrt(w_i) F / sum_j sqrt(w_j).

    Zero-workload entries get zero cycles and are excluded from the
    denominator.  An empty (or all-zero) task set yields an empty budget use
    and multiplier 0.
    """
    if capacity_hz <= 0:
        raise ValueError("capacity must be strictly positive")
    w = np.asarray(workloads_cycles, dtype=float)
    if np.any(w < 0):
        raise ValueError("workloads must be nonnegative")
    f = np.zeros_like(w)
    active = w > 0
    if not np.any(active):
        return AllocationResult(f_hz=f, multiplier=0.0)
    roots = np.sqrt(w[active])
    f[active] = roots * capacity_hz / np.sum(roots)
    multiplier = (np.sum(roots) / capacity_hz) ** 2
    return AllocationResult(f_hz=f, multiplier=float(multiplier))


def compute_delay_objective(workloads_cycles: np.ndarray,
                            f_hz: np.ndarray) -> float:
    """Total compute delay sum w_i / f_i over tasks with positive workload."""
    w = np.asarray(workloads_cycles, dtype=float)
    f = np.asarray(f_hz, dtype=float)
    active = w > 0
    if np.any(f[active] <= 0):
        return float("inf")
    return float(np.sum(w[active] / f[active]))


def convex_oracle_allocate(workloads_cycles: np.ndarray, capacity_hz: float,
                           grad_tol: float = 1e-9,
                           max_iter: int = 200_000) -> AllocationResult:
    """Projected gradient descent on the capacity-scaled simplex.

    Minimizes ``sum w_i / f_i`` s.t. ``sum f_i = capacity`` by descending
    along the gradient projected onto the sum-zero tangent, with adaptive
    backtracking to keep every share positive.  Converges when the
    projected-gradient norm drops below ``grad_tol`` relative to the
    gradient scale.  Raises if the iteration budget is exhausted.
    """
    if capacity_hz <= 0:
        raise ValueError("capacity must be strictly positive")
    w = np.asarray(workloads_cycles, dtype=float)
    f = np.zeros_like(w)
    active = w > 0
    wa = w[active]
    n = wa.size
    if n == 0:
        return AllocationResult(f_hz=f, multiplier=0.0)
    if n == 1:
        f[active] = capacity_hz
        return AllocationResult(f_hz=f,
                                multiplier=float(wa[0] / capacity_hz ** 2))

    # work in budget fractions g on the unit simplex
    c = wa / capacity_hz
    g = np.full(n, 1.0 / n)

    def objective(frac: np.ndarray) -> float:
        return float(np.sum(c / frac))

    step = float(np.min(g ** 3 / (2.0 * c)))  # inverse local curvature
    value = objective(g)
    for _ in range(max_iter):
        grad = -c / g ** 2
        pg = grad - grad.mean()
        pg_norm = float(np.linalg.norm(pg))
        if pg_norm <= grad_tol * max(1.0, float(np.linalg.norm(grad))):
            lam = float(np.mean(c / g ** 2)) / capacity_hz  # dual estimate
            f[active] = g * capacity_hz
            return AllocationResult(f_hz=f, multiplier=lam)
        # backtrack while a decrease is certifiable in double precision
        trial_step = step
        certified = False
        for _ in range(60):
            g_new = g - trial_step * pg
            if np.all(g_new > 0):
                new_value = objective(g_new)
                # strict: a no-op step must not certify once the required
                # decrease underflows
                if new_value < value - 1e-4 * trial_step * pg_norm ** 2:
                    certified = True
                    break
            trial_step *= 0.5
        if not certified:
            # near the optimum the decrease falls below float resolution;
            # a curvature-capped step stays safe without certification
            trial_step = 0.45 * float(np.min(g ** 3 / c))
            g_new = g - trial_step * pg
            while np.any(g_new <= 0):
                trial_step *= 0.5
                g_new = g - trial_step * pg
            new_value = objective(g_new)
        g, value = g_new, new_value
        step = trial_step * 2.0
    raise RuntimeError(f"no convergence within {max_iter} iterations")
