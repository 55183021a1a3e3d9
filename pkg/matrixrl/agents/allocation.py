from typing import *
from dataclasses import dataclass, field
import numpy as np

from ..errors import ParameterError

ALLOCATION_METHODS = ['equal', 'greedy']


@dataclass
class RadiusAllocation:
    """Per-task radii τ⁽ᵖ⁾ with Σ_p (τ⁽ᵖ⁾)² ≤ budget."""
    tau: np.ndarray
    budget: float
    method: str = 'equal'
    objective: Optional[float] = None
    evaluations: int = 0

    @property
    def feasible(self) -> bool:
        return bool(np.all(self.tau >= 0) and float(np.sum(self.tau ** 2)) <= self.budget + 1e-9)


def allocate_radii(
    budget: float,
    contexts: Sequence[Callable[[float], float]],
    method: str = 'equal',
    sweeps: int = 20,
) -> RadiusAllocation:
    """
    Split the joint budget γ into per-task radii.

    ``equal`` gives τ⁽ᵖ⁾ = √(γ/P). ``greedy`` starts from the equal split and
    runs coordinate ascent on the squared radii tₚ = (τ⁽ᵖ⁾)²: each step moves
    a mass η from the task losing least value to the task gaining most, and
    η halves whenever no move helps. The sum Σtₚ stays at γ.

    Args:
        budget: γ ≥ 0.
        contexts: One callable per task mapping τ to the planned V_{n,1}(s₁).
        method: 'equal' or 'greedy'.
        sweeps: Step budget of the greedy method.

    Returns:
        RadiusAllocation.
    """
    if method not in ALLOCATION_METHODS:
        raise ParameterError(f"Invalid allocation method '{method}', must be one of {ALLOCATION_METHODS}")
    if budget < 0:
        raise ParameterError(f"Invalid budget '{budget}', must be nonnegative")
    P = len(contexts)
    if P == 0:
        raise ParameterError("Invalid allocation, at least one task is required")

    t = np.full(P, budget / P)
    if method == 'equal' or budget == 0 or P == 1:
        return RadiusAllocation(np.sqrt(t), float(budget), method)

    cache: Dict[Tuple[int, float], float] = {}

    def value(p, tp):
        key = (p, float(tp))
        if key not in cache:
            cache[key] = float(contexts[p](float(np.sqrt(max(tp, 0.0)))))
        return cache[key]

    step = budget / P / 2.0
    for _ in range(sweeps):
        current = np.array([value(p, t[p]) for p in range(P)])
        gains = np.array([value(p, t[p] + step) for p in range(P)]) - current
        losses = np.full(P, np.inf)
        for p in range(P):
            if t[p] >= step:
                losses[p] = current[p] - value(p, t[p] - step)
        i = int(np.argmax(gains))
        order = np.argsort(losses, kind='stable')
        j = int(order[0]) if order[0] != i else int(order[1])
        if np.isfinite(losses[j]) and gains[i] - losses[j] > 1e-12:
            t[i] += step
            t[j] = max(t[j] - step, 0.0)
        else:
            step /= 2.0

    total = float(np.sum(t))
    if total > budget:
        t *= budget / total
    tau = np.sqrt(t)
    objective = float(sum(value(p, t[p]) for p in range(P)))
    return RadiusAllocation(tau, float(budget), method, objective, len(cache))
