from typing import *
from dataclasses import replace
import numpy as np
from scipy.linalg import cholesky, solve_triangular
from easydict import EasyDict as edict

from ..errors import ParameterError
from ..modules.gram import GramState
from ..envs.planning import backward_induction
from .base import Agent
from .bonuses import make_bonus
from .schedules import ConfidenceSchedule, SharedRadius
from .estimation import SharedEstimate, joint_factorized_ridge
from .allocation import allocate_radii, RadiusAllocation

BONUS_BASES = ['joint', 'projected']


def _plan_from_parts(kernel, phi_norms, rewards, tau, H, features, bonus_scale, bonus_form) -> edict:
    bonus = make_bonus(bonus_form, phi_norms, tau, H, features, mode='assumption3', scale=bonus_scale)
    plan = backward_induction(kernel, rewards, H, bonus=bonus, clip=True)
    plan.tau = float(tau)
    plan.phi_norms = phi_norms
    plan.kernel = kernel
    return plan


def projected_inv_norms(gram: GramState, B: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """
    Row-wise ‖Bᵀφ‖ under the inverse of BᵀΣB = λI_r + Bᵀ(Σᵢφᵢφᵢᵀ)B.

    Never exceeds ‖φ‖_{Σ⁻¹} when B has orthonormal columns.
    """
    B = np.asarray(B, dtype=np.float64)
    L = cholesky(B.T @ gram.sigma @ B, lower=True)
    Z = solve_triangular(L, (np.atleast_2d(phi) @ B).T, lower=True)
    return np.sqrt(np.sum(Z * Z, axis=0))


def plan_task(
    p: int,
    est: SharedEstimate,
    tau_p: float,
    gram_p: GramState,
    rewards_p: np.ndarray,
    features,
    H: int,
    bonus_scale: float = 1.0,
    bonus_form: str = 'regularity',
) -> edict:
    """
    Optimistic plan of task p with model B̂Â⁽ᵖ⁾ and per-task radius τ⁽ᵖ⁾.

    Identical to the single-task planner with the regularity bonus
    2·C_ψ·H·τ⁽ᵖ⁾·‖φ‖_{(Σ⁽ᵖ⁾)⁻¹} by default.
    """
    kernel = features.phi @ est.product(p) @ features.psi.T
    phi_norms = gram_p.inv_norms(features.phi)
    return _plan_from_parts(kernel, phi_norms, rewards_p, tau_p, H, features, bonus_scale, bonus_form)


class SharedMatrixRLAgent(Agent):
    """
    Shared-MatrixRL with bonus planning and per-task radius allocation.

    Args:
        features: One FeatureMaps per task.
        rewards: One reward table per task.
        H: Horizon.
        r: Rank of the shared representation.
        schedule: Single-task schedule supplying δ, λ, S and the norm bounds.
        constants: β′ display, 'statement' or 'derivation'.
        bonus_scale: Multiplier on the bonus (1.0 = theory).
        bonus_form: One of 'regularity', 'exact', 'boundedness'.
        allocation_method: 'equal' or 'greedy'.
        greedy_sweeps: Step budget of greedy allocation.
        tol: Alternating-minimization tolerance.
        max_sweeps: Alternating-minimization sweep budget per refit.
        radius_multiplier: Inflation of γ (audits only).
        bonus_basis: 'joint' plans with the allocated τ⁽ᵖ⁾ and ‖φ‖_{(Σ⁽ᵖ⁾)⁻¹};
            'projected' plans with the known-representation radius of rank r
            and ‖B̂ᵀφ‖ under (B̂ᵀΣ⁽ᵖ⁾B̂)⁻¹. Only 'joint' carries the joint
            optimism guarantee.
    """

    name = 'shared'

    def __init__(
        self,
        features: List,
        rewards: List[np.ndarray],
        H: int,
        r: int,
        schedule: ConfidenceSchedule,
        *,
        constants: str = 'statement',
        bonus_scale: float = 1.0,
        bonus_form: str = 'regularity',
        allocation_method: str = 'equal',
        greedy_sweeps: int = 20,
        tol: float = 1e-8,
        max_sweeps: int = 100,
        radius_multiplier: float = 1.0,
        bonus_basis: str = 'joint',
    ):
        if bonus_basis not in BONUS_BASES:
            raise ParameterError(f"Invalid bonus basis '{bonus_basis}', must be one of {BONUS_BASES}")
        if len(features) != len(rewards):
            raise ParameterError("Invalid agent, one feature map and reward table per task required")
        self.features = list(features)
        self.rewards = [np.asarray(r_, dtype=np.float64) for r_ in rewards]
        self.P = len(self.features)
        self.H = int(H)
        self.r = int(r)
        self.schedule = schedule
        self.radius = SharedRadius.from_schedule(schedule, r, self.P, constants)
        self.bonus_scale = float(bonus_scale)
        self.bonus_form = bonus_form
        self.allocation_method = allocation_method
        self.greedy_sweeps = int(greedy_sweeps)
        self.tol = float(tol)
        self.max_sweeps = int(max_sweeps)
        self.radius_multiplier = float(radius_multiplier)
        self.bonus_basis = bonus_basis
        self.projected_schedule = replace(schedule, d=int(r))
        self.cap = float(np.sqrt(schedule.d_prime) * schedule.S_bound)

        d, d_prime = self.features[0].d, self.features[0].d_prime
        self.grams = [GramState(d, schedule.lam, d_prime) for _ in range(self.P)]
        self.estimate = joint_factorized_ridge(self.grams, schedule.lam, self.r, cap=self.cap)
        self.allocation: Optional[RadiusAllocation] = None
        self.n = 1

    def __str__(self):
        lines = []
        lines.append(self.__class__.__name__)
        lines.append(f'  - Tasks: {self.P}')
        lines.append(f'  - Rank: {self.r}')
        lines.append(f'  - Episode: {self.n}')
        lines.append(f'  - Allocation: {self.allocation_method}')
        lines.append(f'  - Bonus: {self.bonus_form} x {self.bonus_scale} on the {self.bonus_basis} basis')
        lines.append(f'  - Last refit: {self.estimate.sweeps} sweeps, converged={self.estimate.converged}')
        return '\n'.join(lines)

    @property
    def gamma(self) -> float:
        return self.radius_multiplier ** 2 * self.radius.gamma(self.n)

    @property
    def projected_radius(self) -> float:
        return self.radius_multiplier * self.projected_schedule.frobenius_radius(self.n)

    def _bonus_norms(self, p: int) -> np.ndarray:
        f = self.features[p]
        if self.bonus_basis == 'projected':
            return projected_inv_norms(self.grams[p], self.estimate.B, f.phi)
        return self.grams[p].inv_norms(f.phi)

    def plan_round(self, start_states: List[int], **kwargs) -> List[edict]:
        """
        Allocate τ⁽ᵖ⁾ and plan every task for the coming episode.
        """
        if len(start_states) != self.P:
            raise ParameterError(f"Invalid start states, got {len(start_states)} for {self.P} tasks")
        parts = []
        for p in range(self.P):
            f = self.features[p]
            parts.append((f.phi @ self.estimate.product(p) @ f.psi.T, self._bonus_norms(p)))

        def context(p):
            kernel, phi_norms = parts[p]
            s1 = int(start_states[p])
            return lambda tau: _plan_from_parts(
                kernel, phi_norms, self.rewards[p], tau, self.H, self.features[p],
                self.bonus_scale, self.bonus_form,
            ).V[0][s1]

        if self.bonus_basis == 'projected':
            tau = self.projected_radius
            self.allocation = RadiusAllocation(np.full(self.P, tau), self.P * tau ** 2, method='projected')
        else:
            self.allocation = allocate_radii(
                self.gamma, [context(p) for p in range(self.P)], self.allocation_method, self.greedy_sweeps,
            )
        plans = []
        for p in range(self.P):
            kernel, phi_norms = parts[p]
            plans.append(_plan_from_parts(
                kernel, phi_norms, self.rewards[p], float(self.allocation.tau[p]), self.H,
                self.features[p], self.bonus_scale, self.bonus_form,
            ))
        return plans

    def update_round(self, episodes, **kwargs) -> 'SharedMatrixRLAgent':
        return shared_episode_update(self, episodes)


def shared_episode_update(agent: SharedMatrixRLAgent, episodes) -> SharedMatrixRLAgent:
    """
    Absorb one episode per task, refit the joint estimate warm-started at
    the previous one and advance the episode counter.
    """
    if episodes is None or len(episodes) != agent.P or any(e is None for e in episodes):
        raise ParameterError(f"Invalid round, exactly one episode per task ({agent.P}) is required")
    # the data-free estimate carries no information, restart spectrally
    warm = agent.estimate if any(g.count for g in agent.grams) else None
    for p, episode in enumerate(episodes):
        f = agent.features[p]
        for s, a, s_next, _ in episode.steps:
            agent.grams[p].absorb(f.phi_of(s, a), f.psi_tilde[s_next])
    agent.estimate = joint_factorized_ridge(
        agent.grams, agent.schedule.lam, agent.r, init=warm,
        tol=agent.tol, max_sweeps=agent.max_sweeps, cap=agent.cap,
    )
    agent.n += 1
    return agent
