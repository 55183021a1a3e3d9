from typing import *
import numpy as np
from easydict import EasyDict as edict

from ..errors import ParameterError
from ..modules.gram import GramState
from ..envs.planning import backward_induction, act as _act
from .base import Agent
from .bonuses import make_bonus
from .schedules import ConfidenceSchedule


class MatrixRLAgent:
    """
    Single-task MatrixRL: ridge estimate of the core, ellipsoidal confidence
    radius and bonus-based optimistic backward induction.

    The estimate and Σ are refreshed only at episode boundaries.

    Args:
        features: FeatureMaps of the task.
        rewards: Known |S|×|A| reward table.
        H: Horizon.
        schedule: Confidence schedule; its ``lam`` is the ridge regularizer.
        bonus_scale: Multiplier on the bonus (1.0 = theory).
        bonus_form: One of 'regularity', 'exact', 'boundedness'.
        radius_multiplier: Inflation of the confidence radius (audits only).
    """
    def __init__(
        self,
        features,
        rewards: np.ndarray,
        H: int,
        schedule: ConfidenceSchedule,
        *,
        bonus_scale: float = 1.0,
        bonus_form: str = 'regularity',
        radius_multiplier: float = 1.0,
    ):
        if features.d != schedule.d or features.d_prime != schedule.d_prime:
            raise ParameterError("Invalid schedule, dimensions disagree with the features")
        self.features = features
        self.rewards = np.asarray(rewards, dtype=np.float64)
        self.H = int(H)
        self.schedule = schedule
        self.bonus_scale = float(bonus_scale)
        self.bonus_form = bonus_form
        self.radius_multiplier = float(radius_multiplier)
        self.gram = GramState(features.d, schedule.lam, features.d_prime)
        self.m_tilde = np.zeros((features.d, features.d_prime))
        self.n = 1

    def __str__(self):
        lines = []
        lines.append(self.__class__.__name__)
        lines.append(f'  - Episode: {self.n}')
        lines.append(f'  - Samples: {self.gram.count}')
        lines.append(f'  - Mode: {self.schedule.mode}')
        lines.append(f'  - Bonus: {self.bonus_form} x {self.bonus_scale}')
        return '\n'.join(lines)

    @property
    def radius(self) -> float:
        return self.radius_multiplier * self.schedule.set_radius(self.n)

    def plan(self) -> edict:
        """
        Optimistic Q and clipped V for the current episode.
        """
        kernel = self.features.phi @ self.m_tilde @ self.features.psi.T
        phi_norms = self.gram.inv_norms(self.features.phi)
        bonus = make_bonus(
            self.bonus_form, phi_norms, self.radius, self.H, self.features,
            mode=self.schedule.mode, scale=self.bonus_scale,
            boundedness_radius=self.radius_multiplier * self.schedule.sqrt_beta(self.n),
        )
        plan = backward_induction(kernel, self.rewards, self.H, bonus=bonus, clip=True)
        plan.radius = self.radius
        plan.phi_norms = phi_norms
        plan.kernel = kernel
        return plan

    def update(self, episode) -> 'MatrixRLAgent':
        """
        Absorb the H pairs (φ(s_h, a_h), K_ψ⁻¹ψ(s_{h+1})), refresh the estimate
        and advance the episode counter.
        """
        if len(episode.steps) == 0:
            raise ParameterError("Invalid episode, no steps recorded")
        idx = [self.features.index(s, a) for s, a, _, _ in episode.steps]
        phis = self.features.phi[idx]
        targets = self.features.psi_tilde[[s_next for _, _, s_next, _ in episode.steps]]
        for phi, target in zip(phis, targets):
            self.gram.absorb(phi, target)
        self.m_tilde = self.gram.ridge_solve()
        self.n += 1
        return self

    def membership(self, M_true: np.ndarray) -> edict:
        """
        Whether M_true lies in the current confidence set.

        Frobenius set: ‖Σ^{1/2}(M − M̃)‖_F ≤ √(d′βₙ); (2,1) set: Σ_i
        ‖Σ^{1/2}(M − M̃)[:, i]‖ ≤ d′√βₙ.
        """
        Y = self.gram.chol.T @ (np.asarray(M_true) - self.m_tilde)
        if self.schedule.mode == 'assumption3':
            distance = float(np.sqrt(np.sum(Y * Y)))
        else:
            distance = float(np.sum(np.linalg.norm(Y, axis=0)))
        return edict({'distance': distance, 'radius': self.radius, 'member': bool(distance <= self.radius)})


def plan_optimistic(agent: MatrixRLAgent, rewards=None, features=None, H=None) -> edict:
    """
    Bonus-based optimistic plan of ``agent``; optional arguments override the
    agent's own rewards, features and horizon.
    """
    if rewards is not None:
        agent.rewards = np.asarray(rewards, dtype=np.float64)
    if features is not None:
        agent.features = features
    if H is not None:
        agent.H = int(H)
    return agent.plan()


def act(agent: MatrixRLAgent, Q_h: np.ndarray, s: int) -> int:
    """Greedy action at state s, lowest index on ties."""
    return _act(Q_h, s)


def update(agent: MatrixRLAgent, episode, features=None) -> MatrixRLAgent:
    if features is not None:
        agent.features = features
    return agent.update(episode)


class IndependentMatrixRL(Agent):
    """
    P isolated MatrixRL agents, one per task.

    Also serves as the oracle baseline when built on projected features
    B★ᵀφ.
    """

    name = 'independent'

    def __init__(self, agents: List[MatrixRLAgent], name: Optional[str] = None):
        self.agents = agents
        if name is not None:
            self.name = name

    @property
    def P(self) -> int:
        return len(self.agents)

    @property
    def n(self) -> int:
        return self.agents[0].n

    def plan_round(self, start_states: List[int], **kwargs) -> List[edict]:
        return [agent.plan() for agent in self.agents]

    def update_round(self, episodes, **kwargs) -> 'IndependentMatrixRL':
        if len(episodes) != self.P:
            raise ParameterError(f"Invalid round, got {len(episodes)} episodes for {self.P} tasks")
        for agent, episode in zip(self.agents, episodes):
            agent.update(episode)
        return self
