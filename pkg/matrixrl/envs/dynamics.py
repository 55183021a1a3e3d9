from typing import *
import numpy as np

from ..errors import EnvironmentStepError
from .features import FeatureMaps
from .family import TransitionCore, EpisodeRecord

ROW_SUM_TOLERANCE = 1e-6


def transition_matrix(core: TransitionCore, features: FeatureMaps) -> np.ndarray:
    """
    Kernel Φ M Ψᵀ of shape (|S|·|A|, |S|); row s·|A|+a is P(·|s, a).

    Validity is not checked here, raw cores are allowed.
    """
    M = core.M if isinstance(core, TransitionCore) else np.asarray(core, dtype=np.float64)
    return features.phi @ M @ features.psi.T


def _clean_row(row: np.ndarray) -> np.ndarray:
    total = float(np.sum(row))
    if not np.isfinite(total) or abs(total - 1.0) > ROW_SUM_TOLERANCE or np.min(row) < -ROW_SUM_TOLERANCE:
        raise EnvironmentStepError(f"Invalid transition row (sum={total:.9g}, min={np.min(row):.3e})")
    row = np.clip(row, 0.0, None)
    return row / row.sum()


def _draw(cdf: np.ndarray, rng: np.random.Generator) -> int:
    u = rng.random()
    idx = int(np.searchsorted(cdf, u * cdf[-1], side='right'))
    return min(idx, cdf.shape[0] - 1)


def sample_step(core: TransitionCore, features: FeatureMaps, s: int, a: int, rng: np.random.Generator) -> int:
    """
    Draw s′ ~ φ(s,a)ᵀMΨᵀ.

    Negative entries are clamped to zero and the row renormalized; a row whose
    sum deviates from one by more than 1e-6 raises EnvironmentStepError.
    """
    row = features.phi_of(s, a) @ core.M @ features.psi.T
    return _draw(np.cumsum(_clean_row(row)), rng)


class TransitionSampler:
    """
    Precomputed cumulative kernel of one task for fast rollouts.

    Uses the same clamping and inverse-CDF rule as ``sample_step``.
    """
    def __init__(self, core: TransitionCore, features: FeatureMaps):
        self.n_states = features.n_states
        self.n_actions = features.n_actions
        self.kernel = transition_matrix(core, features)
        self.cdf = np.stack([np.cumsum(_clean_row(row)) for row in self.kernel])

    def step(self, s: int, a: int, rng: np.random.Generator) -> int:
        return _draw(self.cdf[s * self.n_actions + a], rng)


def rollout(
    sampler: TransitionSampler,
    rewards: np.ndarray,
    policy: np.ndarray,
    start_state: int,
    rng: np.random.Generator,
    task: int = 0,
    episode: int = 0,
) -> EpisodeRecord:
    """
    Play a per-stage action table for one episode.

    Args:
        sampler: Kernel of the task.
        rewards: |S|×|A| reward table.
        policy: (H, |S|) integer action table.
        start_state: s₁.
        rng: Environment stream of this (task, episode).

    Returns:
        The EpisodeRecord of H steps.
    """
    record = EpisodeRecord(task=task, episode=episode, start_state=int(start_state))
    s = int(start_state)
    for h in range(policy.shape[0]):
        a = int(policy[h, s])
        s_next = sampler.step(s, a, rng)
        record.steps.append((s, a, s_next, float(rewards[s, a])))
        s = s_next
    return record
