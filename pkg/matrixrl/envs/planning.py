"""
Backward induction on a (possibly estimated) kernel.

Stage h runs from 0 to H-1 (stage 0 is the first step of an episode);
``V`` has H+1 rows with ``V[H] = 0``.
"""
from typing import *
import numpy as np
from easydict import EasyDict as edict

from .features import FeatureMaps
from .family import TransitionCore
from .dynamics import transition_matrix

BonusLike = Union[None, np.ndarray, Callable[[int, np.ndarray], np.ndarray]]


def backward_induction(
    kernel: np.ndarray,
    rewards: np.ndarray,
    H: int,
    bonus: BonusLike = None,
    clip: bool = True,
) -> edict:
    """
    Q_h(s,a) = r(s,a) + kernel[(s,a)]·V_{h+1} + bonus_h(s,a),
    V_h(s) = Π_[0,H] max_a Q_h(s,a).

    Args:
        kernel: (|S|·|A|, |S|) model kernel; rows need not be distributions.
        rewards: |S|×|A| reward table.
        H: Horizon.
        bonus: None, a fixed |S|×|A| table, or a callable ``bonus(h, V_next)``
            returning one.
        clip: Project V onto [0, H] (off for exact values).

    Returns:
        EasyDict with Q of shape (H, |S|, |A|) and V of shape (H+1, |S|).
    """
    n_states, n_actions = rewards.shape
    Q = np.zeros((H, n_states, n_actions))
    V = np.zeros((H + 1, n_states))
    for h in range(H - 1, -1, -1):
        q = rewards + (kernel @ V[h + 1]).reshape(n_states, n_actions)
        if bonus is not None:
            b = bonus(h, V[h + 1]) if callable(bonus) else bonus
            q = q + np.asarray(b).reshape(n_states, n_actions)
        Q[h] = q
        v = q.max(axis=1)
        V[h] = np.clip(v, 0.0, H) if clip else v
    return edict({'Q': Q, 'V': V})


def exact_values(core: TransitionCore, features: FeatureMaps, rewards: np.ndarray, H: int) -> edict:
    """
    Optimal Q★ and V★ by backward induction on the true kernel.
    """
    return backward_induction(transition_matrix(core, features), rewards, H, clip=False)


def greedy_policy(Q: np.ndarray) -> np.ndarray:
    """
    (H, |S|) action table; ties go to the lowest action index.
    """
    return np.argmax(Q, axis=2)


def act(Q_h: np.ndarray, s: int) -> int:
    """argmax_a Q_h(s, a) with lowest-index tie breaking."""
    return int(np.argmax(Q_h[s]))


def policy_values(kernel: np.ndarray, rewards: np.ndarray, policy: np.ndarray, H: int) -> np.ndarray:
    """
    Exact V^π for every stage, shape (H+1, |S|).
    """
    n_states, n_actions = rewards.shape
    V = np.zeros((H + 1, n_states))
    rows = np.arange(n_states) * n_actions
    for h in range(H - 1, -1, -1):
        idx = rows + policy[h]
        V[h] = rewards[np.arange(n_states), policy[h]] + kernel[idx] @ V[h + 1]
    return V


def evaluate_policy(core: TransitionCore, features: FeatureMaps, rewards: np.ndarray, policy: np.ndarray, H: int) -> np.ndarray:
    """
    V₁^π on the true kernel for a per-stage action table.
    """
    return policy_values(transition_matrix(core, features), rewards, np.asarray(policy, dtype=np.int64), H)[0]
