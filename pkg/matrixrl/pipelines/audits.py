"""
Runtime checks evaluated on logged plans and trajectories.
"""
from typing import *
import numpy as np
from easydict import EasyDict as edict

BELLMAN_SLACK = 1e-6
VALUE_SLACK = 1e-9


def bellman_audit(plans, kernels, rewards, episodes, gamma: float, C_psi: float, H: int) -> edict:
    """
    Summed Bellman error of the planned values along the played steps.

    At stage h, with (s, a) the state-action of task p,

        Σ_p [Q⁽ᵖ⁾_h(s,a) − r⁽ᵖ⁾(s,a) − P⁽ᵖ⁾(·|s,a)ᵀV⁽ᵖ⁾_{h+1}]
            ≤ 2·C_ψ·H·√(γ·Σ_p ‖φ⁽ᵖ⁾‖²_{(Σ⁽ᵖ⁾)⁻¹}) + 1e-6.

    Args:
        plans: Per-task plans with Q, V and phi_norms.
        kernels: Per-task true kernels (|S|·|A|, |S|).
        rewards: Per-task reward tables.
        episodes: Per-task EpisodeRecord played under the plans.
        gamma: Joint radius of the episode.
        C_psi: Regularity constant.
        H: Horizon.
    """
    n_actions = rewards[0].shape[1]
    violations = 0
    max_ratio = 0.0
    for h in range(H):
        lhs = 0.0
        norm_sq = 0.0
        for plan, kernel, r, episode in zip(plans, kernels, rewards, episodes):
            s, a, _, _ = episode.steps[h]
            idx = s * n_actions + a
            lhs += plan.Q[h, s, a] - r[s, a] - kernel[idx] @ plan.V[h + 1]
            norm_sq += plan.phi_norms[idx] ** 2
        bound = 2.0 * C_psi * H * np.sqrt(gamma * norm_sq)
        if lhs > bound + BELLMAN_SLACK:
            violations += 1
        if bound > 0:
            max_ratio = max(max_ratio, lhs / bound)
    return edict({'steps': H, 'violations': violations, 'max_ratio': float(max_ratio)})


def value_residuals(plan, values_pi: np.ndarray, kernel: np.ndarray, episode, n_actions: int) -> np.ndarray:
    """
    Residuals δ_h = P(·|s_h,a_h)ᵀ(V_{h+1} − V^π_{h+1}) − (V_{h+1} − V^π_{h+1})(s_{h+1}).

    Each δ_h is a martingale difference bounded by 2H.
    """
    out = np.zeros(len(episode.steps))
    for h, (s, a, s_next, _) in enumerate(episode.steps):
        gap = plan.V[h + 1] - values_pi[h + 1]
        out[h] = kernel[s * n_actions + a] @ gap - gap[s_next]
    return out


def audit_bonus_dominance(plan, member_kernels, rewards: np.ndarray, H: int) -> edict:
    """
    Stage-wise domination of sampled confidence-set members by the bonus plan.

    For every member kernel K_M and stage h, checks
    Q_h ≥ r + K_M·V_{h+1} − 1e-9 with V_{h+1} the plan's own next values.
    """
    n_states, n_actions = rewards.shape
    dominated = 0
    worst = np.inf
    for kernel in member_kernels:
        ok = True
        for h in range(H):
            q_member = rewards + (kernel @ plan.V[h + 1]).reshape(n_states, n_actions)
            margin = float(np.min(plan.Q[h] - q_member))
            worst = min(worst, margin)
            if margin < -VALUE_SLACK:
                ok = False
        dominated += int(ok)
    total = len(member_kernels)
    return edict({
        'members': total,
        'dominated': dominated,
        'worst_margin': float(worst) if total else 0.0,
        'holds': dominated == total,
    })


def l21_membership(gram, center: np.ndarray, M: np.ndarray, radius: float) -> edict:
    """
    Membership in the (2,1) set Σ_i ‖Σ^{1/2}(M − center)[:, i]‖₂ ≤ radius.
    """
    Y = gram.chol.T @ (np.asarray(M, dtype=np.float64) - center)
    distance = float(np.sum(np.linalg.norm(Y, axis=0)))
    return edict({'distance': distance, 'radius': float(radius), 'member': bool(distance <= radius)})
