"""
Numerical checks of the elliptical-potential machinery.

Each check evaluates both sides of an inequality on concrete data and returns
an EasyDict report with ``lhs``, ``rhs`` and ``holds``. Inequalities get an
additive 1e-9 slack for floating-point noise.
"""
from typing import *
import numpy as np
from easydict import EasyDict as edict

from ..errors import ParameterError
from .gram import GramState

SLACK = 1e-9


def _max_norm(X: np.ndarray) -> float:
    if X.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(X.reshape(-1, X.shape[-1]), axis=1)))


def potential_bound(M: int, d: int, lam: float, L: float) -> float:
    """d·log(1 + ML²/(λd))."""
    return float(d * np.log1p(M * L ** 2 / (lam * d)))


def check_det_lemma(xs, lam: float, b: float, L: Optional[float] = None) -> edict:
    """
    Check the determinant lemma on a vector sequence.

    With D_1 = λI and D_q = λI + Σ_{q'<q} x_{q'}x_{q'}ᵀ, evaluates
    Σ_q min(b, ‖x_q‖²_{D_q⁻¹}) against (1+b)·d·log(1 + ML²/(λd)), and
    log det(D_{M+1})/det(λI) against d·log(1 + ML²/(λd)).

    Args:
        xs: Sequence of M vectors in R^d (array-like of shape (M, d)).
        lam: Regularizer λ > 0.
        b: Truncation level b > 0.
        L: Norm bound; defaults to the largest norm in ``xs``.

    Returns:
        EasyDict with lhs, rhs, logdet_ratio, logdet_bound and holds.
    """
    if lam <= 0:
        raise ParameterError(f"Invalid lambda '{lam}', must be positive")
    if b <= 0:
        raise ParameterError(f"Invalid b '{b}', must be positive")
    X = np.asarray(xs, dtype=np.float64)
    if X.size == 0:
        return edict({'lhs': 0.0, 'rhs': 0.0, 'logdet_ratio': 0.0, 'logdet_bound': 0.0, 'holds': True})
    X = np.atleast_2d(X)
    M, d = X.shape
    L = _max_norm(X) if L is None else float(L)

    gram = GramState(d, lam)
    lhs = 0.0
    for x in X:
        lhs += min(b, gram.inv_norm(x) ** 2)
        gram.absorb(x, [0.0])
    bound = potential_bound(M, d, lam, L)
    logdet_ratio = gram.logdet() - d * np.log(lam)
    rhs = (1.0 + b) * bound
    return edict({
        'lhs': float(lhs),
        'rhs': float(rhs),
        'logdet_ratio': float(logdet_ratio),
        'logdet_bound': float(bound),
        'holds': bool(lhs <= rhs + SLACK and logdet_ratio <= bound + SLACK),
    })


def check_lazy_lemma(xs, lam: float, H: Optional[int] = None, L: Optional[float] = None) -> edict:
    """
    Check the lazy determinant lemma.

    ``xs`` is indexed (n, h) lexicographically: shape (N, H, d), or flat
    (N·H, d) together with ``H``. Shape (N, H, P, d) selects the block-diagonal
    multitask form where the norm of x_{n,h} is √(Σ_p ‖x⁽ᵖ⁾‖²) and each task
    keeps its own d×d block.

    D_n is frozen at the start of episode n and D_{n,h} additionally holds the
    steps h' < h of episode n.

    Returns:
        EasyDict with lhs = ΣΣ‖x‖_{D_n⁻¹}, rhs = 2ΣΣ‖x‖_{D_{n,h}⁻¹} +
        (2HL/√λ)·log(det D_{N+1}/det λI), logdet_ratio and holds.
    """
    if lam <= 0:
        raise ParameterError(f"Invalid lambda '{lam}', must be positive")
    X = np.asarray(xs, dtype=np.float64)
    if X.ndim == 2:
        if H is None or H < 1 or X.shape[0] % H != 0:
            raise ParameterError(f"Invalid horizon '{H}' for {X.shape[0]} flat vectors")
        X = X.reshape(X.shape[0] // H, H, X.shape[1])
    if X.ndim == 3:
        X = X[:, :, None, :]
    if X.ndim != 4:
        raise ParameterError(f"Invalid vector array shape {X.shape}, must be (N, H, d) or (N, H, P, d)")
    N, H, P, d = X.shape
    if L is None:
        L = float(np.max(np.sqrt(np.sum(X ** 2, axis=(2, 3))))) if X.size else 0.0

    grams = [GramState(d, lam) for _ in range(P)]
    lhs = 0.0
    stepwise = 0.0
    for n in range(N):
        frozen = [g.copy() for g in grams]
        for h in range(H):
            lhs += np.sqrt(sum(frozen[p].inv_norm(X[n, h, p]) ** 2 for p in range(P)))
            stepwise += np.sqrt(sum(grams[p].inv_norm(X[n, h, p]) ** 2 for p in range(P)))
            for p in range(P):
                grams[p].absorb(X[n, h, p], [0.0])
    logdet_ratio = sum(g.logdet() - d * np.log(lam) for g in grams)
    rhs = 2.0 * stepwise + (2.0 * H * L / np.sqrt(lam)) * logdet_ratio
    return edict({
        'lhs': float(lhs),
        'rhs': float(rhs),
        'logdet_ratio': float(logdet_ratio),
        'holds': bool(lhs <= rhs + SLACK),
    })


def check_quadratic_det_ratio(B, C, probes) -> edict:
    """
    Check xᵀBx / xᵀCx ≤ det(B)/det(C) for B ⪰ C ≻ 0 on probe vectors.

    Args:
        B, C: Symmetric d×d matrices with B ⪰ C ≻ 0.
        probes: (k, d) nonzero probe vectors.
    """
    B = np.asarray(B, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    scale = max(1.0, float(np.max(np.abs(B))))
    if np.min(np.linalg.eigvalsh(C)) <= 0:
        raise ParameterError("Invalid pair, C must be positive definite")
    if np.min(np.linalg.eigvalsh(B - C)) < -1e-10 * scale:
        raise ParameterError("Invalid pair, B - C must be positive semidefinite")
    P_ = np.atleast_2d(np.asarray(probes, dtype=np.float64))
    num = np.einsum('ki,ij,kj->k', P_, B, P_)
    den = np.einsum('ki,ij,kj->k', P_, C, P_)
    keep = den > 0
    max_ratio = float(np.max(num[keep] / den[keep])) if np.any(keep) else 0.0
    det_ratio = float(np.exp(np.linalg.slogdet(B)[1] - np.linalg.slogdet(C)[1]))
    return edict({
        'lhs': max_ratio,
        'rhs': det_ratio,
        'holds': bool(max_ratio <= det_ratio + SLACK * max(1.0, det_ratio)),
    })


def martingale_envelope(T: int, zeta: float, delta: float) -> float:
    """
    Anytime bound 2ζ√(T·ln(6·ln T/δ)) on a bounded martingale sum.

    ln T is floored at 1 so short sequences get a finite envelope.
    """
    if T <= 0:
        return 0.0
    return float(2.0 * zeta * np.sqrt(T * np.log(6.0 * max(np.log(T), 1.0) / delta)))


def potential_envelope(N: int, H: int, d: int, lam: float, L: float) -> float:
    """√(NH·2d·log(1 + NHL²/(λd))), the summed-bonus ingredient of the regret bound."""
    return float(np.sqrt(N * H * 2.0 * potential_bound(N * H, d, lam, L)))
