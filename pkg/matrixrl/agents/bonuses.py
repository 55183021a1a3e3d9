from typing import *
import numpy as np

from ..errors import ParameterError

BONUS_FORMS = ['regularity', 'exact', 'boundedness']
PRACTICAL_BONUS_SCALE = 5e-4


def make_bonus(
    form: str,
    phi_norms: np.ndarray,
    radius: float,
    H: int,
    features,
    mode: str = 'assumption3',
    scale: float = 1.0,
    boundedness_radius: Optional[float] = None,
) -> Callable[[int, np.ndarray], np.ndarray]:
    """
    Exploration bonus as a function of the next-stage value.

    Forms, with w = ‖φ(s,a)‖_{Σ⁻¹}:
        regularity:  2·C_ψ·H·radius·w
        exact:       radius·w·‖ΨᵀV_{h+1}‖ (2-norm in assumption3 mode, ∞-norm
                     in assumption2 mode); the maximum of φᵀMΨᵀV_{h+1} over
                     the confidence set
        boundedness: 2·L_ψ·H·ρ·w with ρ = ``boundedness_radius`` (defaults to
                     ``radius``)

    Args:
        form: One of BONUS_FORMS.
        phi_norms: (|S|·|A|,) inverse-Gram feature norms.
        radius: Confidence-set radius of the current episode.
        H: Horizon.
        features: FeatureMaps providing C_ψ, L_ψ and Ψ.
        mode: Regularity assumption selecting C_ψ and the exact-form norm.
        scale: Multiplier on the whole bonus.

    Returns:
        Callable ``bonus(h, V_next)`` returning a (|S|·|A|,) array.
    """
    if form not in BONUS_FORMS:
        raise ParameterError(f"Invalid bonus form '{form}', must be one of {BONUS_FORMS}")
    if scale < 0:
        raise ParameterError(f"Invalid bonus scale '{scale}', must be nonnegative")
    phi_norms = np.asarray(phi_norms, dtype=np.float64)

    if form == 'regularity':
        table = scale * 2.0 * features.regularity(mode) * H * radius * phi_norms
        return lambda h, V_next: table
    if form == 'boundedness':
        rho = radius if boundedness_radius is None else boundedness_radius
        table = scale * 2.0 * features.L_psi * H * rho * phi_norms
        return lambda h, V_next: table

    ord_ = 2 if mode == 'assumption3' else np.inf
    psi = features.psi

    def exact(h, V_next):
        return scale * radius * phi_norms * np.linalg.norm(psi.T @ V_next, ord=ord_)
    return exact


def is_optimistic(form: str, scale: float) -> bool:
    """Whether the bonus provably dominates the model error on the confidence event."""
    return form in ('regularity', 'exact') and scale >= 1.0
