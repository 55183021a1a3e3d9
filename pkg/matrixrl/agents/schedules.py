"""
Confidence radii of the single-task and shared estimators.
"""
from typing import *
from dataclasses import dataclass
import numpy as np

from ..errors import ParameterError

MODES = ['assumption2', 'assumption3']
SHARED_CONSTANTS = ['statement', 'derivation']


@dataclass
class ConfidenceSchedule:
    """
    Ridge confidence radius

        √βₙ = R·√(d·log((d′ + d′nHL_φ²/λ)/δ)) + √λ·S,  R = ‖K_ψ⁻¹‖L_ψ + S·L_φ.

    The Frobenius set has radius √(d′βₙ) and the (2,1) set d′√βₙ; ``mode``
    picks which one ``set_radius`` returns.
    """
    delta: float
    lam: float
    S_bound: float
    L_phi: float
    L_psi: float
    K_psi_inv_norm: float
    d: int
    d_prime: int
    H: int
    mode: str = 'assumption3'

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ParameterError(f"Invalid delta '{self.delta}', must be in (0, 1)")
        if self.lam <= 0:
            raise ParameterError(f"Invalid lambda '{self.lam}', must be positive")
        if min(self.S_bound, self.L_phi, self.L_psi, self.K_psi_inv_norm) < 0:
            raise ParameterError("Invalid schedule, norm bounds must be nonnegative")
        if self.mode not in MODES:
            raise ParameterError(f"Invalid mode '{self.mode}', must be one of {MODES}")

    @classmethod
    def from_features(cls, features, S_bound: float, H: int, lam: float, delta: float, mode: str = 'assumption3') -> 'ConfidenceSchedule':
        return cls(
            delta=delta,
            lam=lam,
            S_bound=S_bound,
            L_phi=features.L_phi,
            L_psi=features.L_psi,
            K_psi_inv_norm=features.K_psi_inv_norm,
            d=features.d,
            d_prime=features.d_prime,
            H=H,
            mode=mode,
        )

    @property
    def R_sub(self) -> float:
        return self.K_psi_inv_norm * self.L_psi + self.S_bound * self.L_phi

    def sqrt_beta(self, n: int) -> float:
        if n < 1:
            raise ParameterError(f"Invalid episode index '{n}', must be >= 1")
        log_arg = (self.d_prime + self.d_prime * n * self.H * self.L_phi ** 2 / self.lam) / self.delta
        return float(self.R_sub * np.sqrt(self.d * np.log(log_arg)) + np.sqrt(self.lam) * self.S_bound)

    def beta(self, n: int) -> float:
        return self.sqrt_beta(n) ** 2

    def frobenius_radius(self, n: int) -> float:
        return float(np.sqrt(self.d_prime * self.beta(n)))

    def l21_radius(self, n: int) -> float:
        return float(self.d_prime * self.sqrt_beta(n))

    def set_radius(self, n: int) -> float:
        return self.frobenius_radius(n) if self.mode == 'assumption3' else self.l21_radius(n)


def beta_n(schedule: ConfidenceSchedule, n: int) -> float:
    """βₙ of ``schedule`` at episode n."""
    return schedule.beta(n)


@dataclass
class SharedRadius:
    """
    Joint radius γₙ(δ) = 2β′_{nH}(δ) + 2P√d′·S·λ of the shared estimator.

    ``constants`` selects the β′ display: ``statement`` uses
    (12R² + b)(2 ln ln(2nHP) + 3 + ln(1/δ) + k(ln(5S) + ln(nHP) + ln(2RL_φ)))
    and ``derivation`` uses
    (10R² + 0.41b)(1.4 ln ln(2nHP) + ln 5.2 + ln(1/δ) + k(ln(3+2S) + ln(nHP) + ln(2RL_φ))),
    with k = dr + rd′P and b = 2Rd′SL_ψ in both.
    """
    delta: float
    R_sub: float
    L_phi: float
    L_psi: float
    S_bound: float
    d: int
    r: int
    d_prime: int
    P: int
    H: int
    lam: float
    constants: str = 'statement'

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ParameterError(f"Invalid delta '{self.delta}', must be in (0, 1)")
        if self.R_sub <= 0 or self.L_phi <= 0 or self.S_bound <= 0:
            raise ParameterError("Invalid shared radius, R, L_phi and S must be positive")
        if self.constants not in SHARED_CONSTANTS:
            raise ParameterError(f"Invalid constants '{self.constants}', must be one of {SHARED_CONSTANTS}")

    @classmethod
    def from_schedule(cls, schedule: ConfidenceSchedule, r: int, P: int, constants: str = 'statement') -> 'SharedRadius':
        return cls(
            delta=schedule.delta,
            R_sub=schedule.R_sub,
            L_phi=schedule.L_phi,
            L_psi=schedule.L_psi,
            S_bound=schedule.S_bound,
            d=schedule.d,
            r=r,
            d_prime=schedule.d_prime,
            P=P,
            H=schedule.H,
            lam=schedule.lam,
            constants=constants,
        )

    @property
    def b(self) -> float:
        return 2.0 * self.R_sub * self.d_prime * self.S_bound * self.L_psi

    def beta_prime(self, n: int) -> float:
        if n < 1:
            raise ParameterError(f"Invalid episode index '{n}', must be >= 1")
        R, b, S = self.R_sub, self.b, self.S_bound
        nHP = n * self.H * self.P
        k = self.d * self.r + self.r * self.d_prime * self.P
        if self.constants == 'statement':
            lead = 12.0 * R ** 2 + b
            inner = 2.0 * np.log(np.log(2.0 * nHP)) + 3.0 + np.log(1.0 / self.delta) \
                + k * (np.log(5.0 * S) + np.log(nHP) + np.log(2.0 * R * self.L_phi))
        else:
            lead = 2.5 * 4.0 * R ** 2 + 0.41 * b
            inner = 1.4 * np.log(np.log(2.0 * nHP)) + np.log(5.2) + np.log(1.0 / self.delta) \
                + k * (np.log(3.0 + 2.0 * S) + np.log(nHP) + np.log(2.0 * R * self.L_phi))
        return float(1.0 + self.L_phi * S + b ** 2 / (2.0 * R ** 2) + lead * inner)

    def gamma(self, n: int) -> float:
        value = 2.0 * self.beta_prime(n) + 2.0 * self.P * np.sqrt(self.d_prime) * self.S_bound * self.lam
        return float(max(value, 0.0))


def shared_radius(sr: SharedRadius, n: int) -> float:
    """γₙ(δ) of ``sr`` at episode n."""
    return sr.gamma(n)
