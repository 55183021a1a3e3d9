from typing import *
import itertools
import numpy as np
from easydict import EasyDict as edict

from ..errors import ParameterError

# Exact sign-vector enumeration up to this many states.
EXACT_C_PSI_MAX_STATES = 12


def measure_c_psi(psi: np.ndarray) -> float:
    """
    sup_v ‖Ψᵀv‖₂ / ‖v‖_∞.

    The supremum of a convex function over the ∞-ball sits at a sign vector,
    so small state spaces are enumerated exactly; larger ones fall back to the
    bound min(Σ_s ‖ψ(s)‖₂, √|S|·σ_max(Ψ)).
    """
    n_states = psi.shape[0]
    if n_states <= EXACT_C_PSI_MAX_STATES:
        best = 0.0
        # v and -v give the same norm, fix the first sign
        for tail in itertools.product((1.0, -1.0), repeat=n_states - 1):
            v = np.array((1.0,) + tail)
            best = max(best, float(np.linalg.norm(psi.T @ v)))
        return best
    row_sum = float(np.sum(np.linalg.norm(psi, axis=1)))
    spectral = float(np.sqrt(n_states) * np.linalg.norm(psi, 2))
    return min(row_sum, spectral)


class FeatureMaps:
    """
    State-action embedding φ and next-state embedding ψ of a factored MDP.

    Row ``s * n_actions + a`` of ``phi`` is φ(s, a) and row ``s`` of ``psi`` is
    ψ(s). Declared norm bounds default to the measured ones and must dominate
    them.

    Args:
        phi: (|S|·|A|, d) state-action features.
        psi: (|S|, d′) next-state features.
        n_states: |S|.
        n_actions: |A|.
        L_phi: Declared bound on ‖φ(s, a)‖₂.
        L_psi: Declared bound on ‖ψ(s)‖₂.
    """
    def __init__(
        self,
        phi: np.ndarray,
        psi: np.ndarray,
        n_states: int,
        n_actions: int,
        L_phi: Optional[float] = None,
        L_psi: Optional[float] = None,
    ):
        phi = np.asarray(phi, dtype=np.float64)
        psi = np.asarray(psi, dtype=np.float64)
        if n_states < 1 or n_actions < 1:
            raise ParameterError(f"Invalid sizes ({n_states}, {n_actions}), must be positive")
        if phi.ndim != 2 or phi.shape[0] != n_states * n_actions:
            raise ParameterError(f"Invalid phi shape {phi.shape}, must be ({n_states * n_actions}, d)")
        if psi.ndim != 2 or psi.shape[0] != n_states:
            raise ParameterError(f"Invalid psi shape {psi.shape}, must be ({n_states}, d')")
        self.n_states = int(n_states)
        self.n_actions = int(n_actions)
        self.phi = phi
        self.psi = psi

        self.L_phi_measured = float(np.max(np.linalg.norm(phi, axis=1)))
        self.L_psi_measured = float(np.max(np.linalg.norm(psi, axis=1)))
        self.L_phi = self.L_phi_measured if L_phi is None else float(L_phi)
        self.L_psi = self.L_psi_measured if L_psi is None else float(L_psi)
        if self.L_phi < self.L_phi_measured - 1e-12:
            raise ParameterError(f"Invalid L_phi '{L_phi}', must be >= measured {self.L_phi_measured}")
        if self.L_psi < self.L_psi_measured - 1e-12:
            raise ParameterError(f"Invalid L_psi '{L_psi}', must be >= measured {self.L_psi_measured}")

        self.K_psi = psi.T @ psi
        eig = np.linalg.eigvalsh(self.K_psi)
        if eig[0] < 1e-8:
            raise ParameterError(f"Invalid psi, K_psi smallest eigenvalue {eig[0]:.3e} below 1e-8")
        self.K_psi_inv = np.linalg.inv(self.K_psi)
        self.K_psi_inv_norm = float(1.0 / eig[0])
        # row s of psi_tilde is K_psi⁻¹ψ(s)
        self.psi_tilde = psi @ self.K_psi_inv

        self.C_psi = measure_c_psi(psi)
        self.C_psi_inf = float(np.max(np.sum(np.abs(psi), axis=0)))
        self.C_psi_prime = float(np.max(np.linalg.norm(self.psi_tilde, axis=1)))

    @property
    def d(self) -> int:
        return self.phi.shape[1]

    @property
    def d_prime(self) -> int:
        return self.psi.shape[1]

    def index(self, s: int, a: int) -> int:
        return s * self.n_actions + a

    def phi_of(self, s: int, a: int) -> np.ndarray:
        return self.phi[self.index(s, a)]

    def regularity(self, mode: str = 'assumption3') -> float:
        """C_ψ for the chosen regularity assumption."""
        if mode == 'assumption3':
            return self.C_psi
        if mode == 'assumption2':
            return self.C_psi_inf
        raise ParameterError(f"Invalid mode '{mode}', must be one of ['assumption2', 'assumption3']")

    def project(self, B: np.ndarray) -> 'FeatureMaps':
        """
        Features with φ replaced by Bᵀφ; B has orthonormal columns so the
        declared L_phi bound carries over.
        """
        return FeatureMaps(self.phi @ B, self.psi, self.n_states, self.n_actions,
                           L_phi=max(self.L_phi, float(np.max(np.linalg.norm(self.phi @ B, axis=1)))),
                           L_psi=self.L_psi)

    def summary(self) -> edict:
        return edict({
            'n_states': self.n_states,
            'n_actions': self.n_actions,
            'd': self.d,
            'd_prime': self.d_prime,
            'L_phi': self.L_phi,
            'L_psi': self.L_psi,
            'L_phi_measured': self.L_phi_measured,
            'L_psi_measured': self.L_psi_measured,
            'K_psi_inv_norm': self.K_psi_inv_norm,
            'C_psi': self.C_psi,
            'C_psi_inf': self.C_psi_inf,
            'C_psi_prime': self.C_psi_prime,
        })

    def __str__(self):
        lines = [self.__class__.__name__]
        for key, value in self.summary().items():
            lines.append(f'  - {key}: {value}')
        return '\n'.join(lines)


def indicator_features(phi: np.ndarray, n_states: int, n_actions: int, L_phi: Optional[float] = None) -> FeatureMaps:
    """FeatureMaps with ψ the indicator basis (Ψ = I, K_ψ = I)."""
    return FeatureMaps(phi, np.eye(n_states), n_states, n_actions, L_phi=L_phi, L_psi=1.0)
