from typing import *
import numpy as np
from scipy.linalg import cholesky, cho_solve, solve_triangular

from ..errors import ParameterError

# Full refactorization below this size, rank-one update above.
REFACTOR_MAX_DIM = 64


def _chol_rank_one_update(chol: np.ndarray, x: np.ndarray) -> np.ndarray:
    """
    Update a lower Cholesky factor L of A to the factor of A + x xᵀ.
    """
    L = chol.copy()
    x = x.astype(np.float64).copy()
    n = x.shape[0]
    for k in range(n):
        r = np.hypot(L[k, k], x[k])
        c = r / L[k, k]
        s = x[k] / L[k, k]
        L[k, k] = r
        if k + 1 < n:
            L[k + 1:, k] = (L[k + 1:, k] + s * x[k + 1:]) / c
            x[k + 1:] = c * x[k + 1:] - s * L[k + 1:, k]
    return L


class GramState:
    """
    Regularized design matrix with accumulated regression targets.

    Holds Σ = λI + Σᵢ φᵢφᵢᵀ, its lower Cholesky factor, the target matrix
    Σᵢ φᵢψ̃ᵢᵀ, the running sum of squared target norms and the sample count.
    Mutating methods act in place and return ``self``.

    Args:
        dim: Feature dimension d.
        lam: Ridge regularizer λ > 0.
        target_dim: Target dimension d′.
    """
    def __init__(self, dim: int, lam: float, target_dim: int = 1):
        if not isinstance(dim, (int, np.integer)) or dim < 1:
            raise ParameterError(f"Invalid dim '{dim}', must be a positive integer")
        if not isinstance(target_dim, (int, np.integer)) or target_dim < 1:
            raise ParameterError(f"Invalid target_dim '{target_dim}', must be a positive integer")
        if not np.isfinite(lam) or lam <= 0:
            raise ParameterError(f"Invalid lambda '{lam}', must be positive")
        self.dim = int(dim)
        self.target_dim = int(target_dim)
        self.lam = float(lam)
        self.sigma = self.lam * np.eye(self.dim)
        self.chol = np.sqrt(self.lam) * np.eye(self.dim)
        self.target = np.zeros((self.dim, self.target_dim))
        self.target_sq = 0.0
        self.count = 0

    def __repr__(self):
        return f"GramState(dim={self.dim}, target_dim={self.target_dim}, lam={self.lam}, count={self.count})"

    def copy(self) -> 'GramState':
        other = GramState.__new__(GramState)
        other.dim = self.dim
        other.target_dim = self.target_dim
        other.lam = self.lam
        other.sigma = self.sigma.copy()
        other.chol = self.chol.copy()
        other.target = self.target.copy()
        other.target_sq = self.target_sq
        other.count = self.count
        return other

    @property
    def raw(self) -> np.ndarray:
        """Unregularized Gram Σᵢ φᵢφᵢᵀ."""
        return self.sigma - self.lam * np.eye(self.dim)

    def _check(self, phi, psi_tilde):
        phi = np.asarray(phi, dtype=np.float64).reshape(-1)
        psi_tilde = np.asarray(psi_tilde, dtype=np.float64).reshape(-1)
        if phi.shape[0] != self.dim:
            raise ParameterError(f"Invalid feature length '{phi.shape[0]}', must be {self.dim}")
        if psi_tilde.shape[0] != self.target_dim:
            raise ParameterError(f"Invalid target length '{psi_tilde.shape[0]}', must be {self.target_dim}")
        return phi, psi_tilde

    def absorb(self, phi, psi_tilde) -> 'GramState':
        """
        Absorb one sample: Σ += φφᵀ, target += φψ̃ᵀ, count += 1.
        """
        phi, psi_tilde = self._check(phi, psi_tilde)
        self.sigma += np.outer(phi, phi)
        self.target += np.outer(phi, psi_tilde)
        self.target_sq += float(psi_tilde @ psi_tilde)
        self.count += 1
        if self.dim <= REFACTOR_MAX_DIM:
            self.chol = cholesky(self.sigma, lower=True)
        else:
            self.chol = _chol_rank_one_update(self.chol, phi)
        return self

    def absorb_batch(self, phis, psi_tildes) -> 'GramState':
        """
        Absorb a batch of samples with one refactorization.

        Args:
            phis: (n, d) features.
            psi_tildes: (n, d′) targets.
        """
        phis = np.atleast_2d(np.asarray(phis, dtype=np.float64))
        psi_tildes = np.atleast_2d(np.asarray(psi_tildes, dtype=np.float64))
        if phis.shape[0] == 0:
            return self
        if phis.shape[1] != self.dim or psi_tildes.shape[1] != self.target_dim or phis.shape[0] != psi_tildes.shape[0]:
            raise ParameterError(
                f"Invalid batch shapes {phis.shape}, {psi_tildes.shape}, must be (n, {self.dim}) and (n, {self.target_dim})"
            )
        self.sigma += phis.T @ phis
        # BLAS products are not bitwise symmetric
        self.sigma = 0.5 * (self.sigma + self.sigma.T)
        self.target += phis.T @ psi_tildes
        self.target_sq += float(np.sum(psi_tildes ** 2))
        self.count += phis.shape[0]
        self.chol = cholesky(self.sigma, lower=True)
        return self

    def ridge_solve(self) -> np.ndarray:
        """
        Ridge estimate Σ⁻¹·target as a d×d′ matrix.
        """
        return cho_solve((self.chol, True), self.target)

    def inv_norm(self, x) -> float:
        """
        ‖x‖_{Σ⁻¹} via one triangular solve.
        """
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.dim:
            raise ParameterError(f"Invalid vector length '{x.shape[0]}', must be {self.dim}")
        z = solve_triangular(self.chol, x, lower=True)
        return float(np.sqrt(z @ z))

    def inv_norms(self, X) -> np.ndarray:
        """
        Row-wise ‖xᵢ‖_{Σ⁻¹} for a (n, d) matrix.
        """
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        Z = solve_triangular(self.chol, X.T, lower=True)
        return np.sqrt(np.sum(Z * Z, axis=0))

    def logdet(self) -> float:
        """log det Σ."""
        return float(2.0 * np.sum(np.log(np.diag(self.chol))))

    def sqrt_norm_sq(self, X) -> float:
        """
        ‖Σ^{1/2} X‖_F² = tr(XᵀΣX) for a d×k matrix X.
        """
        X = np.asarray(X, dtype=np.float64)
        Y = self.chol.T @ X
        return float(np.sum(Y * Y))

    def state_dict(self) -> Dict[str, Any]:
        return {
            'dim': self.dim,
            'target_dim': self.target_dim,
            'lam': self.lam,
            'sigma': self.sigma.tolist(),
            'target': self.target.tolist(),
            'target_sq': self.target_sq,
            'count': self.count,
        }

    @classmethod
    def from_state_dict(cls, state: Dict[str, Any]) -> 'GramState':
        g = cls(state['dim'], state['lam'], state['target_dim'])
        g.sigma = np.asarray(state['sigma'], dtype=np.float64)
        g.target = np.asarray(state['target'], dtype=np.float64)
        g.target_sq = float(state['target_sq'])
        g.count = int(state['count'])
        g.chol = cholesky(g.sigma, lower=True)
        return g


def gram_new(dim: int, lam: float, target_dim: int = 1) -> GramState:
    """
    Fresh GramState with Σ = λI and no data.
    """
    return GramState(dim, lam, target_dim)


def absorb(g: GramState, phi, psi_tilde) -> GramState:
    return g.absorb(phi, psi_tilde)


def ridge_solve(g: GramState) -> np.ndarray:
    return g.ridge_solve()


def inv_norm(g: GramState, x) -> float:
    return g.inv_norm(x)
