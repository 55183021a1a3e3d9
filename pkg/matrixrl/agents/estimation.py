"""
Joint factorized ridge regression over P tasks.

Minimizes

    F(B, A⁽¹⁾..A⁽ᴾ⁾) = Σ_p λ‖A⁽ᵖ⁾‖_F² + Σ_p Σ_i ‖ψ̃ᵢ⁽ᵖ⁾ − (BA⁽ᵖ⁾)ᵀφᵢ⁽ᵖ⁾‖²

over B with orthonormal columns and ‖A⁽ᵖ⁾‖_F ≤ cap by alternating
minimization. Only the sufficient statistics kept by GramState are needed.
"""
from typing import *
import numpy as np
from scipy.linalg import solve, solve_triangular
from easydict import EasyDict as edict

from ..errors import ParameterError
from ..modules.gram import GramState


class SharedEstimate:
    """
    Shared factor B (d×r, orthonormal columns), task factors A⁽ᵖ⁾ (r×d′) and
    the objective after every accepted sweep.
    """
    def __init__(
        self,
        B: np.ndarray,
        A: List[np.ndarray],
        objective_trace: Optional[List[float]] = None,
        converged: bool = True,
        sweeps: int = 0,
        per_task_gram: Optional[List[GramState]] = None,
    ):
        self.B = np.asarray(B, dtype=np.float64)
        self.A = [np.asarray(a, dtype=np.float64) for a in A]
        self.objective_trace = list(objective_trace or [])
        self.converged = bool(converged)
        self.sweeps = int(sweeps)
        self.per_task_gram = per_task_gram

    @property
    def P(self) -> int:
        return len(self.A)

    @property
    def r(self) -> int:
        return self.B.shape[1]

    def product(self, p: int) -> np.ndarray:
        return self.B @ self.A[p]

    def products(self) -> List[np.ndarray]:
        return [self.B @ a for a in self.A]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema': 'matrixrl.estimate/1',
            'B': self.B.tolist(),
            'A': [a.tolist() for a in self.A],
            'objective_trace': [float(v) for v in self.objective_trace],
            'converged': self.converged,
            'sweeps': self.sweeps,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SharedEstimate':
        return cls(
            np.asarray(data['B']), [np.asarray(a) for a in data['A']],
            data['objective_trace'], data['converged'], data['sweeps'],
        )

    def __repr__(self):
        return f"SharedEstimate(P={self.P}, r={self.r}, sweeps={self.sweeps}, converged={self.converged})"


def joint_objective(B: np.ndarray, A: List[np.ndarray], grams: List[GramState], lam: float) -> float:
    """
    F(B, A) evaluated from the Gram sufficient statistics.
    """
    total = 0.0
    for g, a in zip(grams, A):
        M = B @ a
        total += lam * float(np.sum(a * a)) + g.target_sq \
            - 2.0 * float(np.sum(M * g.target)) + float(np.sum(M * (g.raw @ M)))
    return total


def _ball_ridge(K: np.ndarray, rhs: np.ndarray, lam: float, cap: float) -> np.ndarray:
    """
    argmin_A tr(AᵀKA) − 2tr(Aᵀrhs) + λ‖A‖² subject to ‖A‖_F ≤ cap.

    The minimizer is (K + (λ+μ)I)⁻¹rhs for the smallest μ ≥ 0 meeting the cap;
    its norm decreases in μ, so μ is bracketed and bisected.
    """
    eye = np.eye(K.shape[0])

    def at(mu):
        return solve(K + (lam + mu) * eye, rhs, assume_a='pos')

    A = at(0.0)
    if np.linalg.norm(A) <= cap:
        return A
    lo, hi = 0.0, max(lam, 1.0)
    while np.linalg.norm(at(hi)) > cap:
        lo, hi = hi, 2.0 * hi
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if np.linalg.norm(at(mid)) > cap:
            lo = mid
        else:
            hi = mid
    return at(hi)


def _solve_A(B: np.ndarray, grams: List[GramState], lam: float, cap: Optional[float]) -> List[np.ndarray]:
    A = []
    for g in grams:
        K = B.T @ g.raw @ B
        K = 0.5 * (K + K.T)
        rhs = B.T @ g.target
        if cap is None or not np.isfinite(cap):
            A.append(solve(K + lam * np.eye(K.shape[0]), rhs, assume_a='pos'))
        else:
            A.append(_ball_ridge(K, rhs, lam, cap))
    return A


def _solve_B(A: List[np.ndarray], grams: List[GramState], d: int, r: int) -> np.ndarray:
    # Σ_p (A Aᵀ ⊗ G) vec(B) = vec(Σ_p T Aᵀ), column-major vec
    K = np.zeros((d * r, d * r))
    c = np.zeros(d * r)
    for g, a in zip(grams, A):
        K += np.kron(a @ a.T, g.raw)
        c += (g.target @ a.T).reshape(-1, order='F')
    vec_B = np.linalg.lstsq(K, c, rcond=None)[0]
    return vec_B.reshape(d, r, order='F')


def spectral_init(grams: List[GramState], r: int) -> np.ndarray:
    """
    Top-r left singular vectors of the stacked per-task ridge estimates;
    the first r canonical columns when no task has data.
    """
    d = grams[0].dim
    stacked = np.hstack([g.ridge_solve() for g in grams])
    if not np.any(stacked):
        return np.eye(d)[:, :r]
    U, _, _ = np.linalg.svd(stacked, full_matrices=False)
    if U.shape[1] >= r:
        return U[:, :r]
    Q, _ = np.linalg.qr(np.hstack([U, np.eye(d)]))
    return Q[:, :r]


def joint_factorized_ridge(
    grams: List[GramState],
    lam: float,
    r: int,
    init: Optional[Union[SharedEstimate, Tuple[np.ndarray, List[np.ndarray]]]] = None,
    tol: float = 1e-8,
    max_sweeps: int = 100,
    cap: Optional[float] = None,
) -> SharedEstimate:
    """
    Alternating minimization of the joint factorized ridge objective.

    Each sweep solves for B with the A⁽ᵖ⁾ fixed (a linear system over the dr
    entries of B), re-orthonormalizes B by thin QR with A⁽ᵖ⁾ ← R·A⁽ᵖ⁾, then
    solves every A⁽ᵖ⁾ as a ridge problem in the projected features Bᵀφ
    (constrained to the Frobenius ball of radius ``cap`` when given). A sweep
    is accepted only if it does not increase the objective; the loop stops on
    a relative decrease below ``tol``, on a rejected sweep or after
    ``max_sweeps``.

    Args:
        grams: One GramState per task, all with the same dimensions.
        lam: Regularizer on the task factors.
        r: Rank of the shared factor.
        init: Warm start (previous SharedEstimate or (B, A) pair); spectral
            initialization when None.
        tol: Relative-decrease stopping threshold.
        max_sweeps: Sweep budget; hitting it flags the estimate as not converged.
        cap: Frobenius cap on each A⁽ᵖ⁾ (√d′·S in the agent).

    Returns:
        SharedEstimate with the objective of every accepted iterate.
    """
    if len(grams) == 0:
        raise ParameterError("Invalid data, at least one task is required")
    d, d_prime = grams[0].dim, grams[0].target_dim
    if any(g.dim != d or g.target_dim != d_prime for g in grams):
        raise ParameterError("Invalid data, all tasks must share dimensions")
    if not 1 <= r <= d:
        raise ParameterError(f"Invalid r '{r}', must be in [1, {d}]")
    if lam <= 0:
        raise ParameterError(f"Invalid lambda '{lam}', must be positive")

    P = len(grams)
    if sum(g.count for g in grams) == 0:
        B = np.eye(d)[:, :r]
        A = [np.zeros((r, d_prime)) for _ in range(P)]
        return SharedEstimate(B, A, [joint_objective(B, A, grams, lam)], True, 0, grams)

    if init is None:
        B = spectral_init(grams, r)
    else:
        B = init.B if isinstance(init, SharedEstimate) else np.asarray(init[0])
        B, _ = np.linalg.qr(B)
    A = _solve_A(B, grams, lam, cap)
    objective = joint_objective(B, A, grams, lam)
    trace = [objective]

    converged = False
    sweeps = 0
    for _ in range(max_sweeps):
        B_raw = _solve_B(A, grams, d, r)
        Q, _ = np.linalg.qr(B_raw)
        A_new = _solve_A(Q, grams, lam, cap)
        objective_new = joint_objective(Q, A_new, grams, lam)
        if objective_new > objective:
            converged = True
            break
        decrease = (objective - objective_new) / max(abs(objective), 1e-300)
        B, A, objective = Q, A_new, objective_new
        trace.append(objective)
        sweeps += 1
        if decrease < tol:
            converged = True
            break
    return SharedEstimate(B, A, trace, converged, sweeps, grams)


def check_joint_membership(est: SharedEstimate, truth, grams: List[GramState], gamma: float) -> edict:
    """
    Σ_p ‖(Σ⁽ᵖ⁾)^{1/2}(M★⁽ᵖ⁾ − B̂Â⁽ᵖ⁾)‖_F² against γ.

    Args:
        truth: TaskFamily or a list of true cores (matrices).
    """
    cores = [c.M for c in truth.cores] if hasattr(truth, 'cores') else [np.asarray(M) for M in truth]
    per_task = [g.sqrt_norm_sq(M - est.product(p)) for p, (g, M) in enumerate(zip(grams, cores))]
    lhs = float(np.sum(per_task))
    return edict({'lhs': lhs, 'gamma': float(gamma), 'per_task': per_task, 'member': bool(lhs <= gamma)})


def sample_ellipsoid_member(gram: GramState, center: np.ndarray, radius: float, rng: np.random.Generator) -> np.ndarray:
    """
    M with ‖Σ^{1/2}(M − center)‖_F = radius, direction uniform.
    """
    Z = rng.standard_normal(center.shape)
    Z *= radius / max(np.linalg.norm(Z), 1e-300)
    # Lᵀ Δ = Z gives ‖LᵀΔ‖_F = ‖Z‖_F
    return center + solve_triangular(gram.chol.T, Z, lower=False)


def sample_joint_members(
    est: SharedEstimate,
    grams: List[GramState],
    gamma: float,
    n_samples: int,
    rng: np.random.Generator,
) -> List[edict]:
    """
    Random members of the joint set Σ_p ‖(Σ⁽ᵖ⁾)^{1/2}(M⁽ᵖ⁾ − B̂Â⁽ᵖ⁾)‖_F² ≤ γ.

    The squared budget is split across tasks by a flat Dirichlet draw and
    scaled by a uniform fraction.
    """
    members = []
    P = est.P
    for _ in range(n_samples):
        weights = rng.dirichlet(np.ones(P)) * rng.uniform()
        cores, errors = [], []
        for p in range(P):
            radius = float(np.sqrt(gamma * weights[p]))
            cores.append(sample_ellipsoid_member(grams[p], est.product(p), radius, rng))
            errors.append(radius)
        members.append(edict({'cores': cores, 'errors': errors}))
    return members
