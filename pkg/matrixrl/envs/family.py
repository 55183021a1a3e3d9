from typing import *
from dataclasses import dataclass, field, asdict
import numpy as np
from easydict import EasyDict as edict

from ..errors import ParameterError, GenerationError
from ..utils import logger, substream
from .features import FeatureMaps, indicator_features

START_MODES = ['fixed', 'uniform']
MAX_GENERATION_ATTEMPTS = 10


@dataclass
class InstanceConfig:
    """
    Shape and seed of a synthetic task family.

    ``phi_concentration`` is the Dirichlet concentration of the feature rows
    on the d-simplex and ``anchor_concentration`` that of the r anchor
    distributions over next states.
    """
    n_states: int = 10
    n_actions: int = 4
    d: int = 24
    d_prime: int = 10
    r: int = 2
    P: int = 16
    H: int = 5
    seed: int = 0
    phi_concentration: float = 0.3
    anchor_concentration: float = 0.5
    start_mode: str = 'fixed'
    start_state: int = 0

    def validate(self) -> 'InstanceConfig':
        for name in ['n_states', 'n_actions', 'd', 'd_prime', 'r', 'P', 'H']:
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
                raise ParameterError(f"Invalid {name} '{value}', must be a positive integer")
        if self.r > self.d:
            raise ParameterError(f"Invalid r '{self.r}', must be <= d ({self.d})")
        if self.r > self.d_prime:
            raise ParameterError(f"Invalid r '{self.r}', must be <= d_prime ({self.d_prime})")
        if self.d_prime != self.n_states:
            raise ParameterError(
                f"Invalid d_prime '{self.d_prime}', must equal n_states ({self.n_states}) for indicator psi"
            )
        if self.phi_concentration <= 0 or self.anchor_concentration <= 0:
            raise ParameterError("Invalid concentration, must be positive")
        if self.start_mode not in START_MODES:
            raise ParameterError(f"Invalid start_mode '{self.start_mode}', must be one of {START_MODES}")
        if not 0 <= self.start_state < self.n_states:
            raise ParameterError(f"Invalid start_state '{self.start_state}', must be in [0, {self.n_states})")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ParameterError(f"Invalid seed '{self.seed}', must be a nonnegative integer")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class TransitionCore:
    """
    Core matrix M of P(s′|s,a) = φ(s,a)ᵀ M ψ(s′) with its column-norm cap S.
    """
    def __init__(self, M: np.ndarray, S_bound: Optional[float] = None):
        self.M = np.asarray(M, dtype=np.float64)
        col_norms = np.linalg.norm(self.M, axis=0)
        measured = float(np.max(col_norms)) if col_norms.size else 0.0
        self.S_bound = measured if S_bound is None else float(S_bound)
        if self.S_bound < measured - 1e-12:
            raise ParameterError(f"Invalid S_bound '{S_bound}', must be >= max column norm {measured}")

    def __repr__(self):
        return f"TransitionCore(shape={self.M.shape}, S_bound={self.S_bound:.6g})"

    def validate(self, features: FeatureMaps) -> edict:
        """
        Stochasticity report of φᵀMΨᵀ over every (s, a).
        """
        T = features.phi @ self.M @ features.psi.T
        sum_err = float(np.max(np.abs(T.sum(axis=1) - 1.0)))
        min_entry = float(np.min(T))
        return edict({
            'max_row_sum_error': sum_err,
            'min_entry': min_entry,
            'valid': bool(sum_err <= 1e-9 and min_entry >= -1e-12),
        })


@dataclass
class EpisodeRecord:
    """One task's trajectory: H tuples (state, action, next_state, reward)."""
    task: int
    episode: int
    start_state: int
    steps: List[Tuple[int, int, int, float]] = field(default_factory=list)

    @property
    def states(self) -> List[int]:
        return [step[0] for step in self.steps]

    @property
    def actions(self) -> List[int]:
        return [step[1] for step in self.steps]

    @property
    def next_states(self) -> List[int]:
        return [step[2] for step in self.steps]

    def __len__(self):
        return len(self.steps)


class TaskFamily:
    """
    P tasks whose cores factor through one orthonormal d×r matrix B★.

    Args:
        B_star: d×r matrix with orthonormal columns.
        A_star: P matrices r×d′.
        cores: P TransitionCore with M⁽ᵖ⁾ = B★A★⁽ᵖ⁾.
        rewards: P reward tables |S|×|A| in [0, 1].
        features: One FeatureMaps shared by all tasks, or a list with one per task.
        H: Horizon.
        config: Generating InstanceConfig (echoed in snapshots).
    """
    def __init__(
        self,
        B_star: np.ndarray,
        A_star: List[np.ndarray],
        cores: List[TransitionCore],
        rewards: List[np.ndarray],
        features: Union[FeatureMaps, List[FeatureMaps]],
        H: int,
        config: Optional[InstanceConfig] = None,
    ):
        self.P = len(cores)
        if len(A_star) != self.P or len(rewards) != self.P:
            raise ParameterError("Invalid family, A_star, cores and rewards must have one entry per task")
        self.B_star = np.asarray(B_star, dtype=np.float64)
        self.A_star = [np.asarray(A, dtype=np.float64) for A in A_star]
        self.cores = cores
        self.rewards = [np.asarray(r, dtype=np.float64) for r in rewards]
        if isinstance(features, FeatureMaps):
            features = [features] * self.P
        if len(features) != self.P:
            raise ParameterError("Invalid family, one FeatureMaps per task required")
        self.features = list(features)
        self.H = int(H)
        self.config = config

    @property
    def shared_features(self) -> bool:
        return all(f is self.features[0] for f in self.features)

    @property
    def n_states(self) -> int:
        return self.features[0].n_states

    @property
    def n_actions(self) -> int:
        return self.features[0].n_actions

    @property
    def r(self) -> int:
        return self.B_star.shape[1]

    @property
    def S_bound(self) -> float:
        return max(core.S_bound for core in self.cores)

    @property
    def seed(self) -> int:
        return self.config.seed if self.config is not None else 0

    def start_state(self, p: int, episode: int) -> int:
        """
        Start state of task p in episode ``episode``; drawn from the
        ('start', p, episode) substream in uniform mode.
        """
        if self.config is None or self.config.start_mode == 'fixed':
            return 0 if self.config is None else int(self.config.start_state)
        rng = substream(self.seed, 'start', p, episode)
        return int(rng.integers(self.n_states))

    def check(self) -> edict:
        """Invariant report of the family."""
        r = self.r
        ortho = float(np.max(np.abs(self.B_star.T @ self.B_star - np.eye(r))))
        fact = max(float(np.linalg.norm(c.M - self.B_star @ A)) for c, A in zip(self.cores, self.A_star))
        reports = [c.validate(f) for c, f in zip(self.cores, self.features)]
        stacked = np.hstack([c.M for c in self.cores])
        sv = np.linalg.svd(stacked, compute_uv=False)
        tail = float(sv[r]) if sv.shape[0] > r else 0.0
        return edict({
            'orthonormality_error': ortho,
            'factorization_error': fact,
            'max_row_sum_error': max(rep.max_row_sum_error for rep in reports),
            'min_entry': min(rep.min_entry for rep in reports),
            'singular_values': sv.tolist(),
            'rank_ok': bool(tail <= 1e-8 * sv[0]) if sv[0] > 0 else True,
            'valid': bool(ortho <= 1e-10 and fact <= 1e-10 and all(rep.valid for rep in reports)),
        })

    def __str__(self):
        lines = []
        lines.append(self.__class__.__name__)
        lines.append(f'  - Tasks: {self.P}')
        lines.append(f'  - States x actions: {self.n_states} x {self.n_actions}')
        lines.append(f'  - Features: d={self.features[0].d}, d\'={self.features[0].d_prime}, r={self.r}')
        lines.append(f'  - Horizon: {self.H}')
        lines.append(f'  - S bound: {self.S_bound:.6g}')
        return '\n'.join(lines)


def _generate(config: InstanceConfig, attempt: int) -> TaskFamily:
    S, A, d, r, P = config.n_states, config.n_actions, config.d, config.r, config.P
    rng = substream(config.seed, 'instance', attempt)

    # φ rows on the d-simplex, ψ the indicator basis
    phi = rng.dirichlet(np.full(d, config.phi_concentration), size=S * A)
    features = indicator_features(phi, S, A, L_phi=1.0)

    # shared latent mixing: d anchors -> r latent distributions
    W = rng.dirichlet(np.ones(r), size=d)
    Ms, rewards = [], []
    for _ in range(P):
        G = rng.dirichlet(np.full(S, config.anchor_concentration), size=r)
        Ms.append(W @ G)
        rewards.append(rng.uniform(0.0, 1.0, size=(S, A)))

    stacked = np.hstack(Ms)
    U, sv, _ = np.linalg.svd(stacked, full_matrices=False)
    if sv.shape[0] > r and sv[r] > 1e-8 * sv[0]:
        raise GenerationError(f"Stacked cores have numerical rank above {r} (sigma_r+1={sv[r]:.3e})")
    B_star = U[:, :r]
    A_star = [B_star.T @ M for M in Ms]
    S_bound = max(float(np.max(np.linalg.norm(M, axis=0))) for M in Ms)
    cores = [TransitionCore(M, S_bound) for M in Ms]

    family = TaskFamily(B_star, A_star, cores, rewards, features, config.H, config)
    report = family.check()
    if not report.valid:
        raise GenerationError(
            f"Generated family violates invariants (row sum error {report.max_row_sum_error:.3e}, "
            f"factorization error {report.factorization_error:.3e})"
        )
    return family


def make_instance(config: Union[InstanceConfig, Dict[str, Any]]) -> TaskFamily:
    """
    Generate a task family with exactly stochastic rank-r cores.

    Anchor-mixture construction: φ rows are Dirichlet points on the d-simplex,
    a d×r row-stochastic mixing matrix W is shared by all tasks and task p has
    r anchor distributions G⁽ᵖ⁾ over next states, so M⁽ᵖ⁾ = W G⁽ᵖ⁾ has rank ≤ r
    and φᵀM⁽ᵖ⁾ is a distribution. B★ is the top-r left singular basis of the
    stacked cores and A★⁽ᵖ⁾ = B★ᵀM⁽ᵖ⁾.

    Args:
        config: InstanceConfig or a dict of its fields.

    Returns:
        A validated TaskFamily.
    """
    if isinstance(config, dict):
        try:
            config = InstanceConfig(**config)
        except TypeError as e:
            raise ParameterError(f"Invalid instance config: {e}")
    config.validate()
    last_error = None
    for attempt in range(MAX_GENERATION_ATTEMPTS):
        try:
            return _generate(config, attempt)
        except GenerationError as e:
            logger.warning(f"Instance generation attempt {attempt} failed: {e}")
            last_error = e
    raise GenerationError(f"Instance generation failed after {MAX_GENERATION_ATTEMPTS} attempts: {last_error}")
