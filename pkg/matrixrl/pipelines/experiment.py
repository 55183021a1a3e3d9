"""
Regret experiments: Shared-MatrixRL against independent and oracle baselines.
"""
from typing import *
from dataclasses import dataclass, field, fields, asdict, replace
from concurrent.futures import ProcessPoolExecutor
import numpy as np
from tqdm import tqdm
from easydict import EasyDict as edict

from ..errors import ParameterError
from ..utils import logger, substream, to_jsonable
from ..config import get_num_workers
from ..envs.family import InstanceConfig, TaskFamily, make_instance
from ..envs.dynamics import TransitionSampler, transition_matrix, rollout
from ..envs.planning import exact_values, greedy_policy, policy_values
from ..envs.serialization import family_to_dict
from ..agents.schedules import ConfidenceSchedule, MODES, SHARED_CONSTANTS
from ..agents.bonuses import BONUS_FORMS, is_optimistic
from ..agents.single import MatrixRLAgent, IndependentMatrixRL
from ..agents.shared import SharedMatrixRLAgent, BONUS_BASES
from ..agents.allocation import ALLOCATION_METHODS
from ..agents.estimation import check_joint_membership
from ..modules.lemmas import martingale_envelope, potential_envelope
from .audits import bellman_audit, value_residuals

ALGORITHMS = ['shared', 'independent', 'oracle']
REGRET_SLACK = 1e-9
MARTINGALE_DELTA = 0.1
MARTINGALE_PASS_FRACTION = 0.9

# cross-seed reduction of audit counters; anything else is summed
COUNTER_REDUCERS = {
    'bellman_max_ratio': np.max,
    'martingale_envelope': np.max,
    'martingale_sum': lambda vs: np.max(np.abs(vs)),
}


@dataclass
class ExperimentConfig:
    """
    Everything a regret run needs, instance included.

    ``seeds`` replaces ``instance.seed``: each seed generates its own family.
    """
    instance: InstanceConfig = field(default_factory=InstanceConfig)
    N: int = 100
    delta: float = 0.1
    lam: float = 1.0
    bonus_scale: float = 1.0
    bonus_form: str = 'regularity'
    mode: str = 'assumption3'
    allocation_method: str = 'equal'
    algorithms: List[str] = field(default_factory=lambda: list(ALGORITHMS))
    seeds: List[int] = field(default_factory=lambda: [0])
    greedy_sweeps: int = 20
    max_sweeps: int = 100
    tol: float = 1e-8
    paired: bool = False
    audit_coverage: bool = True
    audit_optimism: bool = True
    audit_bellman: bool = True
    audit_martingale: bool = True
    audit_runs: int = 200
    trials: int = 1000
    radius_multiplier: float = 1.0
    shared_constants: str = 'statement'
    shared_bonus_basis: str = 'joint'
    verbose: bool = False

    def validate(self) -> 'ExperimentConfig':
        self.instance.validate()
        if not isinstance(self.N, (int, np.integer)) or isinstance(self.N, bool) or self.N < 1:
            raise ParameterError(f"Invalid N '{self.N}', must be a positive integer")
        if not 0.0 < self.delta < 1.0:
            raise ParameterError(f"Invalid delta '{self.delta}', must be in (0, 1)")
        if self.lam <= 0:
            raise ParameterError(f"Invalid lam '{self.lam}', must be positive")
        if self.bonus_scale < 0:
            raise ParameterError(f"Invalid bonus_scale '{self.bonus_scale}', must be nonnegative")
        if self.bonus_form not in BONUS_FORMS:
            raise ParameterError(f"Invalid bonus_form '{self.bonus_form}', must be one of {BONUS_FORMS}")
        if self.mode not in MODES:
            raise ParameterError(f"Invalid mode '{self.mode}', must be one of {MODES}")
        if self.allocation_method not in ALLOCATION_METHODS:
            raise ParameterError(
                f"Invalid allocation_method '{self.allocation_method}', must be one of {ALLOCATION_METHODS}"
            )
        if self.shared_constants not in SHARED_CONSTANTS:
            raise ParameterError(
                f"Invalid shared_constants '{self.shared_constants}', must be one of {SHARED_CONSTANTS}"
            )
        if self.shared_bonus_basis not in BONUS_BASES:
            raise ParameterError(
                f"Invalid shared_bonus_basis '{self.shared_bonus_basis}', must be one of {BONUS_BASES}"
            )
        if len(self.algorithms) == 0 or any(a not in ALGORITHMS for a in self.algorithms):
            raise ParameterError(f"Invalid algorithms {self.algorithms}, must be a nonempty subset of {ALGORITHMS}")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ParameterError(f"Invalid algorithms {self.algorithms}, duplicates")
        if len(self.seeds) == 0:
            raise ParameterError("Invalid seeds, at least one seed is required")
        if any(not isinstance(s, (int, np.integer)) or isinstance(s, bool) or s < 0 for s in self.seeds):
            raise ParameterError(f"Invalid seeds {self.seeds}, must be nonnegative integers")
        if self.radius_multiplier <= 0:
            raise ParameterError(f"Invalid radius_multiplier '{self.radius_multiplier}', must be positive")
        if self.trials < 1:
            raise ParameterError(f"Invalid trials '{self.trials}', must be >= 1")
        if self.audit_runs < 1:
            raise ParameterError(f"Invalid audit_runs '{self.audit_runs}', must be >= 1")
        return self

    @classmethod
    def from_flat(cls, flat: Dict[str, Any]) -> 'ExperimentConfig':
        """
        Build from one flat key/value mapping; instance keys and experiment
        keys share the namespace and unknown keys are rejected.
        """
        instance_keys = {f.name for f in fields(InstanceConfig)}
        experiment_keys = {f.name for f in fields(cls)} - {'instance'}
        unknown = sorted(set(flat) - instance_keys - experiment_keys)
        if unknown:
            raise ParameterError(f"Invalid config keys {unknown}")
        instance = InstanceConfig(**{k: v for k, v in flat.items() if k in instance_keys})
        kwargs = {k: v for k, v in flat.items() if k in experiment_keys}
        for key in ['algorithms', 'seeds']:
            if key in kwargs:
                kwargs[key] = list(kwargs[key])
        config = cls(instance=instance, **kwargs)
        if 'seeds' not in flat:
            config.seeds = [instance.seed]
        return config

    def to_flat(self) -> Dict[str, Any]:
        flat = self.instance.to_dict()
        flat.update({k: v for k, v in asdict(self).items() if k != 'instance'})
        return to_jsonable(flat)


@dataclass
class RegretTrace:
    """Instantaneous and cumulative shared regret of one (algorithm, seed)."""
    algorithm: str
    seed: int
    instant: np.ndarray

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.instant)

    @property
    def N(self) -> int:
        return self.instant.shape[0]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'algorithm': self.algorithm,
            'seed': int(self.seed),
            'instant': self.instant.tolist(),
            'cumulative': self.cumulative.tolist(),
        }


def make_schedule(features, family: TaskFamily, config: ExperimentConfig, mode: Optional[str] = None) -> ConfidenceSchedule:
    return ConfidenceSchedule.from_features(
        features, family.S_bound, family.H, config.lam, config.delta, mode or config.mode,
    )


def build_agent(algorithm: str, family: TaskFamily, config: ExperimentConfig):
    """
    Instantiate one of ALGORITHMS on ``family``.

    Returns:
        (agent, true_cores) where true_cores are the cores the agent's
        confidence sets should contain: M⁽ᵖ⁾ for ``shared`` and
        ``independent``, A★⁽ᵖ⁾ for ``oracle`` (which learns on B★ᵀφ).
    """
    common = dict(
        bonus_scale=config.bonus_scale,
        bonus_form=config.bonus_form,
        radius_multiplier=config.radius_multiplier,
    )
    if algorithm == 'shared':
        # the shared confidence set is Frobenius only
        schedule = make_schedule(family.features[0], family, config, mode='assumption3')
        agent = SharedMatrixRLAgent(
            family.features, family.rewards, family.H, family.r, schedule,
            constants=config.shared_constants,
            allocation_method=config.allocation_method,
            greedy_sweeps=config.greedy_sweeps,
            tol=config.tol,
            max_sweeps=config.max_sweeps,
            bonus_basis=config.shared_bonus_basis,
            **common,
        )
        return agent, [core.M for core in family.cores]
    if algorithm == 'independent':
        agents = [
            MatrixRLAgent(f, r, family.H, make_schedule(f, family, config), **common)
            for f, r in zip(family.features, family.rewards)
        ]
        return IndependentMatrixRL(agents), [core.M for core in family.cores]
    if algorithm == 'oracle':
        projected = [f.project(family.B_star) for f in family.features]
        agents = [
            MatrixRLAgent(f, r, family.H, make_schedule(f, family, config), **common)
            for f, r in zip(projected, family.rewards)
        ]
        return IndependentMatrixRL(agents, name='oracle'), list(family.A_star)
    raise ParameterError(f"Invalid algorithm '{algorithm}', must be one of {ALGORITHMS}")


def env_stream(seed: int, algorithm: str, p: int, n: int, paired: bool = False) -> np.random.Generator:
    """
    Environment stream of (task p, episode n).

    Unpaired runs label the stream with the algorithm so every algorithm
    samples its own trajectories from the same distribution.
    """
    if paired:
        return substream(seed, 'env', p, n)
    return substream(seed, 'env', algorithm, p, n)


def _new_counters() -> Dict[str, float]:
    return {
        'episodes': 0,
        'coverage_checks': 0,
        'coverage_violations': 0,
        'optimism_checks': 0,
        'optimism_violations': 0,
        'bellman_checks': 0,
        'bellman_violations': 0,
        'bellman_max_ratio': 0.0,
        'regret_violations': 0,
        'martingale_sum': 0.0,
    }


def run_algorithm(algorithm: str, family: TaskFamily, config: ExperimentConfig, cache: Optional[edict] = None) -> edict:
    """
    One algorithm on one family for N episodes with the configured audits.

    Returns:
        EasyDict with the RegretTrace, audit counters and failure list.
    """
    cache = cache or _family_cache(family)
    H, P, N = family.H, family.P, config.N
    agent, true_cores = build_agent(algorithm, family, config)
    optimistic = is_optimistic(config.bonus_form, config.bonus_scale)
    # the projected basis drops the joint guarantee
    joint_guarantee = algorithm != 'shared' or config.shared_bonus_basis == 'joint'
    optimistic = optimistic and joint_guarantee
    seed = family.seed
    n_actions = family.n_actions

    counters = _new_counters()
    instant = np.zeros(N)
    for n in tqdm(range(N), desc=f'[MATRIXRL] seed {seed} {algorithm}', disable=not config.verbose):
        starts = [family.start_state(p, n) for p in range(P)]
        plans = agent.plan_round(starts)
        policies = [greedy_policy(plan.Q) for plan in plans]
        values = [policy_values(cache.kernels[p], family.rewards[p], policies[p], H) for p in range(P)]
        v_star = sum(cache.optimal[p].V[0][starts[p]] for p in range(P))
        v_pi = sum(values[p][0][starts[p]] for p in range(P))
        instant[n] = v_star - v_pi
        if instant[n] < -REGRET_SLACK:
            counters['regret_violations'] += 1

        episodes = [
            rollout(
                cache.samplers[p], family.rewards[p], policies[p], starts[p],
                env_stream(seed, algorithm, p, n, config.paired), task=p, episode=n,
            )
            for p in range(P)
        ]

        # audits see the state the plans were built from
        if algorithm == 'shared':
            joint = check_joint_membership(agent.estimate, true_cores, agent.grams, agent.gamma)
            if config.audit_coverage:
                counters['coverage_checks'] += 1
                counters['coverage_violations'] += int(not joint.member)
            if config.audit_optimism and optimistic and joint.member:
                planned = sum(plans[p].V[0][starts[p]] for p in range(P))
                counters['optimism_checks'] += 1
                counters['optimism_violations'] += int(planned < v_star - REGRET_SLACK)
            if config.audit_bellman and joint_guarantee and joint.member:
                report = bellman_audit(
                    plans, cache.kernels, family.rewards, episodes, agent.gamma, family.features[0].C_psi, H,
                )
                counters['bellman_checks'] += report.steps
                counters['bellman_violations'] += report.violations
                counters['bellman_max_ratio'] = max(counters['bellman_max_ratio'], report.max_ratio)
        else:
            for p, single in enumerate(agent.agents):
                member = single.membership(true_cores[p]).member
                if config.audit_coverage:
                    counters['coverage_checks'] += 1
                    counters['coverage_violations'] += int(not member)
                if config.audit_optimism and optimistic and member:
                    counters['optimism_checks'] += 1
                    counters['optimism_violations'] += int(
                        plans[p].V[0][starts[p]] < cache.optimal[p].V[0][starts[p]] - REGRET_SLACK
                    )

        if config.audit_martingale:
            for p in range(P):
                residuals = value_residuals(plans[p], values[p], cache.kernels[p], episodes[p], n_actions)
                counters['martingale_sum'] += float(np.sum(residuals))

        agent.update_round(episodes)
        counters['episodes'] += 1

    # T counts the steps of all P tasks: the residuals of every task are summed
    envelope = martingale_envelope(N * H * P, 4.0 * H, MARTINGALE_DELTA)
    counters['martingale_envelope'] = envelope
    counters['martingale_pass'] = bool(abs(counters['martingale_sum']) <= envelope)

    failures = []
    if counters['regret_violations']:
        failures.append(f"{counters['regret_violations']} episode(s) with negative regret")
    if counters['optimism_violations']:
        failures.append(f"{counters['optimism_violations']} optimism violation(s)")
    if counters['bellman_violations']:
        failures.append(f"{counters['bellman_violations']} Bellman-error violation(s)")
    return edict({
        'trace': RegretTrace(algorithm, seed, instant),
        'audit': counters,
        'failures': failures,
    })


def _family_cache(family: TaskFamily) -> edict:
    return edict({
        'kernels': [transition_matrix(c, f) for c, f in zip(family.cores, family.features)],
        'samplers': [TransitionSampler(c, f) for c, f in zip(family.cores, family.features)],
        'optimal': [
            exact_values(c, f, r, family.H)
            for c, f, r in zip(family.cores, family.features, family.rewards)
        ],
    })


def run_seed(config: ExperimentConfig, seed: int) -> Dict[str, Any]:
    """
    Build the seed's family and run every selected algorithm on it.

    Failures are recorded in the returned status instead of raised.

    Returns:
        Plain dict (picklable across workers) with seed, status, diagnostics,
        traces and audits.
    """
    result = {'seed': int(seed), 'status': 'ok', 'diagnostics': [], 'traces': {}, 'audits': {}}
    try:
        family = make_instance(replace(config.instance, seed=int(seed)))
        cache = _family_cache(family)
    except Exception as e:
        logger.error(f"Seed {seed}: instance generation failed: {e}")
        result['status'] = 'error'
        result['diagnostics'].append(f"instance: {e}")
        return result

    for algorithm in config.algorithms:
        try:
            out = run_algorithm(algorithm, family, config, cache)
        except Exception as e:
            logger.error(f"Seed {seed}: {algorithm} failed: {e}")
            result['status'] = 'error'
            result['diagnostics'].append(f"{algorithm}: {e}")
            continue
        result['traces'][algorithm] = out.trace
        result['audits'][algorithm] = dict(out.audit)
        for failure in out.failures:
            logger.warning(f"Seed {seed}: {algorithm}: {failure}")
            result['diagnostics'].append(f"{algorithm}: {failure}")
        if out.failures and result['status'] == 'ok':
            result['status'] = 'audit_failed'
    return result


def summarize(results: List[Dict[str, Any]], config: ExperimentConfig) -> edict:
    """
    Cross-seed reduction of traces and audit counters.
    """
    summary = edict()
    for algorithm in config.algorithms:
        traces = [r['traces'][algorithm] for r in results if algorithm in r['traces']]
        audits = [r['audits'][algorithm] for r in results if algorithm in r['audits']]
        if not traces:
            continue
        final = np.array([t.cumulative[-1] for t in traces])
        counters = {}
        for key in sorted({k for a in audits for k in a} - {'martingale_pass'}):
            values = np.array([a[key] for a in audits if key in a], dtype=np.float64)
            counters[key] = float(COUNTER_REDUCERS.get(key, np.sum)(values))
        checks = counters['coverage_checks']
        summary[algorithm] = edict({
            'seeds': len(traces),
            'final_regret_mean': float(final.mean()),
            'final_regret_min': float(final.min()),
            'final_regret_max': float(final.max()),
            'coverage_rate': counters['coverage_violations'] / checks if checks else 0.0,
            'martingale_pass_fraction': float(np.mean([a['martingale_pass'] for a in audits])),
            'counters': counters,
        })
    return summary


def audit_properties(summary: edict, config: ExperimentConfig) -> Dict[str, bool]:
    """Pass/fail per audited property, over all algorithms."""
    algos = list(summary.values())
    properties = {
        'regret_nonnegative': all(s.counters['regret_violations'] == 0 for s in algos),
    }
    if config.audit_optimism:
        properties['optimism'] = all(s.counters['optimism_violations'] == 0 for s in algos)
    if config.audit_bellman and 'shared' in summary:
        properties['bellman'] = summary.shared.counters['bellman_violations'] == 0
    if config.audit_martingale:
        properties['martingale'] = all(s.martingale_pass_fraction >= MARTINGALE_PASS_FRACTION for s in algos)
    return properties


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> edict:
    """
    Run every (seed, algorithm) pair of ``config``.

    Seeds run in parallel worker processes capped by MATRIXRL_THREADS; each
    seed's algorithms run sequentially on isolated state.

    Returns:
        EasyDict with traces (list of RegretTrace), per-seed results, summary,
        audit report and the snapshot of the first seed's instance.
    """
    config.validate()
    seeds = [int(s) for s in config.seeds]
    workers = get_num_workers() if workers is None else workers
    workers = max(1, min(workers, len(seeds)))
    if workers == 1:
        results = [run_seed(config, seed) for seed in tqdm(seeds, desc='[MATRIXRL] seeds', disable=not config.verbose)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(tqdm(
                executor.map(run_seed, [config] * len(seeds), seeds),
                total=len(seeds), desc='[MATRIXRL] seeds', disable=not config.verbose,
            ))

    traces = [r['traces'][a] for r in results for a in config.algorithms if a in r['traces']]
    summary = summarize(results, config)
    instance = config.instance
    reference = {
        'martingale_envelope': martingale_envelope(
            config.N * instance.H * instance.P, 4.0 * instance.H, MARTINGALE_DELTA,
        ),
        'potential_envelope': potential_envelope(config.N, instance.H, instance.d, config.lam, 1.0),
    }
    audits = {
        'per_seed': [
            {'seed': r['seed'], 'status': r['status'], 'diagnostics': r['diagnostics'], 'algorithms': r['audits']}
            for r in results
        ],
        'summary': {a: {k: v for k, v in s.items()} for a, s in summary.items()},
        'properties': audit_properties(summary, config),
        'reference': reference,
    }
    try:
        snapshot = family_to_dict(make_instance(replace(instance, seed=seeds[0])))
    except Exception as e:
        logger.error(f"Instance snapshot failed: {e}")
        snapshot = {'error': str(e)}
    return edict({
        'config': config.to_flat(),
        'traces': traces,
        'results': results,
        'summary': summary,
        'audits': to_jsonable(audits),
        'instance': snapshot,
    })
