"""
Monte-Carlo audits of the single-task and joint confidence sets.
"""
from typing import *
from dataclasses import replace
import numpy as np
from tqdm import tqdm
from easydict import EasyDict as edict

from ..errors import ParameterError
from ..utils import substream
from ..envs.family import TaskFamily, make_instance
from ..envs.dynamics import TransitionSampler, rollout
from ..envs.planning import greedy_policy
from ..agents.single import MatrixRLAgent
from ..agents.shared import SharedMatrixRLAgent
from ..agents.bonuses import is_optimistic
from ..agents.estimation import check_joint_membership, sample_ellipsoid_member, sample_joint_members
from .experiment import ExperimentConfig, make_schedule
from .audits import audit_bonus_dominance

MIN_RUNS = 100
BINOMIAL_SLACK = 0.05


def _rate(violations: int, total: int) -> float:
    return violations / total if total else 0.0


def _agents(family: TaskFamily, config: ExperimentConfig, multiplier: float) -> Tuple[MatrixRLAgent, SharedMatrixRLAgent]:
    """Fresh single-task agent on task 0 and shared agent on all tasks."""
    single = MatrixRLAgent(
        family.features[0], family.rewards[0], family.H,
        make_schedule(family.features[0], family, config),
        bonus_scale=config.bonus_scale, bonus_form=config.bonus_form, radius_multiplier=multiplier,
    )
    shared = SharedMatrixRLAgent(
        family.features, family.rewards, family.H, family.r,
        make_schedule(family.features[0], family, config, mode='assumption3'),
        constants=config.shared_constants, bonus_scale=config.bonus_scale,
        bonus_form=config.bonus_form, allocation_method=config.allocation_method,
        greedy_sweeps=config.greedy_sweeps, tol=config.tol, max_sweeps=config.max_sweeps,
        radius_multiplier=multiplier,
    )
    return single, shared


def _advance(single, shared, family: TaskFamily, samplers, n: int, *labels) -> None:
    """Play episode n with both agents on streams labeled by ``labels``."""
    seed = family.seed
    plan = single.plan()
    single.update(rollout(
        samplers[0], family.rewards[0], greedy_policy(plan.Q), family.start_state(0, n),
        substream(seed, *labels, 'single', 0, n), task=0, episode=n,
    ))
    starts = [family.start_state(p, n) for p in range(family.P)]
    plans = shared.plan_round(starts)
    shared.update_round([
        rollout(
            samplers[p], family.rewards[p], greedy_policy(plans[p].Q), starts[p],
            substream(seed, *labels, 'shared', p, n), task=p, episode=n,
        )
        for p in range(family.P)
    ])


def coverage_audit(
    config: ExperimentConfig,
    n_runs: int,
    radius_multiplier: Optional[float] = None,
    verbose: Optional[bool] = None,
) -> edict:
    """
    Empirical violation frequencies of single-task and joint set membership.

    Every run plays N episodes on the instance of ``config.seeds[0]`` with
    fresh environment streams, checking membership of the true cores before
    each update. ``pair_rate`` counts violating (run, episode) pairs and
    ``run_rate`` counts runs with at least one violation; the audit passes
    when the run rate is at most δ + 0.05.

    Args:
        config: Experiment configuration (instance, N, δ, λ, bonus settings).
        n_runs: Number of Monte-Carlo runs, at least 100.
        radius_multiplier: Inflation of every radius; defaults to the config's.

    Returns:
        EasyDict with ``single`` and ``shared`` reports and ``passed``.
    """
    if n_runs < MIN_RUNS:
        raise ParameterError(f"Invalid n_runs '{n_runs}', must be >= {MIN_RUNS}")
    config.validate()
    multiplier = config.radius_multiplier if radius_multiplier is None else float(radius_multiplier)
    verbose = config.verbose if verbose is None else verbose
    family = make_instance(replace(config.instance, seed=int(config.seeds[0])))
    samplers = [TransitionSampler(c, f) for c, f in zip(family.cores, family.features)]
    true_cores = [core.M for core in family.cores]

    counts = {name: {'pairs': 0, 'violations': 0, 'runs_violated': 0} for name in ['single', 'shared']}
    for run in tqdm(range(n_runs), desc='[MATRIXRL] coverage', disable=not verbose):
        single, shared = _agents(family, config, multiplier)
        violated = {'single': False, 'shared': False}
        for n in range(config.N):
            members = {
                'single': single.membership(true_cores[0]).member,
                'shared': check_joint_membership(shared.estimate, true_cores, shared.grams, shared.gamma).member,
            }
            for name, member in members.items():
                counts[name]['pairs'] += 1
                if not member:
                    counts[name]['violations'] += 1
                    violated[name] = True
            _advance(single, shared, family, samplers, n, 'coverage', run)
        for name in violated:
            counts[name]['runs_violated'] += int(violated[name])

    report = edict({'delta': config.delta, 'runs': n_runs, 'radius_multiplier': multiplier})
    for name, c in counts.items():
        run_rate = _rate(c['runs_violated'], n_runs)
        report[name] = edict({
            'pairs': c['pairs'],
            'violations': c['violations'],
            'pair_rate': _rate(c['violations'], c['pairs']),
            'run_rate': run_rate,
            'rate': run_rate,
            'passed': bool(run_rate <= config.delta + BINOMIAL_SLACK),
        })
    report.passed = bool(report.single.passed and report.shared.passed)
    return report


def dominance_audit(config: ExperimentConfig, n_samples: int = 32) -> edict:
    """
    Sampled check that bonus planning dominates models inside the sets.

    After N episodes, members of the single-task Frobenius ball (a subset of
    the (2,1) set) and of each shared per-task τ⁽ᵖ⁾-ball are drawn and
    checked stage by stage with audit_bonus_dominance. Joint-set members
    from sample_joint_members are reported but not asserted, since equal
    allocation does not cover the whole joint set.

    Returns:
        EasyDict with ``single``, ``shared_tasks`` and ``joint`` reports,
        ``guaranteed`` (whether the bonus form and scale imply domination)
        and ``passed``.
    """
    if n_samples < 1:
        raise ParameterError(f"Invalid n_samples '{n_samples}', must be >= 1")
    config.validate()
    family = make_instance(replace(config.instance, seed=int(config.seeds[0])))
    samplers = [TransitionSampler(c, f) for c, f in zip(family.cores, family.features)]
    single, shared = _agents(family, config, config.radius_multiplier)
    for n in range(config.N):
        _advance(single, shared, family, samplers, n, 'dominance')

    rng = substream(family.seed, 'dominance', 'members')
    H = family.H
    f0 = family.features[0]
    radius = single.radius_multiplier * single.schedule.frobenius_radius(single.n)
    kernels = [
        f0.phi @ sample_ellipsoid_member(single.gram, single.m_tilde, radius * rng.uniform(), rng) @ f0.psi.T
        for _ in range(n_samples)
    ]
    single_report = audit_bonus_dominance(single.plan(), kernels, family.rewards[0], H)

    starts = [family.start_state(p, config.N) for p in range(family.P)]
    plans = shared.plan_round(starts)
    task_reports = []
    for p, plan in enumerate(plans):
        f = family.features[p]
        members = [
            f.phi @ sample_ellipsoid_member(shared.grams[p], shared.estimate.product(p), plan.tau * rng.uniform(), rng) @ f.psi.T
            for _ in range(n_samples)
        ]
        task_reports.append(audit_bonus_dominance(plan, members, family.rewards[p], H))
    joint_dominated = 0
    for member in sample_joint_members(shared.estimate, shared.grams, shared.gamma, n_samples, rng):
        ok = True
        for p, plan in enumerate(plans):
            f = family.features[p]
            ok &= audit_bonus_dominance(plan, [f.phi @ member.cores[p] @ f.psi.T], family.rewards[p], H).holds
        joint_dominated += int(ok)

    guaranteed = is_optimistic(config.bonus_form, config.bonus_scale)
    shared_holds = all(r.holds for r in task_reports)
    return edict({
        'single': single_report,
        'shared_tasks': edict({
            'members': sum(r.members for r in task_reports),
            'dominated': sum(r.dominated for r in task_reports),
            'holds': shared_holds,
        }),
        'joint': edict({
            'members': n_samples,
            'dominated': joint_dominated,
            'fraction': joint_dominated / n_samples,
        }),
        'guaranteed': guaranteed,
        'passed': bool((not guaranteed) or (single_report.holds and shared_holds)),
    })
