import os
from dataclasses import replace
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from matrixrl.errors import ParameterError
from matrixrl.envs.family import make_instance
from matrixrl.pipelines import experiment
from matrixrl.pipelines.experiment import (
    ExperimentConfig,
    RegretTrace,
    build_agent,
    env_stream,
    run_algorithm,
    run_experiment,
    run_seed,
    summarize,
    MARTINGALE_DELTA,
)
from matrixrl.modules.lemmas import martingale_envelope
from matrixrl.cli.config_io import load_config

CONFIGS = os.path.join(os.path.dirname(__file__), '..', 'configs')


class TestExperimentConfig:
    def test_from_flat(self):
        config = ExperimentConfig.from_flat({'n_states': 5, 'd': 6, 'N': 4, 'seed': 3, 'algorithms': ('shared',)})
        assert config.instance.n_states == 5
        assert config.N == 4
        assert config.seeds == [3]
        assert config.algorithms == ['shared']

    def test_unknown_key(self):
        with pytest.raises(ParameterError):
            ExperimentConfig.from_flat({'episodes': 4})

    def test_flat_round_trip(self, small_experiment_config):
        flat = small_experiment_config.to_flat()
        back = ExperimentConfig.from_flat(flat)
        assert back == small_experiment_config

    @pytest.mark.parametrize('overrides', [
        {'N': 0},
        {'delta': 1.0},
        {'lam': 0.0},
        {'bonus_form': 'huge'},
        {'algorithms': []},
        {'algorithms': ['shared', 'shared']},
        {'algorithms': ['ucb']},
        {'seeds': []},
        {'seeds': [-1]},
        {'trials': 0},
        {'allocation_method': 'random'},
        {'shared_bonus_basis': 'subspace'},
    ])
    def test_invalid(self, small_experiment_config, overrides):
        with pytest.raises(ParameterError):
            replace(small_experiment_config, **overrides).validate()


class TestRegretTrace:
    def test_single_episode(self):
        trace = RegretTrace('shared', 0, np.array([0.25]))
        assert trace.N == 1
        assert_array_equal(trace.cumulative, trace.instant)
        assert trace.to_dict()['cumulative'] == [0.25]


class TestAgents:
    def test_oracle_learns_projected_core(self, small_family, small_experiment_config):
        agent, truth = build_agent('oracle', small_family, small_experiment_config)
        assert agent.name == 'oracle'
        assert agent.agents[0].features.d == small_family.r
        assert truth[0].shape == (small_family.r, small_family.features[0].d_prime)

    def test_unknown_algorithm(self, small_family, small_experiment_config):
        with pytest.raises(ParameterError):
            build_agent('ucb', small_family, small_experiment_config)

    def test_env_streams(self):
        a = env_stream(0, 'shared', 1, 2).random(3)
        b = env_stream(0, 'independent', 1, 2).random(3)
        assert not np.allclose(a, b)
        c = env_stream(0, 'shared', 1, 2, paired=True).random(3)
        d = env_stream(0, 'independent', 1, 2, paired=True).random(3)
        assert_array_equal(c, d)


class TestRunAlgorithm:
    @pytest.mark.parametrize('algorithm', ['shared', 'independent', 'oracle'])
    def test_regret_and_audits(self, small_family, small_experiment_config, algorithm):
        out = run_algorithm(algorithm, small_family, small_experiment_config)
        trace = out.trace
        assert trace.N == small_experiment_config.N
        assert np.all(trace.instant >= -1e-9)
        assert np.all(np.diff(trace.cumulative) >= -1e-9)
        assert out.audit['episodes'] == small_experiment_config.N
        assert out.audit['optimism_violations'] == 0
        assert out.audit['regret_violations'] == 0
        assert out.failures == []

    def test_practical_scale_skips_optimism(self, small_family, small_experiment_config):
        config = replace(small_experiment_config, bonus_scale=0.01)
        out = run_algorithm('independent', small_family, config)
        assert out.audit['optimism_checks'] == 0

    def test_projected_basis_skips_joint_audits(self, small_family, small_experiment_config):
        config = replace(small_experiment_config, bonus_form='exact', shared_bonus_basis='projected')
        out = run_algorithm('shared', small_family, config)
        assert out.audit['coverage_checks'] == config.N
        assert out.audit['optimism_checks'] == 0
        assert out.audit['bellman_checks'] == 0

    def test_martingale_envelope_counts_every_task(self, small_family, small_experiment_config):
        out = run_algorithm('independent', small_family, small_experiment_config)
        steps = small_experiment_config.N * small_family.H * small_family.P
        assert out.audit['martingale_envelope'] == martingale_envelope(steps, 4.0 * small_family.H, MARTINGALE_DELTA)


class TestRunExperiment:
    def test_traces_and_statuses(self, small_experiment_config):
        out = run_experiment(small_experiment_config, workers=1)
        assert len(out.traces) == 3
        assert [r['status'] for r in out.results] == ['ok']
        assert out.audits['properties']['regret_nonnegative']
        assert out.audits['properties']['optimism']
        assert out.instance['schema'] == 'matrixrl.instance/1'
        assert set(out.summary) == {'shared', 'independent', 'oracle'}

    def test_deterministic(self, small_experiment_config):
        config = replace(small_experiment_config, algorithms=['shared'], seeds=[0, 1])
        a = run_experiment(config, workers=1)
        b = run_experiment(config, workers=1)
        for x, y in zip(a.traces, b.traces):
            assert_array_equal(x.instant, y.instant)

    def test_workers_match_serial(self, small_experiment_config):
        config = replace(small_experiment_config, algorithms=['independent'], seeds=[0, 1], N=2)
        serial = run_experiment(config, workers=1)
        parallel = run_experiment(config, workers=2)
        for x, y in zip(serial.traces, parallel.traces):
            assert x.seed == y.seed
            assert_allclose(x.instant, y.instant, rtol=0, atol=0)

    def test_single_episode(self, small_experiment_config):
        out = run_experiment(replace(small_experiment_config, N=1), workers=1)
        for trace in out.traces:
            assert_array_equal(trace.cumulative, trace.instant)

    def test_failed_seed_is_recorded(self, small_experiment_config, monkeypatch):
        original = experiment.make_instance

        def flaky(config):
            if config.seed == 1:
                raise RuntimeError('boom')
            return original(config)

        monkeypatch.setattr(experiment, 'make_instance', flaky)
        out = run_experiment(replace(small_experiment_config, seeds=[0, 1], N=1), workers=1)
        statuses = {r['seed']: r['status'] for r in out.results}
        assert statuses == {0: 'ok', 1: 'error'}
        assert len(out.traces) == 3

    def test_run_seed_is_plain(self, small_experiment_config):
        result = run_seed(replace(small_experiment_config, N=1, algorithms=['oracle']), 0)
        assert isinstance(result, dict)
        assert set(result['traces']) == {'oracle'}


class TestSummarize:
    def test_counter_reduction(self, small_experiment_config):
        config = replace(small_experiment_config, algorithms=['oracle'])
        results = []
        for seed, (violations, ratio, total) in enumerate([(1, 0.5, -3.0), (2, 0.25, 2.0)]):
            audit = dict(experiment._new_counters(), coverage_checks=4, coverage_violations=violations,
                         bellman_max_ratio=ratio, martingale_sum=total, martingale_envelope=10.0,
                         martingale_pass=True)
            trace = RegretTrace('oracle', seed, np.array([1.0, float(seed)]))
            results.append({'traces': {'oracle': trace}, 'audits': {'oracle': audit}})
        summary = summarize(results, config)
        oracle = summary.oracle
        assert oracle.seeds == 2
        assert oracle.final_regret_mean == 1.5
        assert oracle.counters['coverage_checks'] == 8
        assert oracle.counters['coverage_violations'] == 3
        assert oracle.counters['bellman_max_ratio'] == 0.5
        assert oracle.counters['martingale_sum'] == 3.0
        assert oracle.counters['martingale_envelope'] == 10.0
        assert 'martingale_pass' not in oracle.counters
        assert oracle.coverage_rate == 3 / 8
        assert oracle.martingale_pass_fraction == 1.0


class TestHeadlinePreset:
    @pytest.fixture(scope='class')
    def preset(self):
        config = load_config(os.path.join(CONFIGS, 'headline.toml'))
        return config, make_instance(replace(config.instance, seed=config.seeds[0]))

    def test_practical_bonus_leaves_room_below_the_clip(self, preset):
        config, family = preset
        starts = [family.start_state(p, 0) for p in range(family.P)]
        for algorithm in ['shared', 'independent', 'oracle']:
            agent, _ = build_agent(algorithm, family, config)
            for plan in agent.plan_round(starts):
                assert plan.V[0].max() < family.H

    def test_theory_bonus_saturates(self, preset):
        config, family = preset
        agent, _ = build_agent('independent', family, replace(config, bonus_scale=1.0))
        for plan in agent.plan_round([family.start_state(p, 0) for p in range(family.P)]):
            assert_allclose(plan.V[0], family.H)
