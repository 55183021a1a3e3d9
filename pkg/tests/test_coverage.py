import os
from dataclasses import replace
import pytest

from matrixrl.errors import ParameterError
from matrixrl.cli.config_io import load_config
from matrixrl.pipelines.coverage import coverage_audit, dominance_audit

CONFIGS = os.path.join(os.path.dirname(__file__), '..', 'configs')


class TestCoverageAudit:
    def test_inflated_radius_never_violates(self, small_experiment_config):
        config = replace(small_experiment_config, N=2)
        report = coverage_audit(config, 100, radius_multiplier=10.0)
        assert report.runs == 100
        assert report.radius_multiplier == 10.0
        for name in ['single', 'shared']:
            assert report[name].pairs == 200
            assert report[name].violations == 0
            assert report[name].rate == 0.0
        assert report.passed

    def test_too_few_runs(self, small_experiment_config):
        with pytest.raises(ParameterError):
            coverage_audit(small_experiment_config, 99)

    @pytest.mark.benchmark
    @pytest.mark.parametrize('delta', [0.1, 0.5])
    def test_theory_radii_cover(self, delta):
        config = replace(load_config(os.path.join(CONFIGS, 'audit.toml')), delta=delta)
        report = coverage_audit(config, 200, radius_multiplier=1.0)
        assert report.runs == 200
        for name in ['single', 'shared']:
            assert report[name].rate <= delta + 0.05
        assert report.passed


class TestDominanceAudit:
    def test_theory_bonus_dominates(self, small_experiment_config):
        config = replace(small_experiment_config, N=3, bonus_form='exact')
        report = dominance_audit(config, n_samples=8)
        assert report.guaranteed
        assert report.single.holds
        assert report.shared_tasks.holds
        assert report.shared_tasks.members == 8 * 3
        assert 0.0 <= report.joint.fraction <= 1.0
        assert report.passed

    def test_practical_scale_not_guaranteed(self, small_experiment_config):
        report = dominance_audit(replace(small_experiment_config, N=1, bonus_scale=0.01), n_samples=4)
        assert not report.guaranteed
        assert report.passed

    def test_invalid_samples(self, small_experiment_config):
        with pytest.raises(ParameterError):
            dominance_audit(small_experiment_config, n_samples=0)
