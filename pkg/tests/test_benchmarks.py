import os
import numpy as np
import pytest

from matrixrl.cli.config_io import load_config
from matrixrl.pipelines.experiment import run_experiment

CONFIGS = os.path.join(os.path.dirname(__file__), '..', 'configs')


def _final_means(result):
    return {name: s.final_regret_mean for name, s in result.summary.items()}


@pytest.fixture(scope='module')
def headline():
    return run_experiment(load_config(os.path.join(CONFIGS, 'headline.toml')))


@pytest.mark.benchmark
def test_regret_separation(headline):
    means = _final_means(headline)
    # hard requirement is the ordering; 0.8 is the pilot target
    assert means['oracle'] <= means['shared'] <= means['independent']
    assert means['shared'] <= 0.8 * means['independent']


@pytest.mark.benchmark
def test_regret_sublinear(headline):
    for algorithm in ['shared', 'independent', 'oracle']:
        curves = np.array([t.cumulative for t in headline.traces if t.algorithm == algorithm])
        mean = curves.mean(axis=0)
        assert mean[1999] / 2000 <= 0.5 * mean[99] / 100
