import numpy as np
import pytest

from matrixrl.envs.family import InstanceConfig, make_instance
from matrixrl.envs.features import FeatureMaps, indicator_features
from matrixrl.pipelines.experiment import ExperimentConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_instance_config():
    return InstanceConfig(n_states=5, n_actions=2, d=6, d_prime=5, r=2, P=3, H=3, seed=0)


@pytest.fixture
def small_family(small_instance_config):
    return make_instance(small_instance_config)


@pytest.fixture
def small_experiment_config(small_instance_config):
    return ExperimentConfig(
        instance=small_instance_config,
        N=3,
        algorithms=['shared', 'independent', 'oracle'],
        seeds=[0],
    )


@pytest.fixture
def one_hot_features():
    """Tabular features on 6 states and 2 actions: φ(s, a) = e_{s·2+a}."""
    n_states, n_actions = 6, 2
    return indicator_features(np.eye(n_states * n_actions), n_states, n_actions)


@pytest.fixture
def write_config(tmp_path):
    """Write a flat TOML config from keyword arguments and return its path."""
    def _write(name='config.toml', **values):
        lines = []
        for key, value in values.items():
            if isinstance(value, bool):
                lines.append(f'{key} = {str(value).lower()}')
            elif isinstance(value, str):
                lines.append(f'{key} = "{value}"')
            elif isinstance(value, list):
                items = ', '.join(f'"{v}"' if isinstance(v, str) else str(v) for v in value)
                lines.append(f'{key} = [{items}]')
            else:
                lines.append(f'{key} = {value}')
        path = tmp_path / name
        path.write_text('\n'.join(lines) + '\n')
        return str(path)
    return _write
