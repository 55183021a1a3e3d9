import numpy as np
import pytest
from numpy.testing import assert_allclose

from matrixrl.errors import EnvironmentStepError
from matrixrl.envs.family import TransitionCore
from matrixrl.envs.features import indicator_features
from matrixrl.envs.dynamics import TransitionSampler, rollout, sample_step, transition_matrix
from matrixrl.utils import substream


def _uniform_task(n_states=4):
    features = indicator_features(np.eye(n_states), n_states, 1)
    return TransitionCore(np.full((n_states, n_states), 1.0 / n_states)), features


def _cycle_task(n_states=6, n_actions=2):
    # action 0 moves to s+1, action 1 stays
    features = indicator_features(np.eye(n_states * n_actions), n_states, n_actions)
    M = np.zeros((n_states * n_actions, n_states))
    for s in range(n_states):
        M[s * n_actions + 0, (s + 1) % n_states] = 1.0
        M[s * n_actions + 1, s] = 1.0
    return TransitionCore(M), features


class TestSampleStep:
    def test_uniform_frequencies(self):
        core, features = _uniform_task()
        rng = np.random.default_rng(0)
        counts = np.zeros(4)
        for _ in range(100_000):
            counts[sample_step(core, features, 2, 0, rng)] += 1
        assert_allclose(counts / counts.sum(), 0.25, atol=0.01)

    def test_sampler_matches_kernel(self):
        core, features = _uniform_task()
        sampler = TransitionSampler(core, features)
        assert_allclose(sampler.kernel, transition_matrix(core, features))
        rng = np.random.default_rng(1)
        draws = np.array([sampler.step(0, 0, rng) for _ in range(40_000)])
        assert_allclose(np.bincount(draws, minlength=4) / draws.size, 0.25, atol=0.01)

    def test_deterministic_row(self):
        core, features = _cycle_task()
        rng = np.random.default_rng(2)
        assert sample_step(core, features, 5, 0, rng) == 0
        assert sample_step(core, features, 3, 1, rng) == 3

    def test_invalid_row(self):
        features = indicator_features(np.eye(2), 2, 1)
        core = TransitionCore(np.array([[0.6, 0.5], [0.5, 0.5]]))
        with pytest.raises(EnvironmentStepError):
            sample_step(core, features, 0, 0, np.random.default_rng(0))
        with pytest.raises(EnvironmentStepError):
            TransitionSampler(core, features)

    def test_tiny_negative_entries_are_clamped(self):
        features = indicator_features(np.eye(2), 2, 1)
        core = TransitionCore(np.array([[1.0 + 1e-8, -1e-8], [0.5, 0.5]]))
        rng = np.random.default_rng(3)
        assert all(sample_step(core, features, 0, 0, rng) == 0 for _ in range(100))

    def test_same_stream_same_draws(self):
        core, features = _uniform_task()
        a = [sample_step(core, features, 0, 0, substream(7, 'env', 0, n)) for n in range(20)]
        b = [sample_step(core, features, 0, 0, substream(7, 'env', 0, n)) for n in range(20)]
        assert a == b


class TestRollout:
    def test_cycle(self):
        core, features = _cycle_task()
        sampler = TransitionSampler(core, features)
        rewards = np.arange(12, dtype=float).reshape(6, 2) / 12.0
        policy = np.zeros((4, 6), dtype=int)
        record = rollout(sampler, rewards, policy, 4, np.random.default_rng(0), task=2, episode=9)
        assert record.task == 2 and record.episode == 9
        assert len(record) == 4
        assert record.states == [4, 5, 0, 1]
        assert record.next_states == [5, 0, 1, 2]
        assert record.actions == [0, 0, 0, 0]
        assert [step[3] for step in record.steps] == pytest.approx([rewards[s, 0] for s in [4, 5, 0, 1]])
