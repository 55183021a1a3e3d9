import itertools
import numpy as np
import pytest
from numpy.testing import assert_allclose

from matrixrl.envs.family import TransitionCore
from matrixrl.envs.features import indicator_features
from matrixrl.envs.dynamics import TransitionSampler, rollout, transition_matrix
from matrixrl.envs.planning import (
    act,
    backward_induction,
    evaluate_policy,
    exact_values,
    greedy_policy,
    policy_values,
)


def _random_task(rng, n_states, n_actions, d=None):
    d = d or n_states * n_actions
    phi = rng.dirichlet(np.ones(d), size=n_states * n_actions) if d != n_states * n_actions \
        else np.eye(d)
    features = indicator_features(phi, n_states, n_actions)
    M = rng.dirichlet(np.ones(n_states), size=d)
    rewards = rng.uniform(size=(n_states, n_actions))
    return TransitionCore(M), features, rewards


class TestExactValues:
    def test_matches_policy_enumeration(self, rng):
        n_states, n_actions, H = 5, 2, 3
        core, features, rewards = _random_task(rng, n_states, n_actions)
        kernel = transition_matrix(core, features)
        best = np.full(n_states, -np.inf)
        for actions in itertools.product(range(n_actions), repeat=n_states * H):
            policy = np.array(actions).reshape(H, n_states)
            best = np.maximum(best, policy_values(kernel, rewards, policy, H)[0])
        assert_allclose(exact_values(core, features, rewards, H).V[0], best, atol=1e-12)

    def test_greedy_policy_is_optimal(self, rng):
        core, features, rewards = _random_task(rng, 4, 3, d=5)
        opt = exact_values(core, features, rewards, 4)
        policy = greedy_policy(opt.Q)
        assert policy.shape == (4, 4)
        assert_allclose(evaluate_policy(core, features, rewards, policy, 4), opt.V[0], atol=1e-12)

    def test_reward_free_task(self, rng):
        core, features, _ = _random_task(rng, 4, 2)
        rewards = np.zeros((4, 2))
        policy = np.zeros((3, 4), dtype=int)
        assert_allclose(evaluate_policy(core, features, rewards, policy, 3), 0.0)

    def test_shapes_and_terminal_row(self, rng):
        core, features, rewards = _random_task(rng, 3, 2)
        out = exact_values(core, features, rewards, 5)
        assert out.Q.shape == (5, 3, 2)
        assert out.V.shape == (6, 3)
        assert_allclose(out.V[5], 0.0)


class TestMonteCarlo:
    def test_random_policy_value(self, rng):
        core, features, rewards = _random_task(rng, 4, 2, d=3)
        H = 4
        policy = rng.integers(0, 2, size=(H, 4))
        exact = evaluate_policy(core, features, rewards, policy, H)
        sampler = TransitionSampler(core, features)
        sim = np.random.default_rng(11)
        n = 20_000
        for s1 in range(4):
            returns = np.array([
                sum(step[3] for step in rollout(sampler, rewards, policy, s1, sim).steps)
                for _ in range(n)
            ])
            se = returns.std() / np.sqrt(n)
            assert abs(returns.mean() - exact[s1]) <= 4.0 * se + 1e-12


class TestBackwardInduction:
    def test_bonus_table_and_clip(self, rng):
        core, features, rewards = _random_task(rng, 3, 2)
        kernel = transition_matrix(core, features)
        out = backward_induction(kernel, rewards, 4, bonus=np.full(6, 10.0))
        assert out.V.max() <= 4.0
        assert out.V.min() >= 0.0
        unclipped = backward_induction(kernel, rewards, 4, bonus=np.full(6, 10.0), clip=False)
        assert unclipped.V[0].min() > 4.0

    def test_callable_bonus_sees_next_values(self, rng):
        core, features, rewards = _random_task(rng, 3, 2)
        kernel = transition_matrix(core, features)
        seen = []

        def bonus(h, V_next):
            seen.append((h, V_next.copy()))
            return np.zeros(6)

        out = backward_induction(kernel, rewards, 3, bonus=bonus)
        assert [h for h, _ in seen] == [2, 1, 0]
        assert_allclose(seen[0][1], 0.0)
        assert_allclose(seen[1][1], out.V[2])

    def test_act_breaks_ties_low(self):
        Q_h = np.array([[1.0, 1.0, 0.5], [0.0, 2.0, 2.0]])
        assert act(Q_h, 0) == 0
        assert act(Q_h, 1) == 1
