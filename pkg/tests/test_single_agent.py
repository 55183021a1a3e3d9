import numpy as np
import pytest
from numpy.testing import assert_allclose

from matrixrl.errors import ParameterError
from matrixrl.agents.schedules import ConfidenceSchedule
from matrixrl.agents.single import IndependentMatrixRL, MatrixRLAgent, act, plan_optimistic, update
from matrixrl.envs.family import EpisodeRecord, TransitionCore
from matrixrl.envs.dynamics import TransitionSampler, rollout, transition_matrix
from matrixrl.envs.planning import exact_values, greedy_policy
from matrixrl.pipelines.audits import l21_membership


def _cycle_core(n_states=6, n_actions=2):
    # action 0 moves to s+1, action 1 stays
    M = np.zeros((n_states * n_actions, n_states))
    for s in range(n_states):
        M[s * n_actions + 0, (s + 1) % n_states] = 1.0
        M[s * n_actions + 1, s] = 1.0
    return TransitionCore(M)


def _agent(features, rewards, H=3, **kwargs):
    mode = kwargs.pop('mode', 'assumption3')
    schedule = ConfidenceSchedule.from_features(features, S_bound=1.0, H=H, lam=1.0, delta=0.1, mode=mode)
    return MatrixRLAgent(features, rewards, H, schedule, **kwargs)


class TestSchedulesInAgent:
    def test_degenerate_formula(self):
        s = ConfidenceSchedule(delta=0.1, lam=1.0, S_bound=1.0, L_phi=0.0, L_psi=0.0,
                               K_psi_inv_norm=1.0, d=2, d_prime=2, H=1)
        assert s.R_sub == 0.0
        assert s.sqrt_beta(1) == pytest.approx(1.0)

    def test_dimension_mismatch(self, one_hot_features, small_family):
        schedule = ConfidenceSchedule.from_features(small_family.features[0], 1.0, 3, 1.0, 0.1)
        with pytest.raises(ParameterError):
            MatrixRLAgent(one_hot_features, np.zeros((6, 2)), 3, schedule)


class TestPlanning:
    def test_fresh_plan(self, one_hot_features):
        rewards = np.full((6, 2), 0.5)
        agent = _agent(one_hot_features, rewards)
        assert_allclose(agent.m_tilde, 0.0)
        plan = plan_optimistic(agent)
        assert plan.Q.shape == (3, 6, 2)
        assert plan.V.min() >= 0.0 and plan.V.max() <= 3.0
        assert plan.radius == pytest.approx(agent.schedule.set_radius(1))
        # last stage: Q = r + bonus ≥ r
        assert np.all(plan.Q[2] >= rewards)

    def test_zero_bonus_true_model_reproduces_exact_values(self, small_family):
        f = small_family.features[0]
        agent = _agent(f, small_family.rewards[0], H=small_family.H, bonus_scale=0.0)
        agent.m_tilde = small_family.cores[0].M.copy()
        plan = agent.plan()
        exact = exact_values(small_family.cores[0], f, small_family.rewards[0], small_family.H)
        assert_allclose(plan.Q, exact.Q, atol=1e-12)
        assert_allclose(plan.V, np.clip(exact.V, 0.0, small_family.H), atol=1e-12)

    def test_act(self, one_hot_features):
        agent = _agent(one_hot_features, np.zeros((6, 2)))
        Q_h = np.array([[0.0, 1.0]] * 6)
        assert act(agent, Q_h, 3) == 1
        rng = np.random.default_rng(5)
        Q = rng.standard_normal((6, 2))
        for s in range(6):
            assert act(agent, Q, s) == max(range(2), key=lambda a: (Q[s, a], -a))

    def test_single_action(self):
        from matrixrl.envs.features import indicator_features
        f = indicator_features(np.eye(3), 3, 1)
        agent = _agent(f, np.zeros((3, 1)), H=2)
        plan = agent.plan()
        assert act(agent, plan.Q[0], 2) == 0


class TestUpdate:
    def test_one_episode(self, one_hot_features):
        agent = _agent(one_hot_features, np.zeros((6, 2)))
        episode = EpisodeRecord(0, 0, 0, [(0, 0, 1, 0.0), (1, 0, 2, 0.0), (2, 1, 2, 0.0)])
        update(agent, episode)
        assert agent.n == 2
        assert agent.gram.count == 3
        # one observation per row: estimate n/(n+λ) = 1/2
        assert agent.m_tilde[0, 1] == pytest.approx(0.5)
        assert agent.m_tilde[2, 2] == pytest.approx(0.5)
        assert agent.m_tilde[5, 2] == pytest.approx(0.5)
        assert agent.m_tilde[1].sum() == pytest.approx(0.0)

    def test_incremental_equals_batch(self, small_family):
        f = small_family.features[0]
        agent = _agent(f, small_family.rewards[0])
        sampler = TransitionSampler(small_family.cores[0], f)
        rng = np.random.default_rng(9)
        phis, targets = [], []
        for n in range(20):
            policy = rng.integers(0, f.n_actions, size=(3, f.n_states))
            episode = rollout(sampler, small_family.rewards[0], policy, 0, rng)
            agent.update(episode)
            for s, a, s_next, _ in episode.steps:
                phis.append(f.phi_of(s, a))
                targets.append(f.psi_tilde[s_next])
        X, Y = np.array(phis), np.array(targets)
        batch = np.linalg.solve(X.T @ X + np.eye(f.d), X.T @ Y)
        assert_allclose(agent.m_tilde, batch, atol=1e-9)

    def test_empty_episode(self, one_hot_features):
        agent = _agent(one_hot_features, np.zeros((6, 2)))
        with pytest.raises(ParameterError):
            agent.update(EpisodeRecord(0, 0, 0, []))

    def test_consistency_on_deterministic_mdp(self, one_hot_features):
        f = one_hot_features
        core = _cycle_core()
        agent = _agent(f, np.zeros((6, 2)), H=3)
        sampler = TransitionSampler(core, f)
        rng = np.random.default_rng(21)
        for n in range(2000):
            policy = rng.integers(0, 2, size=(3, 6))
            agent.update(rollout(sampler, agent.rewards, policy, int(rng.integers(6)), rng))
        error = np.abs(f.phi @ agent.m_tilde @ f.psi.T - transition_matrix(core, f)).max()
        assert error < 0.05


class TestMembership:
    def test_truth_in_fresh_set(self, small_family):
        agent = _agent(small_family.features[0], small_family.rewards[0])
        out = agent.membership(small_family.cores[0].M)
        assert out.member
        assert out.distance == pytest.approx(np.linalg.norm(small_family.cores[0].M))

    def test_far_core_outside(self, small_family):
        agent = _agent(small_family.features[0], small_family.rewards[0])
        assert not agent.membership(1e4 * small_family.cores[0].M).member

    def test_l21_mode_matches_helper(self, small_family):
        agent = _agent(small_family.features[0], small_family.rewards[0], mode='assumption2')
        sampler = TransitionSampler(small_family.cores[0], small_family.features[0])
        rng = np.random.default_rng(4)
        for _ in range(5):
            plan = agent.plan()
            agent.update(rollout(sampler, agent.rewards, greedy_policy(plan.Q), 0, rng))
        M = small_family.cores[0].M
        a = agent.membership(M)
        b = l21_membership(agent.gram, agent.m_tilde, M, agent.radius)
        assert a.distance == pytest.approx(b.distance)
        assert a.member == b.member

    def test_optimism_under_membership(self, small_family):
        f = small_family.features[0]
        rewards = small_family.rewards[0]
        core = small_family.cores[0]
        exact = exact_values(core, f, rewards, small_family.H)
        agent = _agent(f, rewards, H=small_family.H)
        sampler = TransitionSampler(core, f)
        rng = np.random.default_rng(8)
        for _ in range(30):
            plan = agent.plan()
            if agent.membership(core.M).member:
                assert plan.V[0][0] >= exact.V[0][0] - 1e-9
            agent.update(rollout(sampler, rewards, greedy_policy(plan.Q), 0, rng))


class TestIndependent:
    def test_round(self, small_family):
        agents = [
            _agent(f, r, H=small_family.H) for f, r in zip(small_family.features, small_family.rewards)
        ]
        independent = IndependentMatrixRL(agents)
        assert independent.name == 'independent'
        assert IndependentMatrixRL(agents, name='oracle').name == 'oracle'
        plans = independent.plan_round([0] * 3)
        assert len(plans) == 3
        with pytest.raises(ParameterError):
            independent.update_round([])
