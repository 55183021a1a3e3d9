import numpy as np
import pytest
from numpy.testing import assert_allclose

from matrixrl.errors import ParameterError
from matrixrl.agents.allocation import allocate_radii


def _saturating(slope, cap):
    return lambda tau: min(slope * tau, cap)


class TestEqual:
    def test_equal_split(self):
        out = allocate_radii(4.0, [_saturating(1.0, 10.0)] * 4)
        assert_allclose(out.tau, 1.0)
        assert out.feasible
        assert out.method == 'equal'

    def test_zero_budget(self):
        for method in ('equal', 'greedy'):
            out = allocate_radii(0.0, [_saturating(1.0, 1.0)] * 3, method)
            assert_allclose(out.tau, 0.0)
            assert out.feasible


class TestGreedy:
    def test_not_worse_than_equal(self):
        contexts = [_saturating(3.0, 1.0), _saturating(1.0, 5.0), _saturating(0.5, 0.2)]
        budget = 6.0
        equal = allocate_radii(budget, contexts)
        greedy = allocate_radii(budget, contexts, 'greedy', sweeps=50)
        equal_value = sum(c(t) for c, t in zip(contexts, equal.tau))
        assert greedy.objective >= equal_value - 1e-9
        assert greedy.feasible
        assert greedy.evaluations > 0

    def test_moves_budget_to_unsaturated_task(self):
        contexts = [_saturating(1.0, 0.1), _saturating(1.0, 100.0)]
        out = allocate_radii(2.0, contexts, 'greedy', sweeps=40)
        assert out.tau[1] > out.tau[0]
        assert float(np.sum(out.tau ** 2)) <= 2.0 + 1e-9

    def test_single_task(self):
        out = allocate_radii(9.0, [_saturating(1.0, 1.0)], 'greedy')
        assert_allclose(out.tau, 3.0)


class TestErrors:
    @pytest.mark.parametrize('budget, method', [(-1.0, 'equal'), (1.0, 'random')])
    def test_invalid(self, budget, method):
        with pytest.raises(ParameterError):
            allocate_radii(budget, [_saturating(1.0, 1.0)], method)

    def test_no_tasks(self):
        with pytest.raises(ParameterError):
            allocate_radii(1.0, [])
