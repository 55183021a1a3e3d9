import numpy as np
import pytest
from numpy.testing import assert_allclose

from matrixrl.errors import ParameterError
from matrixrl.envs.features import FeatureMaps, indicator_features, measure_c_psi


class TestRegularityConstant:
    def test_indicator_basis(self):
        # sup ‖v‖₂/‖v‖∞ over the cube is √|S|
        assert measure_c_psi(np.eye(5)) == pytest.approx(np.sqrt(5.0))

    def test_single_column(self):
        psi = np.array([[1.0], [2.0], [-2.0]])
        assert measure_c_psi(psi) == pytest.approx(5.0)

    def test_large_state_space_bound_dominates(self, rng):
        psi = rng.standard_normal((20, 3))
        bound = measure_c_psi(psi)
        for _ in range(50):
            v = rng.choice([-1.0, 1.0], size=20)
            assert np.linalg.norm(psi.T @ v) <= bound + 1e-9


class TestFeatureMaps:
    def test_indicator_constants(self, one_hot_features):
        f = one_hot_features
        assert f.d == 12
        assert f.d_prime == 6
        assert_allclose(f.K_psi, np.eye(6))
        assert f.K_psi_inv_norm == pytest.approx(1.0)
        assert_allclose(f.psi_tilde, np.eye(6))
        assert f.C_psi == pytest.approx(np.sqrt(6.0))
        assert f.C_psi_inf == pytest.approx(1.0)
        assert f.L_phi == pytest.approx(1.0)

    def test_index_layout(self, one_hot_features):
        f = one_hot_features
        assert f.index(3, 1) == 7
        assert_allclose(f.phi_of(3, 1), np.eye(12)[7])

    def test_regularity_modes(self, one_hot_features):
        assert one_hot_features.regularity('assumption3') == one_hot_features.C_psi
        assert one_hot_features.regularity('assumption2') == one_hot_features.C_psi_inf
        with pytest.raises(ParameterError):
            one_hot_features.regularity('assumption1')

    def test_projection(self, rng):
        phi = rng.dirichlet(np.ones(6), size=8)
        f = indicator_features(phi, 4, 2, L_phi=1.0)
        B, _ = np.linalg.qr(rng.standard_normal((6, 2)))
        g = f.project(B)
        assert g.d == 2
        assert g.d_prime == 4
        assert_allclose(g.phi, phi @ B)
        assert g.L_phi >= g.L_phi_measured

    def test_declared_bound_below_measured(self):
        with pytest.raises(ParameterError):
            FeatureMaps(2.0 * np.eye(4), np.eye(2), 2, 2, L_phi=1.0)

    def test_degenerate_psi(self):
        with pytest.raises(ParameterError):
            FeatureMaps(np.eye(4), np.ones((2, 2)), 2, 2)

    def test_shape_checks(self):
        with pytest.raises(ParameterError):
            FeatureMaps(np.eye(3), np.eye(2), 2, 2)
        with pytest.raises(ParameterError):
            FeatureMaps(np.eye(4), np.eye(3), 2, 2)

    def test_summary(self, one_hot_features):
        summary = one_hot_features.summary()
        assert summary.d == 12
        assert 'C_psi' in str(one_hot_features)
