import json
import pytest
from numpy.testing import assert_array_equal

from matrixrl.errors import ParameterError
from matrixrl.envs.family import TaskFamily
from matrixrl.envs.serialization import (
    dumps_family,
    family_from_dict,
    family_to_dict,
    load_instance,
    save_instance,
)


class TestInstanceSnapshots:
    def test_round_trip_is_idempotent(self, small_family, tmp_path):
        path = tmp_path / 'instance.json'
        save_instance(small_family, str(path))
        loaded = load_instance(str(path))
        assert dumps_family(loaded) == path.read_text()
        assert_array_equal(loaded.B_star, small_family.B_star)
        for a, b in zip(loaded.cores, small_family.cores):
            assert_array_equal(a.M, b.M)
        assert loaded.config == small_family.config

    def test_shared_features_stored_once(self, small_family):
        data = family_to_dict(small_family)
        assert 'features' in data
        assert 'task_features' not in data
        assert data['schema'] == 'matrixrl.instance/1'
        assert data['seed'] == 0
        assert data['features']['constants']['C_psi'] == pytest.approx(small_family.features[0].C_psi)

    def test_per_task_features(self, small_family):
        projected = [f.project(small_family.B_star) for f in small_family.features]
        family = TaskFamily(
            small_family.B_star, small_family.A_star, small_family.cores,
            small_family.rewards, projected, small_family.H, small_family.config,
        )
        data = json.loads(json.dumps(family_to_dict(family)))
        assert 'task_features' in data
        loaded = family_from_dict(data)
        assert not loaded.shared_features
        assert loaded.features[1].d == 2

    def test_wrong_schema(self, small_family):
        data = family_to_dict(small_family)
        data['schema'] = 'other/1'
        with pytest.raises(ParameterError):
            family_from_dict(data)
