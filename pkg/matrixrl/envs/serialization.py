"""
JSON snapshots of task families.

Schema ``matrixrl.instance/1``: matrices as row-major nested lists, the
generating config echoed under ``config`` and the seed under ``seed``. Shared
feature maps are stored once under ``features``; per-task maps under
``task_features``.
"""
from typing import *
import json
import numpy as np

from ..errors import ParameterError
from .features import FeatureMaps
from .family import InstanceConfig, TaskFamily, TransitionCore

SCHEMA = 'matrixrl.instance/1'


def _features_to_dict(f: FeatureMaps) -> Dict[str, Any]:
    return {
        'n_states': f.n_states,
        'n_actions': f.n_actions,
        'phi': f.phi.tolist(),
        'psi': f.psi.tolist(),
        'L_phi': f.L_phi,
        'L_psi': f.L_psi,
        'constants': {
            'C_psi': f.C_psi,
            'C_psi_inf': f.C_psi_inf,
            'C_psi_prime': f.C_psi_prime,
            'K_psi_inv_norm': f.K_psi_inv_norm,
        },
    }


def _features_from_dict(data: Dict[str, Any]) -> FeatureMaps:
    return FeatureMaps(
        np.asarray(data['phi'], dtype=np.float64),
        np.asarray(data['psi'], dtype=np.float64),
        data['n_states'],
        data['n_actions'],
        L_phi=data['L_phi'],
        L_psi=data['L_psi'],
    )


def family_to_dict(family: TaskFamily) -> Dict[str, Any]:
    data = {
        'schema': SCHEMA,
        'seed': family.seed,
        'config': family.config.to_dict() if family.config is not None else None,
        'P': family.P,
        'H': family.H,
        'B_star': family.B_star.tolist(),
        'A_star': [A.tolist() for A in family.A_star],
        'cores': [{'M': c.M.tolist(), 'S_bound': c.S_bound} for c in family.cores],
        'rewards': [r.tolist() for r in family.rewards],
    }
    if family.shared_features:
        data['features'] = _features_to_dict(family.features[0])
    else:
        data['task_features'] = [_features_to_dict(f) for f in family.features]
    return data


def family_from_dict(data: Dict[str, Any]) -> TaskFamily:
    if data.get('schema') != SCHEMA:
        raise ParameterError(f"Invalid instance schema '{data.get('schema')}', must be '{SCHEMA}'")
    if 'features' in data:
        features = _features_from_dict(data['features'])
    else:
        features = [_features_from_dict(f) for f in data['task_features']]
    config = InstanceConfig(**data['config']) if data.get('config') is not None else None
    return TaskFamily(
        B_star=np.asarray(data['B_star'], dtype=np.float64),
        A_star=[np.asarray(A, dtype=np.float64) for A in data['A_star']],
        cores=[TransitionCore(np.asarray(c['M'], dtype=np.float64), c['S_bound']) for c in data['cores']],
        rewards=[np.asarray(r, dtype=np.float64) for r in data['rewards']],
        features=features,
        H=data['H'],
        config=config,
    )


def dumps_family(family: TaskFamily) -> str:
    return json.dumps(family_to_dict(family), indent=1, sort_keys=True)


def save_instance(family: TaskFamily, path: str) -> None:
    with open(path, 'w') as f:
        f.write(dumps_family(family))


def load_instance(path: str) -> TaskFamily:
    with open(path, 'r') as f:
        return family_from_dict(json.load(f))
