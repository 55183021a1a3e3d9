import importlib

__attributes = {
    # Features and families
    'FeatureMaps': 'features',
    'indicator_features': 'features',
    'measure_c_psi': 'features',
    'InstanceConfig': 'family',
    'TransitionCore': 'family',
    'TaskFamily': 'family',
    'EpisodeRecord': 'family',
    'make_instance': 'family',

    # Dynamics
    'transition_matrix': 'dynamics',
    'sample_step': 'dynamics',
    'TransitionSampler': 'dynamics',
    'rollout': 'dynamics',

    # Planning
    'backward_induction': 'planning',
    'exact_values': 'planning',
    'greedy_policy': 'planning',
    'policy_values': 'planning',
    'evaluate_policy': 'planning',

    # Snapshots
    'family_to_dict': 'serialization',
    'family_from_dict': 'serialization',
    'save_instance': 'serialization',
    'load_instance': 'serialization',
}

__submodules = []

__all__ = list(__attributes.keys()) + __submodules

def __getattr__(name):
    if name not in globals():
        if name in __attributes:
            module_name = __attributes[name]
            module = importlib.import_module(f".{module_name}", __name__)
            globals()[name] = getattr(module, name)
        elif name in __submodules:
            module = importlib.import_module(f".{name}", __name__)
            globals()[name] = module
        else:
            raise AttributeError(f"module {__name__} has no attribute {name}")
    return globals()[name]


# For Pylance
if __name__ == '__main__':
    from .features import FeatureMaps, indicator_features, measure_c_psi
    from .family import InstanceConfig, TransitionCore, TaskFamily, EpisodeRecord, make_instance
    from .dynamics import transition_matrix, sample_step, TransitionSampler, rollout
    from .planning import backward_induction, exact_values, greedy_policy, policy_values, evaluate_policy
    from .serialization import family_to_dict, family_from_dict, save_instance, load_instance
