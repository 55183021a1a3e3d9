import importlib

__attributes = {
    'ExperimentConfig': 'experiment',
    'RegretTrace': 'experiment',
    'ALGORITHMS': 'experiment',
    'build_agent': 'experiment',
    'run_algorithm': 'experiment',
    'run_seed': 'experiment',
    'run_experiment': 'experiment',
    'coverage_audit': 'coverage',
    'dominance_audit': 'coverage',
    'run_lemma_suite': 'lemma_suite',
    'bellman_audit': 'audits',
    'value_residuals': 'audits',
    'audit_bonus_dominance': 'audits',
    'l21_membership': 'audits',
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
    from .experiment import ExperimentConfig, RegretTrace, ALGORITHMS, build_agent, run_algorithm, run_seed, run_experiment
    from .coverage import coverage_audit, dominance_audit
    from .lemma_suite import run_lemma_suite
    from .audits import bellman_audit, value_residuals, audit_bonus_dominance, l21_membership
