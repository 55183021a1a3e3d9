import importlib

__attributes = {
    'Agent': 'base',

    # Radii
    'ConfidenceSchedule': 'schedules',
    'SharedRadius': 'schedules',
    'beta_n': 'schedules',
    'shared_radius': 'schedules',

    # Bonuses
    'make_bonus': 'bonuses',
    'BONUS_FORMS': 'bonuses',
    'PRACTICAL_BONUS_SCALE': 'bonuses',

    # Single task
    'MatrixRLAgent': 'single',
    'IndependentMatrixRL': 'single',
    'plan_optimistic': 'single',
    'act': 'single',
    'update': 'single',

    # Shared
    'SharedEstimate': 'estimation',
    'joint_factorized_ridge': 'estimation',
    'joint_objective': 'estimation',
    'check_joint_membership': 'estimation',
    'sample_joint_members': 'estimation',
    'RadiusAllocation': 'allocation',
    'allocate_radii': 'allocation',
    'SharedMatrixRLAgent': 'shared',
    'plan_task': 'shared',
    'shared_episode_update': 'shared',
    'projected_inv_norms': 'shared',
    'BONUS_BASES': 'shared',
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
    from .base import Agent
    from .schedules import ConfidenceSchedule, SharedRadius, beta_n, shared_radius
    from .bonuses import make_bonus, BONUS_FORMS, PRACTICAL_BONUS_SCALE
    from .single import MatrixRLAgent, IndependentMatrixRL, plan_optimistic, act, update
    from .estimation import SharedEstimate, joint_factorized_ridge, joint_objective, check_joint_membership, sample_joint_members
    from .allocation import RadiusAllocation, allocate_radii
    from .shared import SharedMatrixRLAgent, plan_task, shared_episode_update, projected_inv_norms, BONUS_BASES
