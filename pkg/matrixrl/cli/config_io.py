"""
Flat experiment configs in TOML or JSON.
"""
from typing import *
import os
import json
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..errors import ConfigError, ParameterError
from ..pipelines.experiment import ExperimentConfig

SCALAR_TYPES = (bool, int, float, str)


def read_flat(path: str) -> Dict[str, Any]:
    """
    Read a flat key/value mapping; ``.json`` files are parsed as JSON and
    everything else as TOML. Values are scalars or lists of scalars.
    """
    if not os.path.isfile(path):
        raise ConfigError(f"Invalid config path '{path}', file not found")
    try:
        if path.endswith('.json'):
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        else:
            with open(path, 'rb') as f:
                data = tomllib.load(f)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError, UnicodeDecodeError) as e:
        raise ConfigError(f"Invalid config '{path}': {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Invalid config '{path}', top level must be a table")
    for key, value in data.items():
        if isinstance(value, list):
            if not all(isinstance(v, SCALAR_TYPES) for v in value):
                raise ConfigError(f"Invalid config key '{key}', lists must hold scalars")
        elif not isinstance(value, SCALAR_TYPES):
            raise ConfigError(f"Invalid config key '{key}', nested tables are not supported")
    return data


def parse_csv_list(text: str, cast: Callable = str) -> List[Any]:
    """'0,1, 2' -> [0, 1, 2] with ``cast`` applied to every item."""
    items = [item.strip() for item in text.split(',') if item.strip()]
    try:
        return [cast(item) for item in items]
    except ValueError as e:
        raise ConfigError(f"Invalid list '{text}': {e}") from e


def load_config(path: str, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Load, override and validate an ExperimentConfig.

    Args:
        path: TOML or JSON file with flat keys.
        overrides: Keys replacing those of the file (CLI flags).
    """
    flat = read_flat(path)
    flat.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        config = ExperimentConfig.from_flat(flat)
        return config.validate()
    except ConfigError:
        raise
    except (ParameterError, TypeError) as e:
        raise ConfigError(f"Invalid config '{path}': {e}") from e
