"""
Worker-parallelism configuration with lazy detection.

Configure via:
- Environment variable: MATRIXRL_THREADS (0 or unset = auto)
- Runtime: set_num_workers(4) before running experiments
"""
from typing import *
import os

from .utils import logger

# Lazy initialization - resolved on first use
_NUM_WORKERS: Optional[int] = None
ENV_VAR = 'MATRIXRL_THREADS'


def _auto_workers() -> int:
    return max(1, os.cpu_count() or 1)


def _detect_num_workers() -> int:
    """Read MATRIXRL_THREADS, falling back to auto-detection."""
    env_value = os.environ.get(ENV_VAR)
    if env_value is None or env_value.strip() == '':
        return _auto_workers()
    try:
        n = int(env_value)
    except ValueError:
        logger.warning(f"Invalid {ENV_VAR} '{env_value}', must be a nonnegative integer; using auto")
        return _auto_workers()
    if n < 0:
        logger.warning(f"Invalid {ENV_VAR} '{env_value}', must be a nonnegative integer; using auto")
        return _auto_workers()
    if n == 0:
        return _auto_workers()
    logger.info(f"Using {n} worker(s) from {ENV_VAR}")
    return n


def get_num_workers() -> int:
    """Get the worker cap, detecting on first call."""
    global _NUM_WORKERS
    if _NUM_WORKERS is None:
        _NUM_WORKERS = _detect_num_workers()
    return _NUM_WORKERS


def set_num_workers(n: int) -> None:
    """
    Set the worker cap explicitly.

    Args:
        n: Number of worker processes; 0 selects auto-detection.
    """
    global _NUM_WORKERS
    if not isinstance(n, int) or n < 0:
        raise ValueError(f"Invalid worker count '{n}', must be a nonnegative integer")
    _NUM_WORKERS = _auto_workers() if n == 0 else n


def reset_num_workers() -> None:
    """Forget the resolved value so the environment is read again."""
    global _NUM_WORKERS
    _NUM_WORKERS = None
