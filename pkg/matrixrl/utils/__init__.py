"""
matrixrl utility modules.

Contains:
- the package logger
- JSON conversion of numpy reports
- seeded random substreams
"""

import logging

logger = logging.getLogger("[MATRIXRL]")


def setup_logging(level=logging.INFO):
    """Configure root logging for command-line use."""
    logging.basicConfig(level=level, format="%(name)s %(message)s")


from .general_utils import to_jsonable
from .random_utils import substream, spawn_seed

__all__ = [
    'logger',
    'setup_logging',
    'to_jsonable',
    'substream',
    'spawn_seed',
]
