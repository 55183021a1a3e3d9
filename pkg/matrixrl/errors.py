"""
Exception types raised across matrixrl.

The CLI maps ParameterError (and its ConfigError subclass) to exit code 1 and
every other failure to exit code 2.
"""


class ParameterError(ValueError):
    """Invalid or infeasible parameters passed to a public operation."""


class ConfigError(ParameterError):
    """Malformed or unreadable configuration file."""


class EnvironmentStepError(RuntimeError):
    """A transition row is not a valid probability distribution."""


class GenerationError(RuntimeError):
    """Instance generation produced a core violating its invariants."""
