"""
Exception hierarchy for zforce.

Every error raised on purpose by the library derives from ZforceError and
carries the process exit code the command-line front end reports for it:

  - 0  ok
  - 2  invalid input (graph files, configs, node ids, checkpoints, actions)
  - 3  budget exceeded (exact search node/time budgets)
  - 4  training abort (non-finite gradients)

Library callers can catch ZforceError as a whole or a specific subclass;
the CLI maps them through the `cli_safe` decorator in cli.py.
"""

from typing import Optional


class ZforceError(Exception):
    """Base class for all zforce errors."""

    exit_code: int = 1


class InvalidInputError(ZforceError):
    """Malformed or out-of-range arguments (node ids, shapes, probabilities)."""

    exit_code = 2


class GraphFormatError(InvalidInputError):
    """Parse error in an edge-list or pattern-matrix document."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(InvalidInputError):
    """Invalid TrainConfig / SweepSpec file."""


class CheckpointError(InvalidInputError):
    """Unreadable or incompatible model checkpoint."""


class InvalidActionError(InvalidInputError):
    """Action outside the environment's valid action set."""


class BudgetExceededError(ZforceError):
    """The exact solver refused or aborted a search."""

    exit_code = 3

    def __init__(self, budget: str, limit: float, actual: float):
        self.budget = budget
        self.limit = limit
        self.actual = actual
        super().__init__(f"{budget} budget exceeded: {actual} > {limit}")


class NonFiniteGradientError(ZforceError):
    """A parameter gradient contained NaN or infinity."""

    exit_code = 4

    def __init__(self, message: str, episode: Optional[int] = None):
        self.episode = episode
        if episode is not None:
            message = f"episode {episode}: {message}"
        super().__init__(message)
