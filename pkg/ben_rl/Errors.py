"""Exception hierarchy shared by every ben_rl package.

Numerical errors subclass the matching builtin (``ValueError``,
``FloatingPointError``) so callers that only know the builtins still catch
them. Environment errors additionally subclass ``gym.error.Error``.
"""
from typing import Any, Dict, Optional

from gym import error as gym_error


class BenError(Exception):
    """Base class of all errors raised by ben_rl."""


class ShapeError(BenError, ValueError):
    """Operands have incompatible shapes."""


class DomainError(BenError, ValueError):
    """An input lies outside the domain of a primitive (log, sqrt, abs inverse)."""


class NonFiniteError(BenError, FloatingPointError):
    """A computation produced NaN or Inf."""


class NotInvertibleError(BenError, ValueError):
    """A flow layer was configured so that its inverse does not exist."""


class ConfigError(BenError, ValueError):
    """A run, environment or model configuration is invalid."""


class InvalidContextError(ConfigError):
    """A fixed context was requested that is not in the environment's context set."""


class TrainingDivergedError(NonFiniteError):
    """A training loss or gradient became non-finite.

    ``diagnostics`` holds the step, the loss name and the parameter norms at
    the time of failure, and ``metrics`` the rows collected before it.
    """

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None, metrics: Any = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
        self.metrics = metrics


class InvalidActionError(BenError, gym_error.Error):
    """Action index outside the environment's action space."""


class ResetNeededError(BenError, gym_error.Error):
    """``step`` was called before ``reset``."""


class ConvergenceError(BenError, RuntimeError):
    """An iterative solver hit its iteration cap before reaching the tolerance."""
