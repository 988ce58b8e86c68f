"""Exception hierarchy shared by every chaplab module.

The CLI maps these onto exit codes: ``ConfigError`` -> 2, ``NumericError``
(and subclasses) -> 3.
"""

from __future__ import annotations


class ChaplabError(Exception):
    """Base class for all chaplab errors."""


class ConfigError(ChaplabError, ValueError):
    """Bad scenario/curve specification or run configuration."""


class NumericError(ChaplabError, ArithmeticError):
    """A numerical procedure failed to deliver its contract."""


class QuadratureError(NumericError):
    def __init__(self, message: str, interval: tuple[float, float]):
        super().__init__(f"{message} on [{interval[0]!r}, {interval[1]!r}]")
        self.interval = interval


class NearSingularError(NumericError):
    """Newton inversion of the characteristic map stalled near J = 0."""

    def __init__(self, message: str, last_iterate, jacobian_abs: float):
        super().__init__(f"{message} (|J| = {jacobian_abs:.3e})")
        self.last_iterate = last_iterate
        self.jacobian_abs = jacobian_abs


class DomainError(NumericError):
    """Requested point lies outside the region where an operation is valid."""


class ConsistencyError(NumericError):
    """An identity that must hold by construction was violated."""
