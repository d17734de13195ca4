"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """A point lies outside the domain of a field, screen or form.

    During integration ``t`` and ``state`` record where the trajectory left
    the domain.
    """

    def __init__(self, message: str, t: float | None = None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class TransversalityError(DomainError):
    """The reaction direction became (numerically) tangent to the screen."""


class IntegrationError(RuntimeError):
    """Integration stopped before the end time (step budget or step underflow)."""

    def __init__(self, message: str, t: float | None = None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class SingularityError(DomainError, IntegrationError):
    """The step size collapsed: the solution blows up or reaches the domain boundary."""
