"""Exceptions raised by the dfrelay solvers."""

__all__ = [
    "DimensionError",
    "UnboundedDualError",
    "SolverError",
    "InstanceTooLargeError",
]


class DimensionError(ValueError):
    """Arrays of one instance disagree on the number of subcarriers or relays."""


class UnboundedDualError(ValueError):
    """The source multiplier is too small for the Lagrangian to be bounded."""


class SolverError(RuntimeError):
    """A solver could not produce a feasible allocation."""


class InstanceTooLargeError(ValueError):
    """The exhaustive oracle refuses instances beyond its size guard."""
