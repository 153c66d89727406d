"""
Error hierarchy shared by the numerical modules.

Input that is simply invalid (a non-Hermitian generator, a noise level outside
[0, 1], ...) raises ``django.core.exceptions.ValidationError`` like any other
model-level check; the classes below cover structural and capacity problems.
"""


class MetrologyError(Exception):
    """Base class for every error raised by the metrology engine."""


class StructuralError(MetrologyError, ValueError):
    """Operator dimensions do not match the declared party structure."""


class CapacityError(MetrologyError):
    """A dense computation would exceed the configured size guard."""


class UnsupportedDimensionError(MetrologyError, NotImplementedError):
    """The quantity is only defined for qubits (d = 2)."""


class InsufficientDataError(MetrologyError):
    """Reduced data is missing pieces a computation needs."""
