"""Exception types shared across the package."""
from __future__ import annotations


class UnsupportedDimensionError(ValueError):
    """Raised when a construction is requested for a dimension it cannot support."""


class InvalidSetError(ValueError):
    """Raised when a collection of states violates a structural requirement."""


class InsufficientDataError(ValueError):
    """Raised when an estimate is requested from too little data."""


class ProtocolOrderError(RuntimeError):
    """Raised when protocol steps are driven out of their required order."""
