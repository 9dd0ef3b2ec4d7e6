"""
Numerical failures of the trade model.

Invariant violations on input values are reported with
``django.core.exceptions.ValidationError``; the classes below cover what
goes wrong while computing.
"""


class TradeflowError(Exception):
    """Base class for tradeflow computation errors."""


class InfeasibleProductionError(TradeflowError, ValueError):
    """A fixed point implies a negative production rate."""

    def __init__(self, message, *, production, bound):
        super().__init__(message)
        self.production = production
        self.bound = bound


class EventLocalizationError(TradeflowError):
    """Bracketing of a guard crossing failed."""

    def __init__(self, message, *, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ChatterError(TradeflowError):
    """Too many regime segments; the trajectory keeps grazing a guard."""
