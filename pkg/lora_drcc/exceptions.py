"""Defines a common set of exceptions which the simulator raises and callers catch."""

from __future__ import annotations


class ConfigValidationError(Exception):
    """Raised when scenario or CLI settings fail validation."""

    def __init__(
        self,
        message: str,
        *,
        errors: list[str] | None = None,
    ) -> None:
        """Initialize a ConfigValidationError.

        Args:
            message: A message describing the error.
            errors: A list of errors which caused the validation error.
        """
        super().__init__(message)
        self.errors = errors or []


class RadioParameterError(ValueError):
    """Raised when a PHY parameter tuple is outside the supported set."""


class UnsupportedDataRateError(RadioParameterError):
    """Raised for data-rate indexes with no LoRa mapping (FSK DR7 and above)."""


class ChannelModelError(ValueError):
    """Raised when a link-budget input is physically meaningless."""


class MacEncodingError(ValueError):
    """Raised when a MAC command cannot be packed into its wire format."""


class MacDecodingError(ValueError):
    """Raised when bytes do not hold the expected MAC command."""


class EstimationWindowError(Exception):
    """Raised when frame counters inside an estimation window are not increasing."""


class UnknownNodeError(KeyError):
    """Raised when a scheme operation references a node the server never saw."""


class SchemeError(Exception):
    """Raised when a scheme bookkeeping precondition does not hold."""


class EmptyEventLogError(Exception):
    """Raised when metrics are requested over an empty event log."""


class SimulationError(Exception):
    """Raised when the event loop detects a broken invariant during a run."""
