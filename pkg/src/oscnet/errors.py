"""Exception hierarchy shared across the package."""
from __future__ import annotations


class OscnetError(Exception):
    """Base class for all package errors."""


class ConfigError(OscnetError, ValueError):
    """Invalid physical configuration or scenario file.

    ``key`` names the offending config-file key when known.
    """

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class DegenerateDrive(OscnetError):
    """Driven system with Omega == lambda; the closed form does not apply."""


class DegenerateCoupling(OscnetError):
    """Zero inter-oscillator coupling; the propagator divides by lambda."""


class NoDissipation(OscnetError):
    """A decoherence time was requested for a system with all rates zero."""


class TruncationError(OscnetError):
    """Fock truncation too small for the requested coherent amplitudes."""

    def __init__(self, message: str, minimum: int):
        super().__init__(message)
        self.minimum = minimum


class StepSizeError(OscnetError):
    """RK4 step too coarse for the coupling frequency."""
