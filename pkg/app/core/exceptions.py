"""
Domain errors raised by the simulation engines.

Each class carries the exit code the CLI returns when the error escapes a
scenario; the HTTP layer maps them onto status codes in ``app.main``.
"""

from typing import Any, Dict, Optional


class SimulationError(Exception):
    """Base class for every error raised by the simulator."""

    exit_code: int = 2

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def with_context(self, context: str) -> "SimulationError":
        """Prefix the message with scenario context, keeping type and details."""
        self.message = f"{context}: {self.message}"
        self.args = (self.message,)
        return self


class InputValidationError(SimulationError, ValueError):
    """Invalid physics input (non-finite time, bad ratio, grid mismatch...)."""

    exit_code = 1


class NumericalError(SimulationError):
    """A computation could not meet its accuracy contract."""

    exit_code = 2


class WindowTooShortError(NumericalError):
    """The integration window does not reach the asymptotic regime."""

    def __init__(self, edge: str, deviation: float, tolerance: float):
        super().__init__(
            f"integration window too short at {edge} edge "
            f"(deviation {deviation:.3e} > tolerance {tolerance:.1e})",
            {"edge": edge, "deviation": deviation, "tolerance": tolerance},
        )
        self.edge = edge


class IntegratorFailureError(NumericalError):
    """The adaptive integrator stopped before reaching the end of the window."""


class BaselineUndefinedError(NumericalError):
    """|beta_inf| is too small for a quantity normalised by the DCE photon number."""


class ResonanceError(NumericalError):
    """The requested quantity is undefined at (or too close to) resonance."""


class NormDriftError(NumericalError):
    """Unitary evolution drifted away from norm one beyond the contract."""


class AcceptanceFailure(SimulationError):
    """One or more acceptance checks failed."""

    exit_code = 3
