"""
Error types raised by the lab's numerical layers.

Commands turn these into CommandError, views into a JSON error payload.
"""
from typing import Any, Dict, Optional


class LabError(Exception):
    """Base class for every failure the lab reports on purpose."""

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context = context or {}

    def __str__(self):
        if not self.context:
            return self.message
        details = ', '.join(f"{key}={value}" for key, value in self.context.items())
        return f"{self.message} ({details})"


class QuadratureError(LabError):
    """Panel doubling hit the cap before reaching the requested tolerance."""

    def __init__(self, message: str, achieved: float, panels: int):
        super().__init__(message, {'achieved_rtol': f"{achieved:.3e}", 'panels': panels})
        self.achieved = achieved
        self.panels = panels


class BranchError(LabError):
    """A square-root branch, orientation or path invariant was violated."""


class RegionError(LabError, ValueError):
    """A velocity or background lies outside the admissible window."""

    def __init__(self, message: str, window: Optional[tuple] = None):
        context = {'window': f"[{window[0]:.6g}, {window[1]:.6g}]"} if window else None
        super().__init__(message, context)
        self.window = window


class InstabilityError(LabError):
    """The lattice integration produced a non-positive a(n)."""

    def __init__(self, n: int, t: float, dt: float):
        super().__init__("a(n) became non-positive", {'n': n, 't': f"{t:.6g}", 'dt': dt})
        self.n = n
        self.t = t
        self.dt = dt


class ConfigError(LabError, ValueError):
    """A comparison config file could not be accepted."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message, {'line': line} if line is not None else None)
        self.line = line


class DataError(LabError, ValueError):
    """Input data (step window, scattering values, error series) is unusable."""
