"""
Exception hierarchy shared by every module.

ConfigError marks bad input (exit code 1), NumericalError marks a
computation that could not be completed (exit code 2).
"""

from typing import Any, Dict, List, Optional, Sequence


class ToolkitError(Exception):
    """Base class for toolkit failures."""

    def details(self) -> Dict[str, Any]:
        return {}

    def to_dict(self) -> Dict[str, Any]:
        return {"type": type(self).__name__, "message": str(self), "details": self.details()}


class ConfigError(ToolkitError, ValueError):
    """Invalid configuration, file or argument."""


class ExprSyntaxError(ConfigError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position

    def details(self) -> Dict[str, Any]:
        return {"position": self.position}


class UnknownIdentifierError(ExprSyntaxError):
    pass


class ControlRangeError(ConfigError):
    """A control value lies outside the admissible box."""


class GridAlignmentError(ConfigError):
    """A duration is not a multiple of the step it must be split into."""


class NumericalError(ToolkitError):
    """A numerical procedure failed."""


class ExprDomainError(NumericalError):
    pass


class BlowUpError(NumericalError):
    def __init__(self, time: float, norm: float):
        super().__init__(f"trajectory left the blow-up guard at t={time:.6g} (|x|={norm:.3g})")
        self.time = time
        self.norm = norm

    def details(self) -> Dict[str, Any]:
        return {"time": self.time, "norm": self.norm}


class ClosureError(NumericalError):
    def __init__(self, defect: float, tolerance: float):
        super().__init__(f"orbit does not close: defect {defect:.3e} exceeds {tolerance:.1e}")
        self.defect = defect
        self.tolerance = tolerance

    def details(self) -> Dict[str, Any]:
        return {"defect": self.defect, "tolerance": self.tolerance}


class NonConvergenceError(NumericalError):
    pass


class DimensionMismatchError(NumericalError):
    pass


class DegenerateBasisError(NumericalError):
    pass


class HyperbolicityError(NumericalError):
    def __init__(self, message: str, violations: Optional[List[Dict[str, Any]]] = None):
        super().__init__(message)
        self.violations = violations or []

    def details(self) -> Dict[str, Any]:
        return {"violations": self.violations[:20]}


class AdmissibilityError(NumericalError):
    def __init__(self, points: Sequence[Sequence[float]]):
        self.points = [list(map(float, p)) for p in points]
        preview = ", ".join(str(p) for p in self.points[:5])
        super().__init__(f"{len(self.points)} point(s) admit no confining control: {preview}")

    def details(self) -> Dict[str, Any]:
        return {"points": self.points}


class UnreachableError(NumericalError):
    """The target cell cannot be reached from `cell`."""

    def __init__(self, cell: int, center: Sequence[float], target: Optional[int] = None):
        center = list(map(float, center))
        suffix = f" cannot reach cell {target}" if target is not None else " is not reachable"
        super().__init__(f"cell {cell} (center {center}){suffix}")
        self.cell = cell
        self.center = center
        self.target = target

    def details(self) -> Dict[str, Any]:
        return {"cell": self.cell, "center": self.center, "target": self.target}
