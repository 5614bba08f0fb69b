"""
Flow Engine Module

Integration of the controlled ODE together with its variational equation.
"""

from .integrator import (
    BatchResult,
    FlowSegment,
    bowen_distance,
    integrate,
    integrate_backward,
    integrate_batch,
    rk4_step,
    step_count,
)
from .shooting import PeriodicOrbit, closed_segment, closure_defect, monodromy, period_length, periodic_orbit
from .transport import StepMapSource, merge_conditioned, periodic_source, source_from_segment

__all__ = [
    "FlowSegment",
    "BatchResult",
    "integrate",
    "integrate_backward",
    "integrate_batch",
    "rk4_step",
    "step_count",
    "bowen_distance",
    "monodromy",
    "closed_segment",
    "closure_defect",
    "periodic_orbit",
    "period_length",
    "PeriodicOrbit",
    "StepMapSource",
    "source_from_segment",
    "periodic_source",
    "merge_conditioned",
]
