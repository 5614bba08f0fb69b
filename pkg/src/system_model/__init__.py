"""
System Model Module

Control-affine systems, regions and piecewise-constant control signals.
"""

from .controls import ControlSignal, concat, empty_signal, grid_steps, lattice, quantize_controls, shift
from .spec import Region, SystemSpec, build_system, load_system, system_from_config

__all__ = [
    "SystemSpec",
    "Region",
    "ControlSignal",
    "build_system",
    "load_system",
    "system_from_config",
    "shift",
    "concat",
    "empty_signal",
    "grid_steps",
    "lattice",
    "quantize_controls",
]
