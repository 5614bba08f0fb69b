"""
Cocycle Lab Module

Exterior and determinant cocycles, Floquet exponents and Gramian checks.
"""

from .bounds import wazewski_rate
from .cocycles import (
    CocycleTrace,
    additive_cocycle,
    alpha,
    det_cocycle,
    frame_volume_growth,
    liouville_integral,
    node_controls,
)
from .exterior import (
    exterior_growth,
    exterior_norm,
    exterior_trace_values,
    finite_time_exponents,
    log_singular_values,
    positive_log_sum,
    product_log_singular_values,
)
from .floquet import floquet_exponents, positive_exponent_sum
from .gramian import GramianResult, controllability_gramian, gramian_rank

__all__ = [
    "CocycleTrace",
    "alpha",
    "det_cocycle",
    "additive_cocycle",
    "frame_volume_growth",
    "liouville_integral",
    "node_controls",
    "exterior_norm",
    "exterior_growth",
    "exterior_trace_values",
    "finite_time_exponents",
    "log_singular_values",
    "positive_log_sum",
    "product_log_singular_values",
    "floquet_exponents",
    "positive_exponent_sum",
    "GramianResult",
    "controllability_gramian",
    "gramian_rank",
    "wazewski_rate",
]
