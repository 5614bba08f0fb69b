"""
Shift Shadowing Module

Product metric on sequence windows, delta-chains and their shadows, and
Morse/Lyapunov spectra of additive cocycles over the shift.
"""

from .morse import (
    ConstantCocycle,
    CoordinateCocycle,
    FunctionCocycle,
    ShiftCocycle,
    chain_exponent,
    min_lyapunov_via_periodic,
    morse_spectrum,
    periodic_average,
    periodic_windows,
    regular_periodic_chain,
    witness_exponent,
)
from .sequences import (
    ChainOfWindows,
    SeqWindow,
    metric_ball_check,
    periodic_chain,
    product_metric,
    random_chain,
    read_chain_csv,
    sequence_from_control,
    stacked_metric,
    write_chain_csv,
)
from .shadowing import (
    ShadowOrbit,
    shadow,
    shadow_bound,
    shadow_deviations,
    shadow_experiment,
    write_shadow_csv,
)

__all__ = [
    "SeqWindow",
    "ChainOfWindows",
    "product_metric",
    "stacked_metric",
    "metric_ball_check",
    "sequence_from_control",
    "random_chain",
    "periodic_chain",
    "read_chain_csv",
    "write_chain_csv",
    "ShadowOrbit",
    "shadow",
    "shadow_deviations",
    "shadow_bound",
    "shadow_experiment",
    "write_shadow_csv",
    "ShiftCocycle",
    "ConstantCocycle",
    "CoordinateCocycle",
    "FunctionCocycle",
    "periodic_windows",
    "periodic_average",
    "chain_exponent",
    "regular_periodic_chain",
    "morse_spectrum",
    "min_lyapunov_via_periodic",
    "witness_exponent",
]
