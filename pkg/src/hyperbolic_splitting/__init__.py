"""
Hyperbolic Splitting Module

Estimation of E-/E+ along lifted trajectories and dichotomy verification.
"""

from .dichotomy import DichotomyFit, fit_dichotomy
from .splitting import Splitting, check_gap, detect_dimensions, estimate_splitting, periodic_splitting
from .verification import continuity_diagnostic, verify_hyperbolicity

__all__ = [
    "Splitting",
    "estimate_splitting",
    "periodic_splitting",
    "detect_dimensions",
    "check_gap",
    "verify_hyperbolicity",
    "continuity_diagnostic",
    "fit_dichotomy",
    "DichotomyFit",
]
