"""
Monodromy matrices and periodic orbits of periodic controls.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ..shared.errors import ClosureError, ConfigError, NonConvergenceError
from ..system_model import ControlSignal, SystemSpec
from .integrator import FlowSegment, integrate
from config.settings import settings

logger = logging.getLogger(__name__)


def period_length(u: ControlSignal) -> float:
    if not u.is_periodic:
        raise ConfigError("a periodic control is required")
    return u.period * u.delta


def closed_segment(spec: SystemSpec, x0, u: ControlSignal, closure_tol: float = None) -> FlowSegment:
    """One period of the trajectory from x0; ClosureError unless it returns to x0."""
    closure_tol = settings.CLOSURE_TOL if closure_tol is None else closure_tol
    segment = integrate(spec, x0, u, period_length(u))
    defect = closure_defect(segment)
    if defect > closure_tol:
        raise ClosureError(defect, closure_tol)
    return segment


def closure_defect(segment: FlowSegment) -> float:
    return float(np.linalg.norm(segment.final_state - segment.x0))


def monodromy(spec: SystemSpec, x0, u: ControlSignal, closure_tol: float = None) -> np.ndarray:
    """Phi(tau_p, x0, u) for a tau_p-periodic control whose trajectory from x0 closes."""
    return closed_segment(spec, x0, u, closure_tol).fundamental()


@dataclass(frozen=True)
class PeriodicOrbit:
    x0: np.ndarray
    control: ControlSignal
    segment: FlowSegment
    residual: float
    iterations: int

    @property
    def period(self) -> float:
        return period_length(self.control)

    @property
    def monodromy(self) -> np.ndarray:
        return self.segment.fundamental()


def periodic_orbit(
    spec: SystemSpec,
    u: ControlSignal,
    x_guess,
    tol: float = None,
    max_iter: int = None,
) -> PeriodicOrbit:
    """
    Newton shooting on G(x) = phi(tau_p, x, u) - x with Jacobian M(x) - I.

    Steps are halved while they fail to decrease |G|.
    """
    tol = settings.NEWTON_TOL if tol is None else tol
    max_iter = settings.NEWTON_MAX_ITER if max_iter is None else max_iter
    tau = period_length(u)
    x = np.asarray(x_guess, dtype=float).reshape(spec.dim).copy()
    segment = integrate(spec, x, u, tau)
    residual = segment.final_state - x
    norm = float(np.linalg.norm(residual))
    eye = np.eye(spec.dim)
    for iteration in range(max_iter):
        if norm < tol:
            return PeriodicOrbit(x0=x, control=u, segment=segment, residual=norm, iterations=iteration)
        jac = segment.fundamental() - eye
        try:
            step = np.linalg.solve(jac, -residual)
        except np.linalg.LinAlgError:
            raise NonConvergenceError("shooting Jacobian M - I is singular (multiplier 1)")
        scale = 1.0
        for _ in range(30):
            trial = x + scale * step
            trial_segment = integrate(spec, trial, u, tau)
            trial_residual = trial_segment.final_state - trial
            trial_norm = float(np.linalg.norm(trial_residual))
            if trial_norm < norm or trial_norm < tol:
                break
            scale *= 0.5
        else:
            raise NonConvergenceError(f"shooting stalled at residual {norm:.3e}")
        x, segment, residual, norm = trial, trial_segment, trial_residual, trial_norm
    if norm < tol:
        return PeriodicOrbit(x0=x, control=u, segment=segment, residual=norm, iterations=max_iter)
    raise NonConvergenceError(f"shooting did not converge in {max_iter} iterations (residual {norm:.3e})")
