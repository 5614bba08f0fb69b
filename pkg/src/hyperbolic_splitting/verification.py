"""
Finite-horizon verification of the exponential dichotomy and a continuity
proxy for the splitting.
"""

import logging
from typing import Any, Dict, Optional

import numpy as np
from scipy.linalg import subspace_angles

from ..flow_engine import step_count
from ..shared.errors import HyperbolicityError
from ..shared.schemas.reports import HyperbolicityReport
from ..system_model import ControlSignal, SystemSpec
from .dichotomy import fit_dichotomy
from .splitting import Splitting, estimate_splitting
from config.settings import settings

logger = logging.getLogger(__name__)


def verify_hyperbolicity(
    spec: SystemSpec,
    splitting: Splitting,
    probe_horizon: Optional[float] = None,
    n_samples: int = 16,
    min_rate: Optional[float] = None,
    seed: int = 0,
    raise_on_failure: bool = False,
) -> HyperbolicityReport:
    """
    Sample unit vectors in E+ and E- at time 0, follow them over the probe
    horizon and fit growth rates. Passes when the fitted dichotomy rate
    lambda_hat exceeds min_rate.
    """
    min_rate = settings.MIN_DICHOTOMY_RATE if min_rate is None else min_rate
    chunk = splitting.sample_every
    lo, hi = splitting.source.bounds
    if probe_horizon is None:
        probe_horizon = 5.0
    probe_steps = step_count(round(probe_horizon / spec.delta) * spec.delta, spec.h_int)
    if hi is not None:
        probe_steps = min(probe_steps, hi // chunk * chunk)
    probe_steps = max(chunk, probe_steps)
    fit = fit_dichotomy(
        splitting.source,
        splitting.plus_basis(0),
        splitting.minus_basis(0),
        probe_steps,
        chunk,
        n_random=n_samples,
        min_rate=min_rate,
        seed=seed,
    )
    passed = fit.lambda_hat > min_rate and fit.c_hat > 0.0
    report = HyperbolicityReport(
        passed=passed,
        lambda_hat=fit.lambda_hat,
        c_hat=fit.c_hat,
        expansion_rate=fit.expansion_rate,
        contraction_rate=fit.contraction_rate,
        angle_floor=splitting.angle_floor,
        invariance_defect=splitting.invariance_defect,
        probe_horizon=probe_steps * splitting.source.h,
        dims=splitting.dims,
        violations=fit.violations,
    )
    if passed:
        logger.info(f"Hyperbolicity verified: lambda_hat={fit.lambda_hat:.4f} c_hat={fit.c_hat:.4f}")
    else:
        logger.warning(
            f"Hyperbolicity check failed: lambda_hat={fit.lambda_hat:.4f} with {len(fit.violations)} violations"
        )
        if raise_on_failure:
            raise HyperbolicityError(
                f"no dichotomy at rate {min_rate}: lambda_hat={fit.lambda_hat:.4g}", fit.violations
            )
    return report


def continuity_diagnostic(
    spec: SystemSpec,
    u: ControlSignal,
    x_ref,
    perturbation: float = 1e-4,
    dims=None,
    seed: int = 0,
) -> Dict[str, Any]:
    """
    Distance between the splittings at x_ref and at a perturbed point,
    relative to the perturbation size. Reported only; it proves nothing.
    """
    x_ref = np.asarray(x_ref, dtype=float).reshape(spec.dim)
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(spec.dim)
    direction /= np.linalg.norm(direction)
    base = estimate_splitting(spec, u, x_ref, dims=dims, seed=seed)
    moved = estimate_splitting(spec, u, x_ref + perturbation * direction, dims=base.dims, seed=seed)

    def distance(a: np.ndarray, b: np.ndarray) -> float:
        if a.shape[1] == 0 or a.shape[1] == spec.dim:
            return 0.0
        return float(np.max(subspace_angles(a, b)))

    plus = distance(base.plus_basis(0), moved.plus_basis(0))
    minus = distance(base.minus_basis(0), moved.minus_basis(0))
    return {
        "perturbation": perturbation,
        "unstable_distance": plus,
        "stable_distance": minus,
        "modulus": max(plus, minus) / perturbation,
    }
