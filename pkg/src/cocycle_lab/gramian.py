"""
Controllability Gramian of the linearisation along a trajectory.

The linearisation is the time-varying system v' = A(t) v + B(t) w with
A = dF/dx and B = [f_1 ... f_m] along phi(t, x0, u); it is controllable on
[t1, t2] exactly when W(t1, t2) = int Phi(t2, s) B B^T Phi(t2, s)^T ds is
non-singular.
"""

import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from ..flow_engine import integrate, step_count
from ..shared.errors import ConfigError
from ..system_model import ControlSignal, SystemSpec
from config.settings import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GramianResult:
    rank: int
    smallest_singular_value: float
    singular_values: List[float]
    regular: bool
    gramian: np.ndarray


def controllability_gramian(spec: SystemSpec, x0, u: ControlSignal, t1: float, t2: float) -> np.ndarray:
    if not 0 <= t1 < t2:
        raise ConfigError(f"need 0 <= t1 < t2, got [{t1}, {t2}]")
    segment = integrate(spec, x0, u, t2)
    first = step_count(t1, segment.h)
    B = spec.input_matrix(segment.states)
    # Phi(t2, t_k) accumulated backwards from the identity
    d = spec.dim
    transports = np.empty((segment.n_steps + 1, d, d))
    transports[-1] = np.eye(d)
    for k in range(segment.n_steps - 1, -1, -1):
        transports[k] = transports[k + 1] @ segment.step_maps[k]
    integrand = np.einsum("kij,kjl,kml,knm->kin", transports, B, B, transports, optimize=True)
    weights = np.full(segment.n_steps + 1, segment.h)
    weights[: first] = 0.0
    weights[first] *= 0.5
    weights[-1] *= 0.5
    return np.tensordot(weights, integrand, axes=1)


def gramian_rank(spec: SystemSpec, x0, u: ControlSignal, t1: float, t2: float, tol: float = None) -> GramianResult:
    """
    Numerical rank with relative tolerance tol * sigma_max (rank 0 when W = 0).

    smallest_singular_value is the last value counted in the rank, 0.0 at rank 0.
    """
    tol = settings.TOL_RANK if tol is None else tol
    W = controllability_gramian(spec, x0, u, t1, t2)
    s = np.linalg.svd(W, compute_uv=False)
    rank = 0 if s[0] == 0.0 else int(np.sum(s > tol * s[0]))
    # smallest retained value; 0 when nothing is retained
    retained = float(s[rank - 1]) if rank else 0.0
    result = GramianResult(
        rank=rank,
        smallest_singular_value=retained,
        singular_values=[float(v) for v in s],
        regular=rank == spec.dim,
        gramian=W,
    )
    logger.debug(f"Gramian on [{t1}, {t2}]: rank {rank}/{spec.dim}, smallest retained sv {retained:.3e}")
    return result
