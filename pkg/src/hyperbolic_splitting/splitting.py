"""
Estimation of the hyperbolic splitting E- (+) E+ along lifted trajectories.

E+ at the sample times is obtained by forward subspace iteration started a
horizon T in the past, E- by backward iteration (inverse maps) started T in
the future. Convergence is measured by repeating both with T/2; the horizon
doubles until the two agree. Along periodic orbits the subspaces are read
off the ordered real Schur form of the monodromy instead.
"""

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.linalg import schur, subspace_angles

from ..cocycle_lab import product_log_singular_values
from ..flow_engine import (
    StepMapSource,
    integrate,
    integrate_backward,
    period_length,
    periodic_source,
    step_count,
)
from ..shared.errors import ClosureError, ConfigError, DimensionMismatchError, NonConvergenceError
from ..system_model import ControlSignal, Region, SystemSpec
from .dichotomy import fit_dichotomy
from config.settings import settings

logger = logging.getLogger(__name__)

Dims = Tuple[int, int]  # (d-, d+)


@dataclass(frozen=True)
class Splitting:
    """Orthonormal bases of E+ (d x d+) and E- (d x d-) at the sample times."""
    times: np.ndarray
    plus: np.ndarray
    minus: np.ndarray
    dims: Dims
    source: StepMapSource
    sample_every: int
    horizon: float
    convergence: float
    angle_floor: float
    invariance_defect: float
    exponents: np.ndarray
    dichotomy: Tuple[float, float]
    method: str

    def plus_basis(self, k: int = 0) -> np.ndarray:
        return self.plus[k]

    def minus_basis(self, k: int = 0) -> np.ndarray:
        return self.minus[k]

    def to_csv(self, path: Union[str, Path]) -> Path:
        """One row per (time, subspace, basis vector)."""
        path = Path(path)
        d = self.plus.shape[1]
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t", "subspace", "column"] + [f"e{i + 1}" for i in range(d)])
            for k, t in enumerate(self.times):
                for name, bases in (("unstable", self.plus), ("stable", self.minus)):
                    for c in range(bases.shape[2]):
                        writer.writerow([repr(float(t)), name, c] + [repr(float(v)) for v in bases[k][:, c]])
        return path


def detect_dimensions(exponents: np.ndarray, min_gap: float = None, require_gap: bool = True) -> Dims:
    """
    (d-, d+) from finite-time exponents: d+ counts the positive ones.

    With require_gap the split must be separated from zero (and, for a
    proper split, the exponents on both sides must differ by min_gap).
    """
    min_gap = settings.MIN_EXPONENT_GAP if min_gap is None else min_gap
    exponents = np.sort(np.asarray(exponents, dtype=float))[::-1]
    d = len(exponents)
    d_plus = int(np.sum(exponents > 0))
    if require_gap and np.min(np.abs(exponents)) < min_gap / 2.0:
        raise DimensionMismatchError(
            f"finite-time exponents {np.round(exponents, 6).tolist()} show no dichotomy gap around 0"
        )
    return d - d_plus, d_plus


def check_gap(exponents: np.ndarray, dims: Dims, min_gap: float = None) -> float:
    """Gap between the d+-th and (d+ + 1)-th exponent; raises when it is too small."""
    min_gap = settings.MIN_EXPONENT_GAP if min_gap is None else min_gap
    d_minus, d_plus = dims
    if d_plus == 0 or d_minus == 0:
        return math.inf
    ordered = np.sort(exponents)[::-1]
    gap = float(ordered[d_plus - 1] - ordered[d_plus])
    if gap < min_gap:
        raise DimensionMismatchError(f"exponent gap {gap:.3e} at d+={d_plus} is below {min_gap}")
    return gap


def _orthonormal(frame: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(frame)
    return q


def _max_angle(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape[1] == 0:
        return 0.0
    return float(np.max(subspace_angles(a, b)))


def _forward_iteration(source, frame, start: int, samples: List[int], chunk: int) -> List[np.ndarray]:
    """Push a frame from step `start` forward, recording it at the sample steps."""
    out = []
    Q = _orthonormal(frame)
    position = start
    for target in samples:
        while position < target:
            stop = min(position + chunk, target)
            Q = _orthonormal(source.product(position, stop) @ Q)
            position = stop
        out.append(Q)
    return out


def _backward_iteration(source, frame, start: int, samples: List[int], chunk: int) -> List[np.ndarray]:
    """Pull a frame from step `start` backward with inverse maps, recording at the samples."""
    out = {}
    Q = _orthonormal(frame)
    position = start
    for target in sorted(samples, reverse=True):
        while position > target:
            stop = max(position - chunk, target)
            Q = _orthonormal(np.linalg.solve(source.product(stop, position), Q))
            position = stop
        out[target] = Q
    return [out[s] for s in samples]


def _iterate(source, dims: Dims, horizon_steps: int, samples: List[int], chunk: int, rng):
    d = source.dim
    d_minus, d_plus = dims
    plus = [np.zeros((d, 0))] * len(samples)
    minus = [np.zeros((d, 0))] * len(samples)
    if d_plus == d:
        plus = [np.eye(d)] * len(samples)
    elif d_plus > 0:
        plus = _forward_iteration(source, rng.standard_normal((d, d_plus)), -horizon_steps, samples, chunk)
    if d_minus == d:
        minus = [np.eye(d)] * len(samples)
    elif d_minus > 0:
        minus = _backward_iteration(source, rng.standard_normal((d, d_minus)), samples[-1] + horizon_steps,
                                    samples, chunk)
    return plus, minus


def _diagnostics(source, plus, minus, samples, chunk) -> Tuple[float, float]:
    floor = math.pi / 2.0
    defect = 0.0
    for k, step in enumerate(samples):
        if plus[k].shape[1] and minus[k].shape[1]:
            floor = min(floor, float(np.min(subspace_angles(plus[k], minus[k]))))
        if k + 1 < len(samples):
            transport = source.product(step, samples[k + 1])
            for bases in (plus, minus):
                if bases[k].shape[1] and bases[k].shape[1] < source.dim:
                    defect = max(defect, _max_angle(_orthonormal(transport @ bases[k]), bases[k + 1]))
    return floor, defect


def _assemble(source, dims, horizon, samples, chunk, convergence, exponents, method, probe_steps, seed,
              plus, minus) -> Splitting:
    floor, defect = _diagnostics(source, plus, minus, samples, chunk)
    fit = fit_dichotomy(source, plus[0], minus[0], probe_steps, chunk, n_random=4, seed=seed)
    return Splitting(
        times=np.array(samples, dtype=float) * source.h,
        plus=np.array(plus).reshape(len(samples), source.dim, dims[1]),
        minus=np.array(minus).reshape(len(samples), source.dim, dims[0]),
        dims=dims,
        source=source,
        sample_every=chunk,
        horizon=float(horizon),
        convergence=float(convergence),
        angle_floor=float(floor),
        invariance_defect=float(defect),
        exponents=np.asarray(exponents, dtype=float),
        dichotomy=(fit.c_hat, fit.lambda_hat),
        method=method,
    )


def _closes(spec: SystemSpec, u: ControlSignal, x_ref: np.ndarray):
    segment = integrate(spec, x_ref, u, period_length(u))
    if np.linalg.norm(segment.final_state - x_ref) <= settings.CLOSURE_TOL:
        return segment
    return None


def _window_source(spec, u, x_ref, horizon, tau, region: Optional[Region]) -> StepMapSource:
    past = integrate_backward(spec, x_ref, u, horizon)
    future = integrate(spec, x_ref, u, tau + horizon)
    if region is not None:
        states = np.vstack([past.states, future.states])
        if not np.all(region.contains(states, tol=1e-9)):
            raise ConfigError(f"trajectory through {x_ref.tolist()} leaves region {region.name!r} on the window")
    maps = np.concatenate([past.step_maps, future.step_maps])
    return StepMapSource(maps=maps, h=future.h, origin=len(past.step_maps))


def estimate_splitting(
    spec: SystemSpec,
    u: ControlSignal,
    x_ref,
    dims: Optional[Dims] = None,
    tau: float = 0.0,
    horizon: Optional[float] = None,
    region: Optional[Region] = None,
    require_gap: bool = True,
    tol: Optional[float] = None,
    seed: int = 0,
) -> Splitting:
    """
    Splitting along (u, x_ref) sampled every control block on [0, tau].

    Periodic controls whose trajectory through x_ref closes reuse one period
    of step maps; otherwise the trajectory is integrated on [-T, tau + T].
    """
    tol = settings.TOL_SPLIT if tol is None else tol
    x_ref = np.asarray(x_ref, dtype=float).reshape(spec.dim)
    chunk = spec.substeps
    samples = [k * chunk for k in range(step_count(tau, spec.delta) + 1)]
    horizon = settings.SPLITTING_HORIZON if horizon is None else horizon
    horizon = max(spec.delta, round(horizon / spec.delta) * spec.delta)
    periodic_segment = _closes(spec, u, x_ref) if u.is_periodic else None
    if periodic_segment is not None and region is not None:
        if not np.all(region.contains(periodic_segment.states, tol=1e-9)):
            raise ConfigError(f"periodic orbit through {x_ref.tolist()} leaves region {region.name!r}")

    while True:
        if periodic_segment is not None:
            source = periodic_source(periodic_segment)
        else:
            source = _window_source(spec, u, x_ref, horizon, tau, region)
        n_horizon = step_count(horizon, spec.h_int)
        exponents = product_log_singular_values(source.window(0, n_horizon)) / horizon
        if dims is None:
            current_dims = detect_dimensions(exponents, require_gap=require_gap)
        else:
            current_dims = tuple(dims)
            if sum(current_dims) != spec.dim or min(current_dims) < 0:
                raise DimensionMismatchError(f"dims {current_dims} do not add up to d={spec.dim}")
        gap = check_gap(exponents, current_dims) if require_gap else 0.0

        rng = np.random.default_rng(seed)
        plus, minus = _iterate(source, current_dims, n_horizon, samples, chunk, rng)
        half = (n_horizon // 2 // chunk) * chunk
        rng = np.random.default_rng(seed)
        plus_half, minus_half = _iterate(source, current_dims, half, samples, chunk, rng)
        convergence = max(
            [_max_angle(a, b) for a, b in zip(plus, plus_half)] + [_max_angle(a, b) for a, b in zip(minus, minus_half)]
        )
        long_enough = gap == 0.0 or math.isinf(gap) or math.exp(-gap * horizon) < 1e-8
        if convergence <= tol and long_enough:
            break
        if horizon * 2 > settings.SPLITTING_MAX_HORIZON:
            raise NonConvergenceError(
                f"splitting did not converge by T={horizon} (distance {convergence:.3e} > {tol:.1e})"
            )
        logger.info(f"Splitting distance {convergence:.3e} at T={horizon}; doubling the horizon")
        horizon *= 2

    probe_steps = min(step_count(5.0, spec.h_int) // chunk * chunk or chunk, n_horizon)
    splitting = _assemble(source, current_dims, horizon, samples, chunk, convergence, exponents,
                          "iteration", probe_steps, seed, plus, minus)
    logger.info(
        f"Estimated splitting dims={current_dims} T={horizon} convergence={convergence:.2e} "
        f"angle_floor={splitting.angle_floor:.3f}"
    )
    return splitting


def periodic_splitting(
    spec: SystemSpec,
    u: ControlSignal,
    x0,
    dims: Optional[Dims] = None,
    tau: Optional[float] = None,
    segment=None,
    seed: int = 0,
) -> Splitting:
    """
    Exact splitting along a periodic orbit: E+(0) and E-(0) are the invariant
    subspaces of the monodromy for multipliers outside / inside the unit circle.
    """
    x0 = np.asarray(x0, dtype=float).reshape(spec.dim)
    period = period_length(u)
    if segment is None:
        segment = integrate(spec, x0, u, period)
    defect = float(np.linalg.norm(segment.final_state - x0))
    if defect > settings.CLOSURE_TOL:
        raise ClosureError(defect, settings.CLOSURE_TOL)
    M = segment.fundamental()
    moduli = np.abs(np.linalg.eigvals(M))
    if np.any(np.abs(np.log(np.maximum(moduli, 1e-300))) / period < settings.MIN_EXPONENT_GAP / 2.0):
        raise DimensionMismatchError(f"monodromy has multipliers on the unit circle: {np.round(moduli, 8).tolist()}")
    _, Z_out, d_plus = schur(M, output="real", sort="ouc")
    _, Z_in, d_minus = schur(M, output="real", sort="iuc")
    if dims is not None and tuple(dims) != (d_minus, d_plus):
        raise DimensionMismatchError(f"requested dims {tuple(dims)} but the monodromy gives {(d_minus, d_plus)}")
    source = periodic_source(segment)
    chunk = spec.substeps
    tau = period if tau is None else tau
    samples = [k * chunk for k in range(step_count(tau, spec.delta) + 1)]
    plus = _forward_iteration(source, Z_out[:, :d_plus], 0, samples, chunk) if d_plus else [np.zeros((spec.dim, 0))] * len(samples)
    minus = _forward_iteration(source, Z_in[:, :d_minus], 0, samples, chunk) if d_minus else [np.zeros((spec.dim, 0))] * len(samples)
    with np.errstate(divide="ignore"):
        exponents = np.sort(np.log(moduli) / period)[::-1]
    probe_steps = max(chunk, min(step_count(5.0, spec.h_int), 4 * segment.n_steps) // chunk * chunk)
    return _assemble(source, (d_minus, d_plus), 0.0, samples, chunk, 0.0, exponents, "floquet", probe_steps, seed,
                     plus, minus)
