"""
Fixed-step RK4 integration of the controlled ODE and its variational equation.

Each step also produces the step transition map Psi_k ~ (d phi)(t_{k+1} <- t_k),
obtained by applying the same RK4 scheme to P' = J P with P(t_k) = I. The
scheme is linear in P, so the product of step maps is exactly the RK4
solution of the variational equation from the identity; keeping the factors
lets long-horizon cocycles be evaluated without forming ill-conditioned
products.
"""

import csv
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from ..shared.errors import BlowUpError, ExprDomainError, GridAlignmentError
from ..system_model import ControlSignal, SystemSpec
from config.settings import settings

logger = logging.getLogger(__name__)

# monitor(step, t, X_active, active_rows) -> bool mask of rows to keep running
Monitor = Callable[[int, float, np.ndarray, np.ndarray], np.ndarray]
Controls = Union[ControlSignal, np.ndarray]


def step_count(duration: float, h: float) -> int:
    """Number of steps of size h in duration; the duration must be a multiple of h."""
    if duration < 0:
        raise GridAlignmentError(f"duration must be non-negative, got {duration}")
    n = duration / h
    rounded = int(round(n))
    if abs(n - rounded) > 1e-7 * max(1.0, n):
        raise GridAlignmentError(f"duration {duration} is not a multiple of the integrator step {h}")
    return rounded


def _control_lookup(spec: SystemSpec, controls: Controls, n: int) -> Callable[[int], np.ndarray]:
    """Map a block index to the (n, m) control values in force on that block."""
    if isinstance(controls, ControlSignal):
        return lambda block: np.broadcast_to(np.asarray(controls.block_value(block), dtype=float), (n, spec.inputs))
    arr = np.asarray(controls, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim == 2:
        constant = np.broadcast_to(arr, (n, spec.inputs))
        return lambda block: constant
    if arr.ndim == 3:
        # schedule (blocks, n, m) starting at block 0
        def lookup(block: int) -> np.ndarray:
            if not 0 <= block < arr.shape[0]:
                raise GridAlignmentError(f"control schedule has no block {block}")
            return arr[block]
        return lookup
    raise ValueError(f"unsupported control array shape {arr.shape}")


def rk4_step(spec: SystemSpec, X: np.ndarray, U: np.ndarray, h: float, with_maps: bool = False):
    """One RK4 step for every row of X; returns (X_next, step maps or None)."""
    k1 = spec.vector_field(X, U)
    X2 = X + 0.5 * h * k1
    k2 = spec.vector_field(X2, U)
    X3 = X + 0.5 * h * k2
    k3 = spec.vector_field(X3, U)
    X4 = X + h * k3
    k4 = spec.vector_field(X4, U)
    X_next = X + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not with_maps:
        return X_next, None
    eye = np.eye(spec.dim)
    K1 = spec.jacobian(X, U)
    K2 = spec.jacobian(X2, U) @ (eye + 0.5 * h * K1)
    K3 = spec.jacobian(X3, U) @ (eye + 0.5 * h * K2)
    K4 = spec.jacobian(X4, U) @ (eye + h * K3)
    maps = eye + (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4)
    return X_next, maps


@dataclass
class BatchResult:
    """Outcome of integrate_batch; rows that stopped keep their last state."""
    final: np.ndarray
    alive: np.ndarray
    blown: np.ndarray
    times: np.ndarray
    states: Optional[np.ndarray] = None
    maps: Optional[np.ndarray] = None


def integrate_batch(
    spec: SystemSpec,
    X0: np.ndarray,
    controls: Controls,
    tau: float,
    start_time: float = 0.0,
    h: Optional[float] = None,
    backward: bool = False,
    with_maps: bool = False,
    record: bool = False,
    monitor: Optional[Monitor] = None,
    strict: bool = False,
) -> BatchResult:
    """
    Integrate many initial states over a duration tau.

    With backward=True the time runs from start_time down to start_time - tau
    and the recorded step maps are the backward maps (inverted by the caller
    when forward maps are needed). In strict mode a non-finite state raises
    ExprDomainError and leaving the blow-up guard raises BlowUpError;
    otherwise the offending rows are flagged in `blown` and stopped.
    """
    h = spec.h_int if h is None else h
    n_steps = step_count(tau, h)
    X = np.array(np.atleast_2d(X0), dtype=float)
    n = X.shape[0]
    lookup = _control_lookup(spec, controls, n)
    sign = -1.0 if backward else 1.0
    alive = np.ones(n, dtype=bool)
    blown = np.zeros(n, dtype=bool)
    times = start_time + sign * h * np.arange(n_steps + 1)
    states = np.empty((n_steps + 1, n, spec.dim)) if record else None
    maps = np.empty((n_steps, n, spec.dim, spec.dim)) if with_maps else None
    if record:
        states[0] = X
    guard = settings.BLOWUP_GUARD

    for step in range(n_steps):
        t = times[step]
        rows = np.flatnonzero(alive)
        if rows.size == 0:
            if record:
                states[step + 1:] = X
            if with_maps:
                maps[step:] = np.eye(spec.dim)
            break
        block = math.floor((t + sign * 0.5 * h) / spec.delta)
        U = lookup(block)[rows]
        X_next, step_maps = rk4_step(spec, X[rows], U, sign * h, with_maps)
        finite = np.all(np.isfinite(X_next), axis=1)
        if step_maps is not None:
            finite &= np.all(np.isfinite(step_maps), axis=(1, 2))
        norms = np.linalg.norm(np.where(finite[:, None], X_next, 0.0), axis=1)
        bad = ~finite | (norms > guard)
        if np.any(bad):
            if strict:
                if not np.all(finite):
                    raise ExprDomainError(f"vector field produced non-finite values near t={t:.6g}")
                raise BlowUpError(float(times[step + 1]), float(norms[bad].max()))
            blown[rows[bad]] = True
            alive[rows[bad]] = False
            logger.debug(f"{int(bad.sum())} trajectories left the blow-up guard at t={times[step + 1]:.6g}")
        good = rows[~bad]
        X[good] = X_next[~bad]
        if with_maps:
            maps[step] = np.eye(spec.dim)
            maps[step, good] = step_maps[~bad]
        if monitor is not None and good.size:
            keep = np.asarray(monitor(step + 1, float(times[step + 1]), X[good], good), dtype=bool)
            alive[good[~keep]] = False
        if record:
            states[step + 1] = X
    return BatchResult(final=X, alive=alive, blown=blown, times=times, states=states, maps=maps)


@dataclass(frozen=True)
class FlowSegment:
    """
    Trajectory t_k -> x_k with the step transition maps between nodes.

    step_maps[k] maps tangent vectors at t_k to t_{k+1}; fundamentals[k] is
    their product, with fundamentals[0] = I.
    """
    times: np.ndarray
    states: np.ndarray
    step_maps: Optional[np.ndarray]
    x0: np.ndarray
    control: ControlSignal
    h: float

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @cached_property
    def fundamentals(self) -> np.ndarray:
        if self.step_maps is None:
            raise ValueError("segment was integrated without the variational equation")
        d = self.states.shape[1]
        out = np.empty((self.n_steps + 1, d, d))
        out[0] = np.eye(d)
        for k, step_map in enumerate(self.step_maps):
            out[k + 1] = step_map @ out[k]
        return out

    def fundamental(self, k: int = -1) -> np.ndarray:
        return self.fundamentals[k]

    def transition(self, i: int, j: int) -> np.ndarray:
        """Phi(t_j <- t_i) for i <= j as a product of step maps."""
        d = self.states.shape[1]
        result = np.eye(d)
        for step_map in self.step_maps[i:j]:
            result = step_map @ result
        return result

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Columns: t, x1..xd and, with maps, phi_r_c of the fundamental matrix (row-major)."""
        path = Path(path)
        d = self.states.shape[1]
        header = ["t"] + [f"x{i + 1}" for i in range(d)]
        with_maps = self.step_maps is not None
        if with_maps:
            header += [f"phi_{r + 1}_{c + 1}" for r in range(d) for c in range(d)]
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            for k, t in enumerate(self.times):
                row = [repr(float(t))] + [repr(float(v)) for v in self.states[k]]
                if with_maps:
                    row += [repr(float(v)) for v in self.fundamentals[k].ravel()]
                writer.writerow(row)
        return path


def integrate(
    spec: SystemSpec,
    x0,
    u: Controls,
    tau: float,
    with_variational: bool = True,
    start_time: float = 0.0,
    h: Optional[float] = None,
) -> FlowSegment:
    """phi(t, x0, u) and its fundamental matrices on [start_time, start_time + tau]."""
    x0 = np.asarray(x0, dtype=float).reshape(spec.dim)
    result = integrate_batch(
        spec, x0[None, :], u, tau, start_time=start_time, h=h,
        with_maps=with_variational, record=True, strict=True,
    )
    maps = result.maps[:, 0] if with_variational else None
    control = u if isinstance(u, ControlSignal) else ControlSignal.constant(np.asarray(u).ravel(), spec.delta)
    return FlowSegment(
        times=result.times,
        states=result.states[:, 0],
        step_maps=maps,
        x0=x0,
        control=control,
        h=h or spec.h_int,
    )


def integrate_backward(
    spec: SystemSpec,
    x0,
    u: Controls,
    tau: float,
    with_variational: bool = True,
    start_time: float = 0.0,
    h: Optional[float] = None,
) -> FlowSegment:
    """Segment on [start_time - tau, start_time] ending at x0, with forward step maps."""
    x0 = np.asarray(x0, dtype=float).reshape(spec.dim)
    result = integrate_batch(
        spec, x0[None, :], u, tau, start_time=start_time, h=h, backward=True,
        with_maps=with_variational, record=True, strict=True,
    )
    maps = None
    if with_variational:
        maps = np.linalg.inv(result.maps[::-1, 0])
    states = result.states[::-1, 0]
    control = u if isinstance(u, ControlSignal) else ControlSignal.constant(np.asarray(u).ravel(), spec.delta)
    return FlowSegment(
        times=result.times[::-1].copy(),
        states=states.copy(),
        step_maps=maps,
        x0=states[0].copy(),
        control=control,
        h=h or spec.h_int,
    )


def bowen_distance(spec: SystemSpec, u: Controls, x, y, tau: float, h: Optional[float] = None) -> float:
    """max over integrator nodes in [0, tau] of |phi(t,x,u) - phi(t,y,u)|."""
    X0 = np.vstack([np.asarray(x, dtype=float).reshape(spec.dim), np.asarray(y, dtype=float).reshape(spec.dim)])
    result = integrate_batch(spec, X0, u, tau, h=h, record=True, strict=True)
    gaps = np.linalg.norm(result.states[:, 0] - result.states[:, 1], axis=1)
    return float(gaps.max())
