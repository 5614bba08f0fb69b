"""
Cocycles along lifted trajectories: the subadditive exterior cocycle
alpha_t(u, x) = log+ |Lambda (d phi_{t,u})_x| and additive determinant
cocycles, full-space or restricted to a tracked subspace.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
from scipy.integrate import simpson

from ..flow_engine import FlowSegment, integrate
from ..shared.errors import DegenerateBasisError
from ..system_model import ControlSignal, SystemSpec
from .exterior import exterior_trace_values

logger = logging.getLogger(__name__)

_MAX_FRAME_COND = 1e12


@dataclass(frozen=True)
class CocycleTrace:
    """Values a_k (nats) of a cocycle at the nodes t_k of a segment."""
    times: np.ndarray
    values: np.ndarray
    kind: str  # exterior | det | additive
    x0: np.ndarray
    control: ControlSignal

    @property
    def final(self) -> float:
        return float(self.values[-1])

    def rate(self) -> float:
        """a(T)/T at the last node (0 for an empty horizon)."""
        duration = float(self.times[-1] - self.times[0])
        return self.final / duration if duration > 0 else 0.0

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t", "value", "rate"])
            for t, value in zip(self.times, self.values):
                rate = value / t if t > 0 else 0.0
                writer.writerow([repr(float(t)), repr(float(value)), repr(float(rate))])
        return path


def node_controls(spec: SystemSpec, u: ControlSignal, times: np.ndarray) -> np.ndarray:
    """Control values at the nodes; the last node takes the value of the block it closes."""
    values = [u.value_at(t) for t in times[:-1]]
    values.append(u.value_at(times[-1] - 1e-9 * u.delta) if len(times) > 1 else u.value_at(times[-1]))
    return np.array(values, dtype=float).reshape(len(times), spec.inputs)


def _segment(spec, u, x0, tau, segment):
    if segment is not None:
        return segment
    return integrate(spec, x0, u, tau)


def alpha(
    spec: SystemSpec,
    u: ControlSignal,
    x0,
    tau: float,
    segment: Optional[FlowSegment] = None,
) -> CocycleTrace:
    """Exterior cocycle trace; a_0 = 0 and every a_k >= 0."""
    segment = _segment(spec, u, x0, tau, segment)
    values = np.array(exterior_trace_values(segment.step_maps))
    return CocycleTrace(times=segment.times, values=values, kind="exterior", x0=segment.x0, control=segment.control)


def frame_volume_growth(step_maps, frame: np.ndarray) -> np.ndarray:
    """
    log of the volume growth of span(frame) under the step maps, at every node.

    The frame is re-orthonormalised by QR after each map; the accumulated
    log|diag R| is exactly additive along the trajectory.
    """
    frame = np.asarray(frame, dtype=float)
    values = np.zeros(len(step_maps) + 1)
    if frame.shape[1] == 0:
        return values
    s = np.linalg.svd(frame, compute_uv=False)
    if s[-1] == 0.0 or s[0] / s[-1] > _MAX_FRAME_COND:
        raise DegenerateBasisError("tracked subspace basis is rank deficient")
    Q, R = np.linalg.qr(frame)
    total = 0.0
    for k, step_map in enumerate(step_maps):
        Q, R = np.linalg.qr(step_map @ Q)
        diag = np.abs(np.diag(R))
        if np.any(diag == 0.0) or not np.all(np.isfinite(diag)):
            raise DegenerateBasisError(f"tracked subspace collapsed at step {k}")
        total += float(np.sum(np.log(diag)))
        values[k + 1] = total
    return values


def det_cocycle(
    spec: SystemSpec,
    u: ControlSignal,
    x0,
    tau: float,
    subspace=None,
    segment: Optional[FlowSegment] = None,
) -> CocycleTrace:
    """
    log|det (d phi_t)_x restricted to a subspace|.

    subspace: None for the full space, a d x p basis matrix, or a Splitting
    (its unstable basis at time 0 is transported).
    """
    segment = _segment(spec, u, x0, tau, segment)
    if subspace is None:
        logdets = np.linalg.slogdet(segment.step_maps)[1] if segment.n_steps else np.zeros(0)
        values = np.concatenate([[0.0], np.cumsum(logdets)])
    else:
        frame = subspace.plus_basis(0) if hasattr(subspace, "plus_basis") else subspace
        values = frame_volume_growth(segment.step_maps, frame)
    return CocycleTrace(times=segment.times, values=values, kind="det", x0=segment.x0, control=segment.control)


def liouville_integral(spec: SystemSpec, segment: FlowSegment) -> float:
    """int_0^t trace(dF/dx) along the segment (Simpson rule on the nodes)."""
    t = segment.times
    if len(t) < 2:
        return 0.0
    J = spec.jacobian(segment.states, node_controls(spec, segment.control, t))
    return float(simpson(np.trace(J, axis1=1, axis2=2), x=t))


def additive_cocycle(
    spec: SystemSpec,
    u: ControlSignal,
    x0,
    tau: float,
    density: Callable[[np.ndarray, np.ndarray], np.ndarray],
    segment: Optional[FlowSegment] = None,
) -> CocycleTrace:
    """User additive cocycle int_0^t g(x(s), u(s)) ds by the trapezoid rule on the nodes."""
    segment = _segment(spec, u, x0, tau, segment)
    t = segment.times
    g = np.asarray(density(segment.states, node_controls(spec, u, t)), dtype=float)
    increments = 0.5 * (g[1:] + g[:-1]) * np.diff(t)
    values = np.concatenate([[0.0], np.cumsum(increments)])
    return CocycleTrace(times=t, values=values, kind="additive", x0=segment.x0, control=segment.control)
