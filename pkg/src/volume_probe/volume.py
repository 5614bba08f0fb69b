"""
Hit-or-miss Monte Carlo volumes of Bowen balls and the volume-lemma check.

B^tau_u(x, eps) holds the y whose trajectory stays strictly within eps of
the trajectory of x on [0, tau] (checked at the integrator nodes). Samples
are drawn from the eps-ball around x or from a box around the linearised
Bowen ball. The box contains the ball only for fields affine in x, so
"auto" takes it only there, and only when it is much smaller than the
eps-ball.
"""

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from scipy.special import gammaln

from ..cocycle_lab import frame_volume_growth
from ..flow_engine import FlowSegment, integrate, integrate_batch, step_count
from ..hyperbolic_splitting import Splitting, verify_hyperbolicity
from ..shared.errors import ConfigError
from ..shared.parallel import map_ordered
from ..shared.schemas.estimators import VolumeConfig
from ..shared.schemas.reports import VolumeRow, VolumeSeriesReport
from ..system_model import ControlSignal, SystemSpec

logger = logging.getLogger(__name__)

SplittingProvider = Union[Splitting, Callable[[SystemSpec, ControlSignal, np.ndarray], Splitting], None]


@dataclass
class VolumeEstimate:
    volume: float
    stderr: float
    hits: int
    samples: int
    proposal: str
    proposal_volume: float

    @property
    def upper_only(self) -> bool:
        return self.hits == 0

    @property
    def upper_bound(self) -> float:
        """Rule-of-three bound when nothing hit."""
        return self.proposal_volume * 3.0 / self.samples if self.hits == 0 else self.volume


def ball_volume(dim: int, radius: float) -> float:
    return float(math.exp(0.5 * dim * math.log(math.pi) - gammaln(0.5 * dim + 1.0) + dim * math.log(radius)))


def _ball_samples(rng: np.random.Generator, n: int, dim: int, radius: float) -> np.ndarray:
    direction = rng.standard_normal((n, dim))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return direction * radius * rng.uniform(size=(n, 1)) ** (1.0 / dim)


def linearised_box(segment: FlowSegment, eps: float, inflation: float) -> np.ndarray:
    """
    Half widths of a box around the linearised Bowen ball: |dy_i| is at most
    eps times the norm of row i of Phi(t)^-1 for every node t.
    """
    inverses = np.linalg.inv(segment.fundamentals)
    rows = np.linalg.norm(inverses, axis=2).min(axis=0)
    return np.minimum(eps, inflation * eps * rows)


def bowen_ball_volume(
    spec: SystemSpec,
    u: ControlSignal,
    x,
    eps: float,
    tau: float,
    samples: int = 100000,
    seed: int = 0,
    proposal: str = "auto",
    partitions: int = 8,
    inflation: float = 2.0,
    workers: int = 1,
) -> VolumeEstimate:
    """Volume estimate and standard error; identical (seed, samples, partitions) give identical results."""
    if eps <= 0:
        raise ConfigError("eps must be positive")
    x = np.asarray(x, dtype=float).reshape(spec.dim)
    n_steps = step_count(tau, spec.h_int)
    use_box = proposal == "box" or (proposal == "auto" and spec.is_affine)
    center = integrate(spec, x, u, tau, with_variational=use_box)
    ball = ball_volume(spec.dim, eps)
    half = None
    if use_box and n_steps:
        half = linearised_box(center, eps, inflation)
        if proposal == "auto" and np.prod(2.0 * half) >= 0.5 * ball:
            half = None
    kind = "ball" if half is None else "box"
    volume = ball if half is None else float(np.prod(2.0 * half))

    counts = [samples // partitions + (1 if k < samples % partitions else 0) for k in range(partitions)]
    seeds = np.random.SeedSequence(seed).spawn(partitions)

    def run(item) -> int:
        count, child = item
        if count == 0:
            return 0
        rng = np.random.default_rng(child)
        if half is None:
            offsets = _ball_samples(rng, count, spec.dim, eps)
        else:
            offsets = rng.uniform(-half, half, size=(count, spec.dim))
        inside = np.linalg.norm(offsets, axis=1) < eps
        Y = x + offsets[inside]
        if not n_steps or Y.shape[0] == 0:
            return int(Y.shape[0])
        result = integrate_batch(
            spec, Y, u, tau,
            monitor=lambda step, t, X, rows: np.linalg.norm(X - center.states[step], axis=1) < eps,
        )
        return int(np.sum(result.alive & ~result.blown))

    hits = sum(map_ordered(run, list(zip(counts, seeds)), workers))
    p = hits / samples
    estimate = VolumeEstimate(
        volume=p * volume,
        stderr=volume * math.sqrt(p * (1.0 - p) / samples),
        hits=hits,
        samples=samples,
        proposal=kind,
        proposal_volume=volume,
    )
    if hits == 0:
        logger.warning(f"No sample hit the Bowen ball at tau={tau}; volume below {estimate.upper_bound:.3e}")
    return estimate


def _resolve(provider: SplittingProvider, spec, u, x) -> Optional[Splitting]:
    if provider is None or isinstance(provider, Splitting):
        return provider
    return provider(spec, u, x)


def volume_lemma_check(
    spec: SystemSpec,
    splitting: SplittingProvider,
    u: ControlSignal,
    x,
    eps: float,
    horizons: Sequence[float],
    config: Optional[VolumeConfig] = None,
) -> VolumeSeriesReport:
    """
    vol(B^tau) * J+(tau) over the horizons. Without a splitting J+ = 1 (no
    unstable directions). The series is flagged when its max/min ratio,
    widened by two standard errors, exceeds the threshold or when log product
    has a log-log slope in tau beyond the slope threshold.
    """
    config = config or VolumeConfig()
    x = np.asarray(x, dtype=float).reshape(spec.dim)
    horizons = sorted(float(t) for t in horizons)
    if not horizons:
        raise ConfigError("volume check needs at least one horizon")
    resolved = _resolve(splitting, spec, u, x)
    segment = integrate(spec, x, u, horizons[-1])
    if resolved is not None and resolved.dims[1]:
        log_j = frame_volume_growth(segment.step_maps, resolved.plus_basis(0))
    else:
        log_j = np.zeros(segment.n_steps + 1)

    rows: List[VolumeRow] = []
    for tau in horizons:
        estimate = bowen_ball_volume(
            spec, u, x, eps, tau,
            samples=config.samples,
            seed=config.seed,
            proposal=config.proposal,
            partitions=config.partitions,
            inflation=config.inflation,
            workers=config.workers,
        )
        j_plus = float(np.exp(log_j[step_count(tau, spec.h_int)]))
        rows.append(VolumeRow(
            tau=tau,
            volume=estimate.volume if estimate.hits else estimate.upper_bound,
            stderr=estimate.stderr,
            hits=estimate.hits,
            samples=estimate.samples,
            j_plus=j_plus,
            product=(estimate.volume if estimate.hits else estimate.upper_bound) * j_plus,
            proposal=estimate.proposal,
            upper_only=estimate.upper_only,
        ))
        logger.info(f"tau={tau}: volume {estimate.volume:.4e} +- {estimate.stderr:.1e}, J+ {j_plus:.4e}")

    measured = [r for r in rows if not r.upper_only]
    products = np.array([r.product for r in measured])
    errors = np.array([r.stderr * r.j_plus for r in measured])
    if len(measured):
        ratio = float(products.max() / products.min())
        floor = products.min() - 2.0 * errors[np.argmin(products)]
        ceiling = products.max() + 2.0 * errors[np.argmax(products)]
        inflated = float(ceiling / floor) if floor > 0 else math.inf
    else:
        ratio = inflated = math.inf
    positive = [r for r in measured if r.tau > 0]
    if len(positive) >= 2:
        slope = float(np.polyfit(np.log([r.tau for r in positive]), np.log([r.product for r in positive]), 1)[0])
    else:
        slope = 0.0
    flagged = inflated > config.threshold or abs(slope) > config.slope_threshold or len(measured) < len(rows)

    verification = None
    if resolved is not None:
        verification = verify_hyperbolicity(spec, resolved, seed=config.seed)
    if flagged:
        logger.warning(f"Volume products drift: ratio {ratio:.3f}, log-log slope {slope:.3f}")
    return VolumeSeriesReport(
        eps=eps,
        rows=rows,
        ratio=ratio,
        inflated_ratio=inflated,
        loglog_slope=slope,
        flagged=flagged,
        threshold=config.threshold,
        verification=verification,
    )


def write_volume_csv(report: VolumeSeriesReport, path: Union[str, Path]) -> Path:
    """Columns: tau, vol, stderr, J+, product (plus hit counts and the proposal)."""
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["tau", "vol", "stderr", "J+", "product", "hits", "samples", "proposal"])
        for row in report.rows:
            writer.writerow([repr(row.tau), repr(row.volume), repr(row.stderr), repr(row.j_plus),
                             repr(row.product), row.hits, row.samples, row.proposal])
    return path
