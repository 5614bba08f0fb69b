"""
Spanning-set counts r(tau, K, Q): the fewest controls such that every point
of K is kept inside Q on [0, tau] by one of them.

Candidates come from a generator (by default a steering search over a
quantized alphabet), coverage is evaluated by batch integration, and a
greedy set cover picks the controls.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Protocol, Sequence, Tuple, Union

import numpy as np

from ..flow_engine import integrate_batch, step_count
from ..shared.errors import AdmissibilityError, ConfigError
from ..shared.parallel import map_ordered
from ..shared.schemas.estimators import SpanningConfig
from ..shared.schemas.reports import SpanningReport, SpanningRow
from ..system_model import ControlSignal, Region, SystemSpec, quantize_controls

logger = logging.getLogger(__name__)


class CandidateGenerator(Protocol):
    description: str

    def __call__(self, spec: SystemSpec, points: np.ndarray, q_region: Region, tau: float) -> np.ndarray:
        """Candidate controls as block values, shape (C, tau/delta, m)."""


def _inside(q_region: Region):
    def monitor(step, t, X, rows):
        return q_region.contains(X)
    return monitor


class FeedbackCandidateGenerator:
    """
    One candidate per point: on each switching interval pick the letter that
    keeps the point in Q and ends closest to the centre of Q (scaled max
    norm); points the greedy choice loses are searched depth-first.
    """

    def __init__(self, levels: int = 3, switch_step: float = 0.5, backtrack_limit: int = 2000):
        self.levels = levels
        self.switch_step = switch_step
        self.backtrack_limit = backtrack_limit
        self.description = f"feedback steering, {levels} levels per axis, switching every {switch_step}"

    def _advance(self, spec, X, letters, q_region, start):
        """End states and scores of X under each letter over one switching interval."""
        ends, scores = [], []
        for letter in letters:
            result = integrate_batch(spec, X, letter[None, :], self.switch_step, start_time=start,
                                     monitor=_inside(q_region))
            ok = result.alive & ~result.blown
            score = np.max(np.abs(result.final - q_region.center) / q_region.half_widths, axis=1)
            ends.append(result.final)
            scores.append(np.where(ok, score, np.inf))
        return np.array(ends), np.array(scores)

    def _search(self, spec, x, letters, q_region, depth, n_switch, budget):
        if depth == n_switch:
            return []
        if budget[0] <= 0:
            return None
        budget[0] -= 1
        ends, scores = self._advance(spec, x[None, :], letters, q_region, depth * self.switch_step)
        for w in np.argsort(scores[:, 0], kind="stable"):
            if not np.isfinite(scores[w, 0]):
                break
            rest = self._search(spec, ends[w, 0], letters, q_region, depth + 1, n_switch, budget)
            if rest is not None:
                return [int(w)] + rest
        return None

    def __call__(self, spec, points, q_region, tau):
        n_switch = step_count(tau, self.switch_step)
        blocks_per_switch = step_count(self.switch_step, spec.delta)
        letters = quantize_controls(spec, self.levels)
        choices = np.zeros((len(points), n_switch), dtype=int)
        X = np.array(points, dtype=float)
        failed = np.zeros(len(points), dtype=bool)
        for s in range(n_switch):
            active = np.flatnonzero(~failed)
            if active.size == 0:
                break
            ends, scores = self._advance(spec, X[active], letters, q_region, s * self.switch_step)
            best = np.argmin(scores, axis=0)
            best_score = scores[best, np.arange(active.size)]
            lost = ~np.isfinite(best_score)
            failed[active[lost]] = True
            kept = active[~lost]
            choices[kept, s] = best[~lost]
            X[kept] = ends[best[~lost], np.flatnonzero(~lost)]

        uncoverable = []
        for i in np.flatnonzero(failed):
            path = self._search(spec, np.asarray(points[i], dtype=float), letters, q_region, 0, n_switch,
                                [self.backtrack_limit])
            if path is None:
                uncoverable.append(points[i])
            else:
                choices[i] = path
        if uncoverable:
            raise AdmissibilityError(uncoverable)
        unique = np.unique(choices, axis=0)
        schedules = letters[unique]  # (C, n_switch, m)
        return np.repeat(schedules, blocks_per_switch, axis=1)


@dataclass
class SpanningResult:
    tau: float
    points: np.ndarray
    q_region: Region
    description: str
    candidates: np.ndarray
    selected: List[int]
    witness: np.ndarray
    delta: float
    verification_failures: List[int] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.selected)

    def selected_controls(self) -> List[ControlSignal]:
        return [ControlSignal.from_array(self.candidates[c], self.delta) for c in self.selected]

    def to_row(self) -> SpanningRow:
        return SpanningRow(
            tau=self.tau,
            count=self.count,
            rate=math.log(self.count) / self.tau if self.tau > 0 else 0.0,
            candidates=int(len(self.candidates)),
            verification_failures=len(self.verification_failures),
        )


def _coverage(spec, points, q_region, tau, candidates, config: SpanningConfig) -> np.ndarray:
    """Boolean matrix (C, N): candidate c keeps point n inside Q on [0, tau]."""
    n_points = len(points)
    per_group = max(1, config.chunk_pairs // max(1, n_points))
    groups = [list(range(a, min(a + per_group, len(candidates)))) for a in range(0, len(candidates), per_group)]

    def evaluate(group: List[int]) -> np.ndarray:
        X0 = np.tile(points, (len(group), 1))
        schedule = np.repeat(candidates[group], n_points, axis=0)  # (pairs, blocks, m)
        result = integrate_batch(spec, X0, np.transpose(schedule, (1, 0, 2)), tau, monitor=_inside(q_region))
        return (result.alive & ~result.blown).reshape(len(group), n_points)

    blocks = map_ordered(evaluate, groups, config.workers)
    return np.vstack(blocks) if blocks else np.zeros((0, n_points), dtype=bool)


def greedy_cover(coverage: np.ndarray) -> Tuple[List[int], np.ndarray]:
    """Greedy set cover; ties go to the lowest candidate index. Returns (selected, witness per point)."""
    n_points = coverage.shape[1]
    covered = np.zeros(n_points, dtype=bool)
    witness = np.full(n_points, -1, dtype=int)
    selected: List[int] = []
    while not covered.all():
        gains = coverage[:, ~covered].sum(axis=1)
        best = int(np.argmax(gains))
        if gains[best] == 0:
            break
        newly = coverage[best] & ~covered
        witness[newly] = best
        covered |= coverage[best]
        selected.append(best)
    return selected, witness


def _reverify(spec, points, q_region, tau, candidates, witness) -> List[int]:
    tol = 1e-5 * float(np.max(q_region.half_widths))
    schedule = np.transpose(candidates[witness], (1, 0, 2))
    result = integrate_batch(
        spec, points, schedule, tau, h=spec.h_int / 2.0,
        monitor=lambda step, t, X, rows: q_region.contains(X, tol=tol),
    )
    return np.flatnonzero(~(result.alive & ~result.blown)).tolist()


def spanning_count(
    spec: SystemSpec,
    points: np.ndarray,
    q_region: Region,
    tau: float,
    generator: Optional[CandidateGenerator] = None,
    config: Optional[SpanningConfig] = None,
) -> SpanningResult:
    """Estimate r(tau, K, Q) for the K-grid `points`."""
    config = config or SpanningConfig()
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if tau <= 0:
        raise ConfigError("tau must be positive")
    outside = ~q_region.contains(points)
    if np.any(outside):
        raise AdmissibilityError(points[outside])
    generator = generator or FeedbackCandidateGenerator(config.levels, config.switch_step, config.backtrack_limit)
    candidates = np.asarray(generator(spec, points, q_region, tau), dtype=float)
    coverage = _coverage(spec, points, q_region, tau, candidates, config)
    uncovered = ~coverage.any(axis=0)
    if np.any(uncovered):
        raise AdmissibilityError(points[uncovered])
    selected, witness = greedy_cover(coverage)
    failures = _reverify(spec, points, q_region, tau, candidates, witness) if config.reverify else []
    if failures:
        logger.warning(f"{len(failures)} witnesses failed re-verification at tau={tau}")
    logger.info(f"Spanning count at tau={tau}: {len(selected)} of {len(candidates)} candidates for {len(points)} points")
    return SpanningResult(
        tau=float(tau),
        points=points,
        q_region=q_region,
        description=getattr(generator, "description", type(generator).__name__),
        candidates=candidates,
        selected=selected,
        witness=witness,
        delta=spec.delta,
        verification_failures=failures,
    )


def entropy_slope(results: Sequence) -> float:
    """
    Least-squares slope of log r against tau over the larger half of the
    horizons (at least two). Accepts anything with `tau` and `count`.
    """
    pairs = sorted((float(r.tau), float(r.count)) for r in results)
    if len(pairs) < 3:
        raise ConfigError(f"slope needs at least 3 horizons, got {len(pairs)}")
    use = pairs[-max(2, math.ceil(len(pairs) / 2)):]
    taus = np.array([p[0] for p in use])
    logs = np.log([p[1] for p in use])
    return float(np.polyfit(taus, logs, 1)[0])


def spanning_table(results: Sequence[SpanningResult]) -> SpanningReport:
    rows = [r.to_row() for r in sorted(results, key=lambda r: r.tau)]
    slope = entropy_slope(results) if len(results) >= 3 else None
    return SpanningReport(rows=rows, slope=slope)


def write_spanning_csv(report: SpanningReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["tau", "count", "rate", "candidates", "verification_failures"])
        for row in report.rows:
            writer.writerow([repr(row.tau), row.count, repr(row.rate), row.candidates, row.verification_failures])
    return path
