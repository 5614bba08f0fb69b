"""
Searches over periodic controls for the two cocycle bounds.

The upper bound minimises the exterior cocycle rate (1/T) log+ |Lambda Phi|
and the lower bound the unstable-determinant rate (1/T) log|det Phi|E+|
over periodic controls in the shrunken control box and periodic orbits that
stay in the region. Periodic orbits come from Newton shooting; the rate at
horizon T uses the monodromy raised to ceil(T / period).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..cocycle_lab import exterior_growth, frame_volume_growth
from ..flow_engine import PeriodicOrbit, periodic_orbit
from ..hyperbolic_splitting import Splitting, periodic_splitting, verify_hyperbolicity
from ..shared.errors import AdmissibilityError, BlowUpError, ClosureError, ExprDomainError, NonConvergenceError
from ..shared.parallel import map_ordered
from ..shared.schemas.estimators import SearchConfig
from ..shared.schemas.reports import HyperbolicityReport, UniquenessReport, WitnessReport
from ..system_model import ControlSignal, Region, SystemSpec, lattice

logger = logging.getLogger(__name__)

_SKIPPED = (NonConvergenceError, BlowUpError, ExprDomainError, ClosureError)


@dataclass
class PeriodicWitness:
    """A periodic control, a periodic point and the cocycle rates along it."""
    value: float
    value_double: float
    orbit: PeriodicOrbit
    horizon: float
    kind: str  # exterior | unstable
    splitting: Optional[Splitting] = None

    @property
    def control(self) -> ControlSignal:
        return self.orbit.control

    @property
    def x0(self) -> np.ndarray:
        return self.orbit.x0

    @property
    def agreement(self) -> float:
        return abs(self.value - self.value_double)

    def to_report(self) -> WitnessReport:
        return WitnessReport(
            value=self.value,
            value_double_horizon=self.value_double,
            control=self.control.as_array().tolist(),
            delta=self.control.delta,
            x0=self.x0.tolist(),
            period=self.orbit.period,
            horizon=self.horizon,
        )


@dataclass
class SearchResult:
    value: float
    witness: Optional[PeriodicWitness]
    evaluated: int
    trace: List[Tuple[str, float]] = field(default_factory=list)
    verification: Optional[HyperbolicityReport] = None


def periodic_rate(orbit: PeriodicOrbit, horizon: float, kind: str = "exterior",
                  frame: Optional[np.ndarray] = None) -> float:
    """
    Rate of the exterior ("exterior") or unstable-determinant ("unstable")
    cocycle over ceil(horizon / period) periods of a periodic orbit.
    """
    period = orbit.period
    k = max(1, math.ceil(horizon / period - 1e-9))
    M = orbit.monodromy
    if kind == "exterior":
        return exterior_growth([M] * k) / (k * period)
    if kind == "unstable":
        if frame is None or frame.shape[1] == 0:
            return 0.0
        return float(frame_volume_growth([M] * k, frame)[-1]) / (k * period)
    raise ValueError(f"unknown cocycle kind {kind!r}")


def _signal(blocks: np.ndarray, spec: SystemSpec, block_steps: int) -> ControlSignal:
    return ControlSignal.from_array(np.repeat(blocks, block_steps, axis=0), spec.delta, periodic=True)


def candidate_blocks(spec: SystemSpec, config: SearchConfig) -> List[np.ndarray]:
    """Constant letters of the shrunken lattice first, then seeded random periodic words."""
    lo, hi = spec.interior_box(config.shrink)
    letters = lattice(lo, hi, config.levels)
    candidates = [letter[None, :] for letter in letters]
    rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(1)[0])
    for _ in range(config.restarts):
        candidates.append(letters[rng.integers(len(letters), size=config.period_blocks)])
    return candidates


def _orbits(spec: SystemSpec, u: ControlSignal, region: Region, guesses: np.ndarray) -> List[PeriodicOrbit]:
    found: List[PeriodicOrbit] = []
    for guess in guesses:
        try:
            orbit = periodic_orbit(spec, u, guess)
        except _SKIPPED as exc:
            logger.debug(f"no periodic orbit from {guess.tolist()}: {exc}")
            continue
        if not np.all(region.contains(orbit.segment.states, tol=1e-9)):
            continue
        if any(np.linalg.norm(orbit.x0 - other.x0) < 1e-6 for other in found):
            continue
        found.append(orbit)
    return found


def _guesses(region: Region, count: int, seed: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.default_rng(seed)
    extra = rng.uniform(region.lower, region.upper, size=(max(0, count - 1), region.dim))
    return np.vstack([region.center[None, :], extra])


class _Evaluator:
    """Rate of the best confined periodic orbit of one candidate control."""

    def __init__(self, spec: SystemSpec, region: Region, config: SearchConfig, kind: str, dims=None):
        self.spec = spec
        self.region = region
        self.config = config
        self.kind = kind
        self.dims = dims

    def __call__(self, item: Tuple[np.ndarray, np.random.SeedSequence]) -> Optional[PeriodicWitness]:
        blocks, seed = item
        u = _signal(blocks, self.spec, self.config.block_steps)
        best: Optional[PeriodicWitness] = None
        for orbit in _orbits(self.spec, u, self.region, _guesses(self.region, self.config.seeds_per_control, seed)):
            splitting = None
            frame = None
            if self.kind == "unstable":
                splitting = periodic_splitting(self.spec, u, orbit.x0, dims=self.dims, segment=orbit.segment,
                                               seed=self.config.seed)
                frame = splitting.plus_basis(0)
            horizon = self.config.horizon
            witness = PeriodicWitness(
                value=periodic_rate(orbit, horizon, self.kind, frame),
                value_double=periodic_rate(orbit, 2.0 * horizon, self.kind, frame),
                orbit=orbit,
                horizon=horizon,
                kind=self.kind,
                splitting=splitting,
            )
            if best is None or witness.value < best.value:
                best = witness
        return best


def _minimum(witnesses: List[Optional[PeriodicWitness]]) -> Tuple[Optional[int], Optional[PeriodicWitness]]:
    best_index, best = None, None
    for index, witness in enumerate(witnesses):
        if witness is not None and (best is None or witness.value < best.value):
            best_index, best = index, witness
    return best_index, best


def _search(spec: SystemSpec, region: Region, config: SearchConfig, kind: str, dims=None) -> SearchResult:
    evaluate = _Evaluator(spec, region, config, kind, dims)
    candidates = candidate_blocks(spec, config)
    seeds = np.random.SeedSequence(config.seed).spawn(len(candidates) + 1)[1:]
    witnesses = map_ordered(evaluate, list(zip(candidates, seeds)), config.workers)
    trace = [(f"candidate {i}", w.value) for i, w in enumerate(witnesses) if w is not None]
    best_index, best = _minimum(witnesses)
    if best is None:
        raise AdmissibilityError([region.center])
    evaluated = len(candidates)

    # coordinate descent on the best random word
    random_start = len(candidates) - config.restarts
    word_index, _ = _minimum([w if i >= random_start else None for i, w in enumerate(witnesses)])
    if word_index is not None and config.period_blocks > 1 and config.descent_sweeps:
        lo, hi = spec.interior_box(config.shrink)
        letters = lattice(lo, hi, config.levels)
        word = candidates[word_index].copy()
        current = witnesses[word_index]
        descent_seeds = np.random.SeedSequence([config.seed, 1]).spawn(config.descent_sweeps * len(word))
        for sweep in range(config.descent_sweeps):
            for j in range(len(word)):
                trials = []
                for letter in letters:
                    trial = word.copy()
                    trial[j] = letter
                    trials.append((trial, descent_seeds[sweep * len(word) + j]))
                results = map_ordered(evaluate, trials, config.workers)
                evaluated += len(trials)
                k, candidate = _minimum(results)
                if candidate is not None and candidate.value < current.value - 1e-12:
                    word, current = trials[k][0], candidate
                    trace.append((f"descent sweep {sweep} block {j}", candidate.value))
        if current.value < best.value:
            best = current

    logger.info(
        f"{kind} search over {evaluated} controls: value {best.value:.6f} "
        f"(2T value {best.value_double:.6f}, period {best.orbit.period:g})"
    )
    return SearchResult(value=best.value, witness=best, evaluated=evaluated, trace=trace)


def upper_bound_search(spec: SystemSpec, region: Region, config: Optional[SearchConfig] = None) -> SearchResult:
    """inf over periodic (u, x) confined to the region of the exterior cocycle rate."""
    return _search(spec, region, config or SearchConfig(), "exterior")


def lower_bound_search(spec: SystemSpec, region: Region, config: Optional[SearchConfig] = None) -> SearchResult:
    """
    inf over periodic (u, x) confined to the region of the unstable-determinant
    rate. The splitting comes from the monodromy of each orbit; the witness is
    checked for a dichotomy when config.verify is set.
    """
    config = config or SearchConfig()
    if config.dims is not None and config.dims[1] == 0:
        logger.info("No unstable directions; the lower bound is 0")
        return SearchResult(value=0.0, witness=None, evaluated=0)
    result = _search(spec, region, config, "unstable", config.dims)
    if config.verify and result.witness is not None and result.witness.splitting is not None:
        result.verification = verify_hyperbolicity(spec, result.witness.splitting, seed=config.seed,
                                                   raise_on_failure=True)
    return result


def uniqueness_diagnostic(
    spec: SystemSpec,
    u: ControlSignal,
    region: Region,
    seeds: int = 8,
    seed: int = 0,
) -> UniquenessReport:
    """
    Count the distinct confined periodic orbits of one periodic control found
    from several starting points. More than one means the confined point x(u)
    is not unique for this control.
    """
    rng = np.random.default_rng(seed)
    guesses = np.vstack([region.center[None, :], rng.uniform(region.lower, region.upper, size=(seeds - 1, region.dim))])
    confined = 0
    orbits: List[PeriodicOrbit] = []
    for guess in guesses:
        try:
            orbit = periodic_orbit(spec, u, guess)
        except _SKIPPED:
            continue
        if not np.all(region.contains(orbit.segment.states, tol=1e-9)):
            continue
        confined += 1
        if all(np.linalg.norm(orbit.x0 - other.x0) >= 1e-6 for other in orbits):
            orbits.append(orbit)
    if len(orbits) > 1:
        logger.warning(f"{len(orbits)} distinct confined periodic orbits for one control")
    return UniquenessReport(seeds=len(guesses), confined_orbits=confined, distinct_orbits=len(orbits),
                            unique=len(orbits) <= 1)
