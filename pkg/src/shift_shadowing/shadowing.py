"""
Shadowing of delta-chains of the shift by true orbits.

The shadow of xi^0..xi^n is eta with eta_i = xi^i_0 on the chain range,
continued by xi^0 before it and xi^n after it (or periodically for a
periodic chain). Every shifted orbit s^i(eta) stays within sqrt(delta) of
xi^i, up to the 1/(W+1) truncation of finite windows.
"""

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from ..shared.errors import ConfigError
from ..shared.parallel import map_ordered
from ..shared.schemas.reports import ShadowSummary
from .sequences import ChainOfWindows, SeqWindow, periodic_chain, random_chain, stacked_metric

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ShadowOrbit:
    """eta_{-W}..eta_{n+W}; entries[k] holds eta_{k - W}."""
    entries: np.ndarray
    radius: int
    length: int
    period: Optional[int] = None

    def value(self, i: int) -> np.ndarray:
        return self.entries[i + self.radius]

    def shifted(self, i: int) -> SeqWindow:
        """s^i(eta) as a window of radius W, 0 <= i <= n."""
        if not 0 <= i <= self.length:
            raise IndexError(f"shift {i} outside 0..{self.length}")
        return SeqWindow(self.entries[i:i + 2 * self.radius + 1])

    def seed(self) -> SeqWindow:
        return self.shifted(0)

    def stacked(self) -> np.ndarray:
        W = self.radius
        index = np.arange(self.length + 1)[:, None] + np.arange(2 * W + 1)[None, :]
        return self.entries[index]


def shadow(chain: ChainOfWindows) -> ShadowOrbit:
    W, n = chain.radius, chain.length
    stack = chain.stacked()
    if chain.periodic:
        word = stack[:n, W]
        entries = word[np.arange(-W, n + W + 1) % n]
    else:
        entries = np.vstack([stack[0, :W], stack[:, W], stack[-1, W + 1:]])
    return ShadowOrbit(entries=entries, radius=W, length=n, period=chain.period)


def shadow_deviations(chain: ChainOfWindows, orbit: Optional[ShadowOrbit] = None) -> np.ndarray:
    """D(s^i(eta), xi^i) for i = 0..n."""
    orbit = orbit or shadow(chain)
    return stacked_metric(orbit.stacked(), chain.stacked())


def shadow_bound(delta: float, radius: int) -> float:
    """sqrt(delta) plus the truncation term 1/(W+1) of finite windows."""
    return math.sqrt(delta) + 1.0 / (radius + 1)


def write_shadow_csv(chain: ChainOfWindows, orbit: ShadowOrbit, path: Union[str, Path]) -> Path:
    """Columns: step, deviation, bound, eta_1..eta_m (the shadow value at the step)."""
    path = Path(path)
    deviations = shadow_deviations(chain, orbit)
    bound = shadow_bound(chain.delta, chain.radius)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["step", "deviation", "bound"] + [f"eta_{j + 1}" for j in range(orbit.entries.shape[1])])
        for i, deviation in enumerate(deviations):
            writer.writerow([i, repr(float(deviation)), repr(bound)] + [repr(float(v)) for v in orbit.value(i)])
    return path


def shadow_experiment(
    lo,
    hi,
    delta: float,
    chains: int = 1000,
    length: int = 50,
    radius: int = 64,
    periodic: bool = False,
    seed: int = 0,
    workers: int = 1,
) -> ShadowSummary:
    """Shadow many random delta-chains and count violations of sqrt(delta) + 1/(W+1)."""
    if delta <= 0:
        raise ConfigError("delta must be positive")
    bound = shadow_bound(delta, radius)
    seeds = np.random.SeedSequence(seed).spawn(chains)

    def run(child: np.random.SeedSequence) -> float:
        rng = np.random.default_rng(child)
        if periodic:
            chain = periodic_chain(lo, hi, length, radius, delta, rng)
            orbit = shadow(chain)
            tail = orbit.entries[chain.length:]
            if not np.array_equal(orbit.entries[:len(tail)], tail):
                raise ConfigError("shadow of a periodic chain is not periodic")
        else:
            chain = random_chain(lo, hi, length, radius, delta, rng)
        return float(np.max(shadow_deviations(chain)))

    worst: List[float] = map_ordered(run, seeds, workers)
    violations = sum(1 for w in worst if w > bound)
    if violations:
        logger.warning(f"{violations} of {chains} chains exceed the shadowing bound {bound:.3e}")
    logger.info(f"Shadowed {chains} chains at delta={delta}: max deviation {max(worst):.3e}")
    return ShadowSummary(
        delta=delta,
        window=radius,
        chains=chains,
        length=length,
        bound=bound,
        max_deviation=max(worst),
        violations=violations,
    )
