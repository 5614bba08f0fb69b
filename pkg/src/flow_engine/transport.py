"""
Transport of tangent vectors along a trajectory by products of step maps.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..shared.errors import ConfigError


@dataclass(frozen=True)
class StepMapSource:
    """
    Step maps indexed relative to time 0.

    Step j carries tangent vectors from t_j to t_{j+1} (t_j = j*h). For a
    periodic source the stored maps cover one period starting at 0 and are
    tiled in both directions; otherwise steps -origin .. len(maps)-origin-1
    are available.
    """
    maps: np.ndarray
    h: float
    origin: int = 0
    periodic: bool = False

    @property
    def dim(self) -> int:
        return self.maps.shape[1]

    @property
    def bounds(self) -> Tuple[Optional[int], Optional[int]]:
        if self.periodic:
            return None, None
        return -self.origin, len(self.maps) - self.origin

    def window(self, start: int, stop: int) -> np.ndarray:
        """Maps for steps start .. stop-1."""
        if stop < start:
            raise ConfigError(f"empty window {start}..{stop}")
        if self.periodic:
            period = len(self.maps)
            return self.maps[np.arange(start, stop) % period]
        lo, hi = self.bounds
        if start < lo or stop > hi:
            raise ConfigError(f"steps {start}..{stop} outside the available window {lo}..{hi}")
        return self.maps[start + self.origin: stop + self.origin]

    def product(self, start: int, stop: int) -> np.ndarray:
        """Phi(t_stop <- t_start)."""
        result = np.eye(self.dim)
        for step_map in self.window(start, stop):
            result = step_map @ result
        return result

    def chunks(self, start: int, stop: int, size: int) -> List[np.ndarray]:
        """Products over consecutive groups of `size` steps, oldest first."""
        out = []
        for a in range(start, stop, size):
            out.append(self.product(a, min(a + size, stop)))
        return out


def source_from_segment(segment, origin_time: float = 0.0) -> StepMapSource:
    index = int(round((origin_time - segment.times[0]) / segment.h))
    return StepMapSource(maps=segment.step_maps, h=segment.h, origin=index)


def periodic_source(segment) -> StepMapSource:
    """Tile the step maps of one period (segment must start at time 0)."""
    return StepMapSource(maps=segment.step_maps, h=segment.h, origin=0, periodic=True)


def merge_conditioned(chunks: List[np.ndarray], max_cond: float) -> List[np.ndarray]:
    """Multiply consecutive chunks together while the running product stays well conditioned."""
    merged: List[np.ndarray] = []
    current: Optional[np.ndarray] = None
    for chunk in chunks:
        candidate = chunk if current is None else chunk @ current
        if current is not None and np.linalg.cond(candidate) > max_cond:
            merged.append(current)
            current = chunk
        else:
            current = candidate
    if current is not None:
        merged.append(current)
    return merged
