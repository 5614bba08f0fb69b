"""
Piecewise-constant control signals on a uniform time grid.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from ..shared.errors import ConfigError, ControlRangeError

Vector = Tuple[float, ...]


@dataclass(frozen=True)
class ControlSignal:
    """
    Control taking values[k - offset] on [k*delta, (k+1)*delta).

    A periodic signal stores exactly one period (period == len(values)) and is
    normalised to offset 0. A non-periodic signal is defined on the blocks
    offset .. offset + len(values) - 1 only.
    """
    values: Tuple[Vector, ...]
    delta: float
    period: Optional[int] = None
    offset: int = 0
    bounds: Optional[Tuple[Vector, Vector]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        values = tuple(tuple(float(c) for c in v) for v in self.values)
        if self.delta <= 0:
            raise ConfigError(f"control grid step must be positive, got {self.delta}")
        if values and len({len(v) for v in values}) != 1:
            raise ConfigError("control values must all have the same dimension")
        if self.period is not None:
            if self.period < 1 or self.period != len(values):
                raise ConfigError(f"periodic control needs exactly one period of values ({self.period})")
            shift = (-self.offset) % self.period
            values = values[shift:] + values[:shift]
            object.__setattr__(self, "offset", 0)
        object.__setattr__(self, "values", values)
        if self.bounds is not None:
            lo, hi = (np.asarray(b, dtype=float) for b in self.bounds)
            for k, v in enumerate(values):
                arr = np.asarray(v)
                if np.any(arr < lo - 1e-12) or np.any(arr > hi + 1e-12):
                    raise ControlRangeError(f"control value {list(v)} in block {k} lies outside U")

    @classmethod
    def constant(cls, value: Sequence[float], delta: float, bounds=None) -> "ControlSignal":
        return cls(values=(tuple(value),), delta=delta, period=1, bounds=bounds)

    @classmethod
    def from_array(cls, values: np.ndarray, delta: float, periodic: bool = False, bounds=None) -> "ControlSignal":
        values = np.atleast_2d(np.asarray(values, dtype=float))
        rows = tuple(tuple(row) for row in values)
        return cls(values=rows, delta=delta, period=len(rows) if periodic else None, bounds=bounds)

    @property
    def m(self) -> int:
        return len(self.values[0]) if self.values else 0

    @property
    def is_periodic(self) -> bool:
        return self.period is not None

    @property
    def anchor(self) -> float:
        return self.offset * self.delta

    @property
    def duration(self) -> float:
        return len(self.values) * self.delta

    def block_value(self, k: int) -> Vector:
        if self.period is not None:
            return self.values[k % self.period]
        index = k - self.offset
        if not 0 <= index < len(self.values):
            raise ConfigError(
                f"control undefined on block {k} (domain blocks {self.offset}..{self.offset + len(self.values) - 1})"
            )
        return self.values[index]

    def block_values(self, start: int, stop: int) -> np.ndarray:
        """Array of shape (stop - start, m) with the values on blocks start..stop-1."""
        if stop <= start:
            return np.zeros((0, self.m))
        return np.array([self.block_value(k) for k in range(start, stop)], dtype=float).reshape(stop - start, self.m)

    def value_at(self, t: float) -> np.ndarray:
        return np.array(self.block_value(math.floor(t / self.delta + 1e-9)))

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float).reshape(len(self.values), self.m)


def grid_steps(t: float, delta: float) -> int:
    """Nearest grid index to t/delta; exact halves round toward minus infinity."""
    return math.ceil(t / delta - 0.5)


def shift(u: ControlSignal, t: float) -> ControlSignal:
    """The shifted signal s -> u(s + t), t rounded to the grid."""
    k = grid_steps(t, u.delta)
    if u.period is not None:
        return ControlSignal(values=u.values, delta=u.delta, period=u.period, offset=-k)
    return ControlSignal(values=u.values, delta=u.delta, offset=u.offset - k)


def _finite_blocks(u: ControlSignal) -> Tuple[Vector, ...]:
    if u.period is None and u.offset != 0:
        raise ConfigError("concatenation needs signals anchored at time 0")
    return u.values


def concat(u1: ControlSignal, u2: ControlSignal, periodize: bool = False) -> ControlSignal:
    """u1 on [0, tau1), u2(. - tau1) on [tau1, tau1 + tau2); optionally (tau1 + tau2)-periodic."""
    if not math.isclose(u1.delta, u2.delta, rel_tol=1e-12):
        raise ConfigError(f"grid steps differ: {u1.delta} vs {u2.delta}")
    blocks = _finite_blocks(u1) + _finite_blocks(u2)
    if blocks and len({len(v) for v in blocks}) != 1:
        raise ConfigError("cannot concatenate signals of different control dimension")
    if periodize:
        if not blocks:
            raise ConfigError("cannot periodize an empty signal")
        return ControlSignal(values=blocks, delta=u1.delta, period=len(blocks))
    return ControlSignal(values=blocks, delta=u1.delta)


def empty_signal(delta: float) -> ControlSignal:
    return ControlSignal(values=(), delta=delta)


def lattice(lo: Sequence[float], hi: Sequence[float], levels: int) -> np.ndarray:
    """Uniform lattice over the box including every corner; shape (levels**m, m)."""
    if levels < 2:
        raise ConfigError("quantization needs at least 2 levels per axis")
    axes = [np.linspace(a, b, levels) for a, b in zip(lo, hi)]
    points = list(itertools.product(*axes))
    return np.array(points, dtype=float).reshape(len(points), len(axes))


def quantize_controls(spec, levels_per_axis: Optional[int] = None) -> np.ndarray:
    """Constant control alphabet over U."""
    levels = levels_per_axis if levels_per_axis is not None else spec.levels
    return lattice(spec.control_lo, spec.control_hi, levels)
