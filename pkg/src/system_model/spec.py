"""
Control-affine systems and box regions.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from ..expr_core import Const, Expr, diff, parse
from ..shared.errors import ConfigError, GridAlignmentError
from ..shared.keyvalue import first_error, fold_dotted, read_key_values
from ..shared.schemas.system import SystemConfig
from config.settings import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Region:
    """Box [lo, hi] tiled exactly by cubes of width `cell`."""
    lo: Tuple[float, ...]
    hi: Tuple[float, ...]
    cell: float
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in self.hi))
        if len(self.lo) != len(self.hi) or not self.lo:
            raise ConfigError(f"region {self.name!r}: bounds must be non-empty and of equal length")
        if self.cell <= 0:
            raise ConfigError(f"region {self.name!r}: cell width must be positive")
        for a, b in zip(self.lo, self.hi):
            if a >= b:
                raise ConfigError(f"region {self.name!r}: needs lo < hi, got [{a}, {b}]")
            count = (b - a) / self.cell
            if abs(count - round(count)) > 1e-9 * max(1.0, count):
                raise GridAlignmentError(
                    f"region {self.name!r}: width {b - a} is not a multiple of cell {self.cell}"
                )

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(int(round((b - a) / self.cell)) for a, b in zip(self.lo, self.hi))

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    @property
    def lower(self) -> np.ndarray:
        return np.array(self.lo)

    @property
    def upper(self) -> np.ndarray:
        return np.array(self.hi)

    @property
    def center(self) -> np.ndarray:
        return (self.lower + self.upper) / 2.0

    @property
    def half_widths(self) -> np.ndarray:
        return (self.upper - self.lower) / 2.0

    @property
    def cell_radius(self) -> float:
        """Half diagonal of one cell, h*sqrt(d)/2."""
        return self.cell * math.sqrt(self.dim) / 2.0

    def centers(self) -> np.ndarray:
        """Cell centres in C order, shape (n_cells, d)."""
        axes = [a + self.cell * (np.arange(n) + 0.5) for a, n in zip(self.lo, self.shape)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def cell_bounds(self, index: int) -> Tuple[np.ndarray, np.ndarray]:
        multi = np.array(np.unravel_index(index, self.shape))
        lo = self.lower + multi * self.cell
        return lo, lo + self.cell

    def contains(self, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
        points = np.atleast_2d(points)
        return np.all((points >= self.lower - tol) & (points <= self.upper + tol), axis=1)

    def grid(self, points_per_axis: int) -> np.ndarray:
        """Uniform grid including the corners, shape (k**d, d)."""
        if points_per_axis < 1:
            raise ConfigError("grid needs at least one point per axis")
        if points_per_axis == 1:
            return self.center[None, :]
        axes = [np.linspace(a, b, points_per_axis) for a, b in zip(self.lo, self.hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def shrink(self, factor: float) -> Tuple[np.ndarray, np.ndarray]:
        c, r = self.center, self.half_widths * factor
        return c - r, c + r


@dataclass(frozen=True)
class SystemSpec:
    """x' = f0(x) + sum_i u_i f_i(x) with u in the box [control_lo, control_hi]."""
    dim: int
    inputs: int
    fields: Tuple[Tuple[Expr, ...], ...]
    control_lo: Tuple[float, ...]
    control_hi: Tuple[float, ...]
    delta: float = settings.DEFAULT_DELTA
    h_int: Optional[float] = None
    levels: int = settings.DEFAULT_LEVELS
    interior_shrink: float = settings.INTERIOR_SHRINK
    regions: Mapping[str, Region] = field(default_factory=dict, compare=False)
    name: str = "system"
    _jacobian_terms: Tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.fields) != self.inputs + 1 or any(len(row) != self.dim for row in self.fields):
            raise ConfigError(f"fields must be a {self.inputs + 1}x{self.dim} table")
        if len(self.control_lo) != self.inputs or len(self.control_hi) != self.inputs:
            raise ConfigError(f"control box needs {self.inputs} bounds")
        if any(lo >= hi for lo, hi in zip(self.control_lo, self.control_hi)):
            raise ConfigError("control box needs lo < hi on every axis")
        for row in self.fields:
            for expr in row:
                if any(index > self.dim for index in expr.variables()):
                    raise ConfigError(f"expression {expr} references a variable beyond x{self.dim}")
        h = self.h_int if self.h_int is not None else self.delta / settings.H_INT_DIVISOR
        ratio = self.delta / h
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise GridAlignmentError(f"h_int={h} does not divide delta={self.delta}")
        object.__setattr__(self, "h_int", float(h))
        object.__setattr__(self, "regions", MappingProxyType(dict(self.regions)))
        terms = []
        for i, row in enumerate(self.fields):
            for r, expr in enumerate(row):
                for c in range(self.dim):
                    derivative = diff(expr, c + 1)
                    if derivative != Const(0.0):
                        terms.append((i, r, c, derivative))
        object.__setattr__(self, "_jacobian_terms", tuple(terms))

    @property
    def is_affine(self) -> bool:
        """True when F(x, u) is affine in x: constant drift Jacobian and state-independent inputs."""
        return all(i == 0 and not expr.variables() for i, _, _, expr in self._jacobian_terms)

    @property
    def substeps(self) -> int:
        """Integrator steps per control block."""
        return int(round(self.delta / self.h_int))

    @property
    def u_lo(self) -> np.ndarray:
        return np.array(self.control_lo, dtype=float)

    @property
    def u_hi(self) -> np.ndarray:
        return np.array(self.control_hi, dtype=float)

    @property
    def control_bounds(self) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
        return self.control_lo, self.control_hi

    def interior_box(self, eta: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
        """U_eta = center + eta (U - center)."""
        eta = self.interior_shrink if eta is None else eta
        center = (self.u_lo + self.u_hi) / 2.0
        return center + eta * (self.u_lo - center), center + eta * (self.u_hi - center)

    def region(self, name: str) -> Region:
        try:
            return self.regions[name]
        except KeyError:
            raise ConfigError(f"system {self.name!r} has no region {name!r} (known: {sorted(self.regions)})")

    def _controls(self, U, n: int) -> np.ndarray:
        if self.inputs == 0:
            return np.zeros((n, 0))
        U = np.asarray(U, dtype=float)
        if U.ndim == 1:
            U = U[None, :]
        return np.broadcast_to(U, (n, self.inputs))

    def _field_values(self, i: int, X: np.ndarray) -> np.ndarray:
        return np.stack([expr.evaluate_batch(X) for expr in self.fields[i]], axis=1)

    def vector_field(self, X: np.ndarray, U: np.ndarray) -> np.ndarray:
        """F(x, u) for each row; X is (N, d), U is (N, m) or (m,)."""
        X = np.atleast_2d(X)
        U = self._controls(U, X.shape[0])
        F = self._field_values(0, X)
        for i in range(1, self.inputs + 1):
            F = F + U[:, i - 1:i] * self._field_values(i, X)
        return F

    def jacobian(self, X: np.ndarray, U: np.ndarray) -> np.ndarray:
        """dF/dx for each row, shape (N, d, d)."""
        X = np.atleast_2d(X)
        U = self._controls(U, X.shape[0])
        J = np.zeros((X.shape[0], self.dim, self.dim))
        for i, r, c, expr in self._jacobian_terms:
            values = expr.evaluate_batch(X)
            J[:, r, c] += values if i == 0 else U[:, i - 1] * values
        return J

    def input_matrix(self, X: np.ndarray) -> np.ndarray:
        """B(x) = [f_1(x) ... f_m(x)], shape (N, d, m)."""
        X = np.atleast_2d(X)
        if self.inputs == 0:
            return np.zeros((X.shape[0], self.dim, 0))
        return np.stack([self._field_values(i, X) for i in range(1, self.inputs + 1)], axis=2)


def build_system(
    dim: int,
    fields: Sequence[Sequence[Union[str, Expr]]],
    control_lo: Sequence[float] = (),
    control_hi: Sequence[float] = (),
    delta: float = settings.DEFAULT_DELTA,
    h_int: Optional[float] = None,
    levels: int = settings.DEFAULT_LEVELS,
    interior_shrink: float = settings.INTERIOR_SHRINK,
    regions: Optional[Dict[str, Region]] = None,
    name: str = "system",
) -> SystemSpec:
    """Build a SystemSpec from expression text rows f0..fm."""
    table = tuple(
        tuple(parse(entry, dim) if isinstance(entry, str) else entry for entry in row) for row in fields
    )
    return SystemSpec(
        dim=dim,
        inputs=len(table) - 1,
        fields=table,
        control_lo=tuple(float(v) for v in control_lo),
        control_hi=tuple(float(v) for v in control_hi),
        delta=delta,
        h_int=h_int,
        levels=levels,
        interior_shrink=interior_shrink,
        regions=regions or {},
        name=name,
    )


def system_from_config(config: SystemConfig) -> SystemSpec:
    rows: List[List[str]] = []
    for i in range(config.inputs + 1):
        row = config.field.get(i, {})
        rows.append([row.get(j, "0") for j in range(1, config.dim + 1)])
    regions = {
        name: Region(lo=tuple(r.lo), hi=tuple(r.hi), cell=r.cell, name=name)
        for name, r in config.region.items()
    }
    return build_system(
        dim=config.dim,
        fields=rows,
        control_lo=config.u.lo,
        control_hi=config.u.hi,
        delta=config.delta,
        h_int=config.h_int,
        levels=config.levels,
        interior_shrink=config.interior_shrink,
        regions=regions,
        name=config.name,
    )


def load_system(path: Union[str, Path]) -> SystemSpec:
    """Read and validate a system file."""
    flat = read_key_values(path)
    try:
        config = SystemConfig.model_validate(fold_dotted(flat))
    except ValidationError as exc:
        raise ConfigError(f"{path}: {first_error(exc)}")
    spec = system_from_config(config)
    logger.info(f"Loaded system {spec.name!r} from {path} (d={spec.dim}, m={spec.inputs})")
    return spec
