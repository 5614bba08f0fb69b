"""
Windows of bi-infinite sequences over a compact alphabet and the product
metric D(xi, eta) = sup_i min{d(xi_i, eta_i), 1/|i|} on them.

A window of radius W keeps the entries -W..W. Every metric value computed
on windows carries the truncation slack 1/(W+1) bounding the terms that
were cut off.
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..shared.errors import ConfigError
from ..system_model import ControlSignal

# d(a, b) for stacked entries a, b of shape (..., m); returns shape (...)
EntryMetric = Callable[[np.ndarray, np.ndarray], np.ndarray]


def euclidean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(a) - np.asarray(b), axis=-1)


def _weights(radius: int) -> np.ndarray:
    """1/|i| for i = -W..W with inf at i = 0."""
    index = np.abs(np.arange(-radius, radius + 1)).astype(float)
    with np.errstate(divide="ignore"):
        return 1.0 / index


@dataclass(frozen=True)
class SeqWindow:
    """Entries xi_{-W}..xi_{W}, stored as an array of shape (2W+1, m)."""
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim == 1:
            entries = entries[:, None]
        if entries.ndim != 2 or entries.shape[0] % 2 != 1:
            raise ConfigError(f"a window needs an odd number of entries, got shape {entries.shape}")
        object.__setattr__(self, "entries", entries)

    @property
    def radius(self) -> int:
        return (self.entries.shape[0] - 1) // 2

    @property
    def m(self) -> int:
        return self.entries.shape[1]

    def at(self, i: int) -> np.ndarray:
        if abs(i) > self.radius:
            raise IndexError(f"index {i} outside window radius {self.radius}")
        return self.entries[i + self.radius]

    def shifted(self) -> "SeqWindow":
        """s(xi) with (s xi)_i = xi_{i+1}; the radius drops by one."""
        if self.radius == 0:
            raise ConfigError("cannot shift a window of radius 0")
        return SeqWindow(self.entries[2:])

    def truncate(self, radius: int) -> "SeqWindow":
        if radius > self.radius:
            raise ConfigError(f"cannot widen a window from {self.radius} to {radius}")
        cut = self.radius - radius
        return SeqWindow(self.entries[cut:self.entries.shape[0] - cut])

    def within(self, lo: Sequence[float], hi: Sequence[float], tol: float = 1e-12) -> bool:
        return bool(np.all(self.entries >= np.asarray(lo) - tol) and np.all(self.entries <= np.asarray(hi) + tol))


def product_metric(xi: SeqWindow, eta: SeqWindow, metric: Optional[EntryMetric] = None) -> Tuple[float, float]:
    """
    (D over the window, truncation slack 1/(W+1)); the true distance of any
    extensions lies in [value, max(value, slack)].
    """
    if xi.radius != eta.radius:
        raise ConfigError(f"window radii differ: {xi.radius} vs {eta.radius}")
    metric = metric or euclidean
    terms = np.minimum(metric(xi.entries, eta.entries), _weights(xi.radius))
    return float(np.max(terms)), 1.0 / (xi.radius + 1)


def stacked_metric(A: np.ndarray, B: np.ndarray, metric: Optional[EntryMetric] = None) -> np.ndarray:
    """D between stacked windows of shape (n, 2W+1, m)."""
    metric = metric or euclidean
    radius = (A.shape[1] - 1) // 2
    return np.max(np.minimum(metric(A, B), _weights(radius)), axis=1)


def metric_ball_check(xi: SeqWindow, eta: SeqWindow, eps: float,
                      metric: Optional[EntryMetric] = None) -> Tuple[bool, bool]:
    """
    Both sides of D <= eps  <=>  d(xi_i, eta_i) <= eps for every i with
    1/|i| > eps. The window must contain every such index.
    """
    if eps <= 0:
        raise ConfigError("eps must be positive")
    if 1.0 / (xi.radius + 1) > eps:
        raise ConfigError(f"window radius {xi.radius} is too small for eps={eps}")
    value, _ = product_metric(xi, eta, metric)
    distances = (metric or euclidean)(xi.entries, eta.entries)
    near = _weights(xi.radius) > eps
    return value <= eps, bool(np.all(distances[near] <= eps))


@dataclass(frozen=True)
class ChainOfWindows:
    """
    xi^0..xi^n with D(s(xi^i), xi^{i+1}) <= delta, compared on radius W-1.
    A periodic chain has xi^n = xi^0 and period n.
    """
    windows: Tuple[SeqWindow, ...]
    delta: float
    periodic: bool = False

    def __post_init__(self):
        windows = tuple(w if isinstance(w, SeqWindow) else SeqWindow(w) for w in self.windows)
        object.__setattr__(self, "windows", windows)
        if not windows:
            raise ConfigError("a chain needs at least one window")
        if len({w.entries.shape for w in windows}) != 1:
            raise ConfigError("chain windows must share radius and alphabet dimension")
        if windows[0].radius < 1 and len(windows) > 1:
            raise ConfigError("chain windows need radius >= 1")
        jumps = self.jumps()
        if np.any(jumps > self.delta + 1e-12):
            i = int(np.argmax(jumps))
            raise ConfigError(f"invalid chain: jump {jumps[i]:.3e} after window {i} exceeds delta={self.delta}")
        if self.periodic:
            if len(windows) < 2 or not np.allclose(windows[0].entries, windows[-1].entries, rtol=0.0, atol=1e-12):
                raise ConfigError("a periodic chain must end at its first window")

    @property
    def length(self) -> int:
        return len(self.windows) - 1

    @property
    def radius(self) -> int:
        return self.windows[0].radius

    @property
    def period(self) -> Optional[int]:
        return self.length if self.periodic else None

    def stacked(self) -> np.ndarray:
        return np.stack([w.entries for w in self.windows])

    def jumps(self) -> np.ndarray:
        if len(self.windows) < 2:
            return np.zeros(0)
        stack = self.stacked()
        return stacked_metric(stack[:-1, 2:], stack[1:, 1:-1])


def sequence_from_control(u: ControlSignal, radius: int) -> SeqWindow:
    """
    xi_k = u restricted to [k, k+1), flattened over its 1/delta grid blocks,
    for k = -radius..radius.
    """
    per_unit = 1.0 / u.delta
    q = int(round(per_unit))
    if abs(per_unit - q) > 1e-9 or q < 1:
        raise ConfigError(f"1/delta must be an integer, got delta={u.delta}")
    entries = [u.block_values(k * q, (k + 1) * q).ravel() for k in range(-radius, radius + 1)]
    return SeqWindow(np.array(entries))


def random_chain(
    lo: Sequence[float],
    hi: Sequence[float],
    length: int,
    radius: int,
    delta: float,
    rng: np.random.Generator,
) -> ChainOfWindows:
    """
    A delta-chain from a random window: each step shifts, perturbs every
    entry by at most delta/2 (clipped to the box) and draws a fresh last entry.
    """
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    m = lo.size
    current = rng.uniform(lo, hi, size=(2 * radius + 1, m))
    windows = [current]
    for _ in range(length):
        moved = current[1:] + _ball_noise(rng, current.shape[0] - 1, m, delta / 2.0)
        fresh = rng.uniform(lo, hi, size=(1, m))
        current = np.clip(np.vstack([moved, fresh]), lo, hi)
        windows.append(current)
    return ChainOfWindows(tuple(SeqWindow(w) for w in windows), delta)


def periodic_chain(
    lo: Sequence[float],
    hi: Sequence[float],
    period: int,
    radius: int,
    delta: float,
    rng: np.random.Generator,
) -> ChainOfWindows:
    """A periodic delta-chain: windows of a random periodic word with perturbations periodic in the step."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    m = lo.size
    word = rng.uniform(lo, hi, size=(period, m))
    noise = [_ball_noise(rng, 2 * radius + 1, m, delta / 4.0) for _ in range(period)]
    offsets = np.arange(-radius, radius + 1)
    windows = []
    for i in range(period + 1):
        entries = word[(i + offsets) % period] + noise[i % period]
        windows.append(SeqWindow(np.clip(entries, lo, hi)))
    return ChainOfWindows(tuple(windows), delta, periodic=True)


def _ball_noise(rng: np.random.Generator, n: int, m: int, radius: float) -> np.ndarray:
    if radius == 0:
        return np.zeros((n, m))
    direction = rng.standard_normal((n, m))
    direction /= np.maximum(np.linalg.norm(direction, axis=1, keepdims=True), 1e-300)
    return direction * radius * rng.uniform(size=(n, 1)) ** (1.0 / m)


def write_chain_csv(chain: ChainOfWindows, path: Union[str, Path]) -> Path:
    """Columns: step, index, c1..cm (one row per window entry)."""
    path = Path(path)
    W = chain.radius
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["step", "index"] + [f"c{j + 1}" for j in range(chain.windows[0].m)])
        for step, window in enumerate(chain.windows):
            for i in range(-W, W + 1):
                writer.writerow([step, i] + [repr(float(v)) for v in window.at(i)])
    return path


def read_chain_csv(path: Union[str, Path], delta: float, periodic: bool = False) -> ChainOfWindows:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"chain file not found: {path}")
    rows: dict = {}
    with path.open(newline="") as handle:
        reader = csv.DictReader(handle)
        columns = [c for c in (reader.fieldnames or []) if c.startswith("c")]
        if not columns:
            raise ConfigError(f"{path}: no entry columns c1..cm")
        for line in reader:
            try:
                step, index = int(line["step"]), int(line["index"])
                rows.setdefault(step, {})[index] = [float(line[c]) for c in columns]
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"{path}: malformed row {line}: {exc}")
    windows: List[SeqWindow] = []
    for step in sorted(rows):
        entries = rows[step]
        radius = max(abs(i) for i in entries)
        if sorted(entries) != list(range(-radius, radius + 1)):
            raise ConfigError(f"{path}: step {step} does not list indices -{radius}..{radius}")
        windows.append(SeqWindow(np.array([entries[i] for i in range(-radius, radius + 1)])))
    return ChainOfWindows(tuple(windows), delta, periodic=periodic)
