"""
Additive cocycles over the shift and their Morse and Lyapunov spectra.

A cocycle is given by its time-one value a(1, xi), evaluated on stacked
windows. Chains use unit times; the finite-time exponent of a periodic
chain xi^0..xi^n is (1/n) sum a(1, xi^i).
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..expr_core import Expr
from ..shared.schemas.estimators import MorseConfig
from ..shared.schemas.reports import ChainWitness, SpectrumLevel, SpectrumReport
from .sequences import ChainOfWindows, SeqWindow

logger = logging.getLogger(__name__)

_MAX_WORDS = 20000


class ShiftCocycle:
    """a(1, .) on windows of shape (n, 2W+1, m); only entries -radius..radius are read."""
    radius: int = 0

    def values(self, windows: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _centre(self, windows: np.ndarray) -> np.ndarray:
        W = (windows.shape[1] - 1) // 2
        if W < self.radius:
            raise ValueError(f"cocycle reads radius {self.radius} but windows have radius {W}")
        return windows[:, W - self.radius:W + self.radius + 1]

    def __call__(self, window: SeqWindow) -> float:
        return float(self.values(window.entries[None])[0])


@dataclass
class ConstantCocycle(ShiftCocycle):
    """a(t, xi) = c t."""
    c: float

    def values(self, windows: np.ndarray) -> np.ndarray:
        return np.full(windows.shape[0], float(self.c))


@dataclass
class CoordinateCocycle(ShiftCocycle):
    """a(1, xi) = component of xi_index."""
    component: int = 0
    index: int = 0

    def __post_init__(self):
        self.radius = abs(self.index)

    def values(self, windows: np.ndarray) -> np.ndarray:
        centre = self._centre(windows)
        return np.array(centre[:, self.radius + self.index, self.component], dtype=float)


class FunctionCocycle(ShiftCocycle):
    """a(1, xi) = fn(entries -radius..radius), fn vectorised over the leading axis."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], radius: int = 0):
        self.fn = fn
        self.radius = radius

    @classmethod
    def from_expression(cls, expr: Expr) -> "FunctionCocycle":
        """An expression in x1..xm evaluated at xi_0."""
        return cls(lambda centre: expr.evaluate_batch(centre[:, 0, :]), radius=0)

    def values(self, windows: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(self._centre(windows)), dtype=float).reshape(windows.shape[0])


def periodic_windows(word: np.ndarray, radius: int) -> np.ndarray:
    """Windows s^i(w) of the periodic sequence w, i = 0..len(w)-1, shape (p, 2R+1, m)."""
    word = np.asarray(word, dtype=float)
    p = word.shape[0]
    tiled = word[np.arange(-radius, p + radius) % p]
    return np.moveaxis(sliding_window_view(tiled, 2 * radius + 1, axis=0), -1, 1)


def periodic_average(cocycle: ShiftCocycle, word: np.ndarray) -> float:
    """(1/p) sum a(1, s^i w) over one period of the periodic sequence w."""
    return float(np.mean(cocycle.values(periodic_windows(word, cocycle.radius))))


def chain_exponent(cocycle: ShiftCocycle, chain: ChainOfWindows) -> float:
    """(1/n) sum_{i<n} a(1, xi^i) for a chain with unit times."""
    if chain.length == 0:
        raise ValueError("a chain of length 0 has no exponent")
    return float(np.mean(cocycle.values(chain.stacked()[:-1])))


def _padded_chain(word: np.ndarray, pads: np.ndarray, eps: float) -> ChainOfWindows:
    R = math.ceil(1.0 / eps)
    windows = periodic_windows(word, R + 1).copy()
    windows[:, 0] = pads[:, 0]
    windows[:, -1] = pads[:, 1]
    windows = np.concatenate([windows, windows[:1]])
    return ChainOfWindows(tuple(SeqWindow(w) for w in windows), eps, periodic=True)


def _word_witness(value: float, word: np.ndarray) -> ChainWitness:
    return ChainWitness(value=value, word=word.tolist())


def _chain_witness(value: float, chain: ChainOfWindows) -> ChainWitness:
    stacked = chain.stacked()[:-1]
    centre = (stacked.shape[1] - 1) // 2
    pads = np.stack([stacked[:, 0], stacked[:, -1]], axis=1)
    return ChainWitness(value=value, eps=chain.delta, word=stacked[:, centre].tolist(), pads=pads.tolist())


def witness_exponent(cocycle: ShiftCocycle, witness: ChainWitness) -> float:
    """Exponent of a recorded witness: periodic average of a word, or of the padded chain."""
    word = np.asarray(witness.word, dtype=float)
    if witness.pads is None:
        return periodic_average(cocycle, word)
    return chain_exponent(cocycle, _padded_chain(word, np.asarray(witness.pads, dtype=float), witness.eps))


def _words(alphabet: np.ndarray, period_max: int, rng: np.random.Generator) -> List[np.ndarray]:
    words = []
    for p in range(1, period_max + 1):
        count = len(alphabet) ** p
        if count <= _MAX_WORDS:
            for letters in itertools.product(range(len(alphabet)), repeat=p):
                words.append(alphabet[list(letters)])
        else:
            for _ in range(_MAX_WORDS):
                words.append(alphabet[rng.integers(len(alphabet), size=p)])
    return words


def min_lyapunov_via_periodic(cocycle: ShiftCocycle, alphabet: np.ndarray, period_max: int = 3,
                              seed: int = 0) -> float:
    """Minimum of the periodic averages over words of length <= period_max."""
    alphabet = np.asarray(alphabet, dtype=float)
    if alphabet.ndim == 1:
        alphabet = alphabet[:, None]
    rng = np.random.default_rng(seed)
    return min(periodic_average(cocycle, w) for w in _words(alphabet, period_max, rng))


def regular_periodic_chain(
    alphabet: np.ndarray,
    eps: float,
    segments: int,
    weights: np.ndarray,
    rng: np.random.Generator,
) -> Tuple[ChainOfWindows, List[Tuple[int, int]]]:
    """
    A periodic eps-chain: windows of a periodic word made of constant
    segments of length >= 2R, R = ceil(1/eps), with the entries at +-(R+1)
    redrawn at every step (a jump of at most 1/(R+1) <= eps).
    """
    R = math.ceil(1.0 / eps)
    pieces = []
    layout = []
    for _ in range(segments):
        letter = int(rng.choice(len(alphabet), p=weights))
        length = 2 * R + int(rng.integers(0, R + 1))
        pieces.append(np.repeat(alphabet[letter][None, :], length, axis=0))
        layout.append((letter, length))
    word = np.vstack(pieces)
    pads = alphabet[rng.integers(len(alphabet), size=(word.shape[0], 2))]
    return _padded_chain(word, pads, eps), layout


def morse_spectrum(
    cocycle: ShiftCocycle,
    alphabet: np.ndarray,
    config: Optional[MorseConfig] = None,
) -> SpectrumReport:
    """
    Interval hull of the exponents of regular periodic eps-chains for each
    eps of the ladder. The interval at eps also covers every chain sampled at
    the finer levels, so the intervals are nested; orbits of periodic words
    (zero jumps) belong to every level.
    """
    config = config or MorseConfig()
    alphabet = np.asarray(alphabet, dtype=float)
    if alphabet.ndim == 1:
        alphabet = alphabet[:, None]
    rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(1)[0])
    words = _words(alphabet, config.period_max, rng)
    exact = [periodic_average(cocycle, w) for w in words]
    periodic_low, periodic_high = min(exact), max(exact)
    low_witness = _word_witness(periodic_low, words[int(np.argmin(exact))])
    high_witness = _word_witness(periodic_high, words[int(np.argmax(exact))])

    sampled: List[Tuple[ChainWitness, ChainWitness, int]] = []
    for eps in config.eps:
        level_low = level_high = None
        for _ in range(config.chains):
            weights = rng.dirichlet(np.full(len(alphabet), config.concentration))
            segments = int(rng.integers(1, config.max_segments + 1))
            chain, _ = regular_periodic_chain(alphabet, eps, segments, weights, rng)
            value = chain_exponent(cocycle, chain)
            if level_low is None or value < level_low.value:
                level_low = _chain_witness(value, chain)
            if level_high is None or value > level_high.value:
                level_high = _chain_witness(value, chain)
        sampled.append((level_low, level_high, config.chains))

    levels: List[SpectrumLevel] = []
    count = len(exact)
    # the finest level first, accumulating towards coarser ones
    for eps, (level_low, level_high, chains) in reversed(list(zip(config.eps, sampled))):
        if level_low is not None and level_low.value < low_witness.value:
            low_witness = level_low
        if level_high is not None and level_high.value > high_witness.value:
            high_witness = level_high
        count += chains
        levels.append(SpectrumLevel(eps=eps, lower=low_witness.value, upper=high_witness.value, chains=count,
                                    lower_witness=low_witness, upper_witness=high_witness))
    levels.reverse()
    finest = levels[-1]
    logger.info(f"Morse spectrum estimate [{finest.lower:.6f}, {finest.upper:.6f}] at eps={finest.eps}")
    return SpectrumReport(
        levels=levels,
        lower=finest.lower,
        upper=finest.upper,
        periodic_minimum=periodic_low,
    )
