"""
Fitting of exponential-dichotomy constants from sampled tangent vectors.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..flow_engine import StepMapSource


@dataclass
class DichotomyFit:
    lambda_hat: float
    c_hat: float
    expansion_rate: Optional[float]
    contraction_rate: Optional[float]
    violations: List[Dict[str, Any]] = field(default_factory=list)


def _sample_vectors(basis: np.ndarray, n_random: int, rng: np.random.Generator) -> np.ndarray:
    """Basis columns plus random unit combinations, as unit columns of basis' span."""
    p = basis.shape[1]
    coefficients = np.hstack([np.eye(p), rng.standard_normal((p, n_random))])
    vectors = basis @ coefficients
    return vectors / np.linalg.norm(vectors, axis=0, keepdims=True)


def log_growth(source: StepMapSource, vectors: np.ndarray, n_chunks: int, chunk: int) -> np.ndarray:
    """log|Phi(t_j) v| at t_j = j*chunk*h for j = 0..n_chunks, one column per vector."""
    logs = np.zeros((n_chunks + 1, vectors.shape[1]))
    V = vectors.copy()
    total = np.zeros(vectors.shape[1])
    for j in range(n_chunks):
        V = source.product(j * chunk, (j + 1) * chunk) @ V
        norms = np.linalg.norm(V, axis=0)
        total += np.log(norms)
        V = V / norms
        logs[j + 1] = total
    return logs


def fit_dichotomy(
    source: StepMapSource,
    plus: np.ndarray,
    minus: np.ndarray,
    probe_steps: int,
    chunk: int,
    n_random: int = 16,
    min_rate: float = 0.0,
    seed: int = 0,
) -> DichotomyFit:
    """
    Least-squares growth rates of sampled vectors in E+ (forward growth) and
    E- (forward decay) over the probe horizon, and the constant c such that
    |Phi v| >= c e^{lambda t} on E+ and |Phi v| <= e^{-lambda t} / c on E-.
    """
    rng = np.random.default_rng(seed)
    n_chunks = max(1, probe_steps // chunk)
    times = np.arange(n_chunks + 1) * chunk * source.h
    violations: List[Dict[str, Any]] = []
    expansion = contraction = None
    late = times >= times[-1] / 2.0
    late[0] = False

    plus_logs = minus_logs = None
    if plus.shape[1]:
        plus_logs = log_growth(source, _sample_vectors(plus, n_random, rng), n_chunks, chunk)
        slopes = np.polyfit(times, plus_logs, 1)[0]
        expansion = float(np.min(slopes))
        rates = plus_logs[late] / times[late, None]
        for j, k in zip(*np.nonzero(rates < min_rate)):
            violations.append({"subspace": "unstable", "vector": int(k), "time": float(times[late][j]),
                               "rate": float(rates[j, k])})
    if minus.shape[1]:
        minus_logs = log_growth(source, _sample_vectors(minus, n_random, rng), n_chunks, chunk)
        slopes = np.polyfit(times, minus_logs, 1)[0]
        contraction = float(np.min(-slopes))
        rates = -minus_logs[late] / times[late, None]
        for j, k in zip(*np.nonzero(rates < min_rate)):
            violations.append({"subspace": "stable", "vector": int(k), "time": float(times[late][j]),
                               "rate": float(rates[j, k])})

    candidates = [r for r in (expansion, contraction) if r is not None]
    lambda_hat = float(min(candidates)) if candidates else 0.0
    c_hat = 1.0
    if plus_logs is not None:
        c_hat = min(c_hat, float(np.exp(np.min(plus_logs - lambda_hat * times[:, None]))))
    if minus_logs is not None:
        c_hat = min(c_hat, float(np.exp(np.min(-lambda_hat * times[:, None] - minus_logs))))
    if not math.isfinite(c_hat):
        c_hat = 0.0
    return DichotomyFit(lambda_hat, c_hat, expansion, contraction, violations)
