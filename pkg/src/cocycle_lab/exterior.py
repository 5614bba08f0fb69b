"""
Exterior-power norms and singular-value growth of long matrix products.

For a matrix with singular values s_1 >= ... >= s_d the norm of the
induced operator on the full exterior algebra is max_j s_1...s_j, so
log+ of it equals the sum of the positive log s_i.
"""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from config.settings import settings
from ..flow_engine import merge_conditioned

logger = logging.getLogger(__name__)


def exterior_norm(M: np.ndarray) -> Tuple[float, int]:
    """(max_j s_1...s_j, argmax j) computed from the SVD."""
    s = np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)
    products = np.cumprod(s)
    j = int(np.argmax(products)) + 1
    return float(products[j - 1]), j


def positive_log_sum(log_values: np.ndarray) -> float:
    """log+ of the exterior norm from (unsorted) log singular values."""
    ordered = np.sort(np.asarray(log_values, dtype=float))[::-1]
    with np.errstate(invalid="ignore"):
        prefix = np.cumsum(ordered)
    best = np.nanmax(prefix) if prefix.size else 0.0
    return float(max(0.0, best))


def _svd_logs(M: np.ndarray) -> np.ndarray:
    s = np.linalg.svd(M, compute_uv=False)
    with np.errstate(divide="ignore"):
        return np.log(s)


def log_singular_values(chunks: Sequence[np.ndarray], sweeps: int = 3) -> np.ndarray:
    """
    log singular values of chunks[-1] @ ... @ chunks[0], in descending order.

    A single chunk goes through the SVD. Several chunks use orthogonal
    iteration on Phi^T Phi carried out factor by factor with QR, so no
    ill-conditioned product is ever formed.
    """
    chunks = [np.asarray(c, dtype=float) for c in chunks]
    if not chunks:
        raise ValueError("need at least one matrix")
    if len(chunks) == 1:
        return _svd_logs(chunks[0])
    d = chunks[0].shape[0]
    Q = np.eye(d)
    for _ in range(sweeps):
        Z = Q
        for C in chunks:
            Z, _ = np.linalg.qr(C @ Z)
        Y = Z
        for C in reversed(chunks):
            Y, _ = np.linalg.qr(C.T @ Y)
        Q = Y
    logs = np.zeros(d)
    Z = Q
    with np.errstate(divide="ignore"):
        for C in chunks:
            Z, R = np.linalg.qr(C @ Z)
            logs += np.log(np.abs(np.diag(R)))
    return np.sort(logs)[::-1]


def product_log_singular_values(maps: Sequence[np.ndarray], max_cond: float = None) -> np.ndarray:
    """log singular values of the product of step maps (oldest first)."""
    max_cond = settings.COND_DIRECT_SVD if max_cond is None else max_cond
    return log_singular_values(merge_conditioned(list(maps), max_cond))


def exterior_growth(maps: Sequence[np.ndarray], max_cond: float = None) -> float:
    """alpha = log+ |Lambda Phi| for Phi the product of the given maps."""
    return positive_log_sum(product_log_singular_values(maps, max_cond))


def finite_time_exponents(maps: Sequence[np.ndarray], duration: float) -> np.ndarray:
    """Finite-time Lyapunov exponents (descending) of the product over `duration`."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    return product_log_singular_values(maps) / duration


def exterior_trace_values(step_maps: Sequence[np.ndarray], max_cond: float = None) -> List[float]:
    """alpha at every node of a segment: [0, alpha(t_1), ..., alpha(t_K)]."""
    max_cond = settings.COND_DIRECT_SVD if max_cond is None else max_cond
    values = [0.0]
    frozen: List[np.ndarray] = []
    tail = None
    for step_map in step_maps:
        candidate = step_map if tail is None else step_map @ tail
        s = np.linalg.svd(candidate, compute_uv=False)
        if tail is not None and (s[-1] == 0.0 or s[0] / s[-1] > max_cond):
            frozen.append(tail)
            tail = step_map
            logs = log_singular_values(frozen + [tail])
        else:
            tail = candidate
            logs = _svd_logs(tail) if not frozen else log_singular_values(frozen + [tail])
        values.append(positive_log_sum(logs))
    return values
