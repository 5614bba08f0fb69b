"""
Floquet exponents of monodromy matrices.
"""

from typing import List, Tuple

import numpy as np

from config.settings import settings


def floquet_exponents(M: np.ndarray, tau: float, tol: float = None) -> List[Tuple[float, int]]:
    """
    (1/tau) log|mu| for the eigenvalues mu of M, clustered and sorted descending.

    Exponents closer than tol*(1+|lambda|) form one cluster reported with its
    multiplicity.
    """
    if tau <= 0:
        raise ValueError("period must be positive")
    tol = settings.TOL_CLUSTER if tol is None else tol
    moduli = np.abs(np.linalg.eigvals(np.asarray(M, dtype=float)))
    with np.errstate(divide="ignore"):
        exponents = np.sort(np.log(moduli) / tau)[::-1]
    clusters: List[List[float]] = []
    for value in exponents:
        if clusters and abs(clusters[-1][-1] - value) <= tol * (1.0 + abs(value)):
            clusters[-1].append(value)
        else:
            clusters.append([value])
    return [(float(np.mean(group)), len(group)) for group in clusters]


def positive_exponent_sum(exponents: List[Tuple[float, int]]) -> float:
    """Sum of the positive exponents with multiplicity; bounds the entropy at a periodic orbit."""
    return float(sum(value * mult for value, mult in exponents if value > 0))
