"""
The entropy report: spanning slope, upper and lower cocycle bounds and the
checks between them.
"""

import logging
from typing import List, Optional

import numpy as np

from ..shared.errors import DimensionMismatchError, HyperbolicityError, NumericalError
from ..shared.schemas.estimators import EntropyConfig
from ..shared.schemas.reports import EntropyReport
from ..system_model import Region, SystemSpec
from .periodic_search import lower_bound_search, uniqueness_diagnostic, upper_bound_search
from .spanning import SpanningResult, spanning_count, spanning_table
from config.settings import settings

logger = logging.getLogger(__name__)


def k_grid(
    spec: SystemSpec,
    q_region: Region,
    k_region: Optional[str] = None,
    points_per_axis: int = 21,
    k_shrink: float = 0.9,
) -> np.ndarray:
    """Grid on the named K region, or on Q shrunk about its centre."""
    if k_region is not None:
        return spec.region(k_region).grid(points_per_axis)
    lo, hi = q_region.shrink(k_shrink)
    return Region(tuple(lo), tuple(hi), float(np.max(hi - lo)), name="K").grid(points_per_axis)


def formula_report(spec: SystemSpec, q_region: Region, config: Optional[EntropyConfig] = None) -> EntropyReport:
    """
    Run every route on Q and collect the estimates. Failures of the lower
    bound or of the spanning route are recorded in the notes; the upper bound
    must succeed.
    """
    config = config or EntropyConfig()
    notes: List[str] = []

    upper = upper_bound_search(spec, q_region, config.search)

    lower_value = None
    lower_witness = None
    try:
        lower = lower_bound_search(spec, q_region, config.search)
        lower_value = lower.value
        lower_witness = lower.witness.to_report() if lower.witness is not None else None
    except (HyperbolicityError, DimensionMismatchError) as exc:
        logger.warning(f"Lower bound unavailable: {exc}")
        notes.append(f"lower bound: {type(exc).__name__}: {exc}")

    spanning = None
    slope = None
    if config.spanning_route:
        points = k_grid(spec, q_region, config.k_region, config.points_per_axis, config.k_shrink)
        results: List[SpanningResult] = []
        try:
            for tau in config.taus:
                results.append(spanning_count(spec, points, q_region, tau, config=config.spanning))
            spanning = spanning_table(results)
            slope = spanning.slope
        except NumericalError as exc:
            logger.warning(f"Spanning route stopped: {exc}")
            notes.append(f"spanning: {type(exc).__name__}: {exc}")
            if results:
                spanning = spanning_table(results)
                slope = spanning.slope

    uniqueness = None
    if upper.witness is not None:
        uniqueness = uniqueness_diagnostic(spec, upper.witness.control, q_region, seeds=config.uniqueness_seeds,
                                           seed=config.search.seed)
        if not uniqueness.unique:
            notes.append(f"{uniqueness.distinct_orbits} confined periodic orbits for the upper-bound control")

    if upper.witness is not None and upper.witness.agreement > settings.TOL_SANDWICH:
        notes.append(f"upper bound differs by {upper.witness.agreement:.2e} between T and 2T")

    sandwich_ok = lower_value is None or lower_value <= upper.value + settings.TOL_SANDWICH
    spanning_consistent = None if slope is None else slope <= upper.value + settings.SPANNING_SLACK
    lower_consistent = None
    if slope is not None and lower_value is not None:
        lower_consistent = lower_value <= slope + settings.SPANNING_SLACK
        if not lower_consistent:
            notes.append(f"lower bound {lower_value:.4f} exceeds the spanning slope {slope:.4f}")
    if not sandwich_ok:
        logger.warning(f"Sandwich violated: lower {lower_value:.6f} > upper {upper.value:.6f}")
    logger.info(f"Entropy estimates: spanning slope {slope}, lower {lower_value}, upper {upper.value:.6f}")
    return EntropyReport(
        spanning_slope=slope,
        upper_bound=upper.value,
        lower_bound=lower_value,
        upper_witness=upper.witness.to_report() if upper.witness is not None else None,
        lower_witness=lower_witness,
        spanning=spanning,
        sandwich_ok=sandwich_ok,
        spanning_consistent=spanning_consistent,
        lower_consistent=lower_consistent,
        uniqueness=uniqueness,
        notes=notes,
    )
