"""
Entropy Estimators Module

Spanning-set counts, periodic searches for the cocycle bounds and the
combined entropy report.
"""

from .periodic_search import (
    PeriodicWitness,
    SearchResult,
    candidate_blocks,
    lower_bound_search,
    periodic_rate,
    uniqueness_diagnostic,
    upper_bound_search,
)
from .report import formula_report, k_grid
from .spanning import (
    FeedbackCandidateGenerator,
    SpanningResult,
    entropy_slope,
    greedy_cover,
    spanning_count,
    spanning_table,
    write_spanning_csv,
)

__all__ = [
    "SpanningResult",
    "FeedbackCandidateGenerator",
    "spanning_count",
    "greedy_cover",
    "entropy_slope",
    "spanning_table",
    "write_spanning_csv",
    "PeriodicWitness",
    "SearchResult",
    "periodic_rate",
    "candidate_blocks",
    "upper_bound_search",
    "lower_bound_search",
    "uniqueness_diagnostic",
    "formula_report",
    "k_grid",
]
