"""
Reachability Graph Module

Cell graphs under quantized controls, chain control sets and hitting times.
"""

from .graph import ChainGraph, build_graph, chain_control_sets, first_hitting_time, no_return_violations

__all__ = [
    "ChainGraph",
    "build_graph",
    "chain_control_sets",
    "first_hitting_time",
    "no_return_violations",
]
