"""
Controlled-transition graph on the cells of a region.

Nodes are cells, labelled edges (c, w, c') record that the constant control
w carries the centre of c to within eps + h*sqrt(d)/2 of the centre of c'
in time tau_step. Strongly connected components with at least one internal
edge approximate the chain control sets in the region.
"""

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path
from scipy.spatial import cKDTree

from ..flow_engine import integrate_batch
from ..shared.errors import ConfigError, UnreachableError
from ..shared.parallel import map_ordered
from ..shared.schemas.reports import ChainSetReport, SccReport
from ..system_model import Region, SystemSpec, quantize_controls

logger = logging.getLogger(__name__)


@dataclass
class ChainGraph:
    region: Region
    eps: float
    tau_step: float
    alphabet: np.ndarray
    sources: np.ndarray
    letters: np.ndarray
    targets: np.ndarray
    endpoints: np.ndarray
    blown: np.ndarray
    adjacency: csr_matrix
    labels: np.ndarray

    @property
    def n_cells(self) -> int:
        return self.region.n_cells

    @property
    def n_edges(self) -> int:
        return int(len(self.sources))

    def edge_set(self) -> set:
        return set(zip(self.sources.tolist(), self.letters.tolist(), self.targets.tolist()))

    def nontrivial_components(self) -> np.ndarray:
        internal = self.labels[self.sources] == self.labels[self.targets]
        return np.unique(self.labels[self.sources[internal]])

    def to_edge_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        centers = self.region.centers()
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["source", "letter", "target", "source_center", "target_center"])
            for s, w, t in zip(self.sources, self.letters, self.targets):
                writer.writerow([
                    int(s), int(w), int(t),
                    " ".join(repr(float(v)) for v in centers[s]),
                    " ".join(repr(float(v)) for v in centers[t]),
                ])
        return path

    def to_report(self, region_name: str = "", min_cells: int = 1) -> ChainSetReport:
        centers = self.region.centers()
        half = self.region.cell / 2.0
        sets = []
        self_loops = set(self.sources[self.sources == self.targets].tolist())
        for index, cells in enumerate(chain_control_sets(self, min_cells=min_cells)):
            sets.append(SccReport(
                id=index,
                size=len(cells),
                cells=[int(c) for c in cells],
                lo=(centers[cells].min(axis=0) - half).tolist(),
                hi=(centers[cells].max(axis=0) + half).tolist(),
                self_loop=bool(len(cells) == 1 and int(cells[0]) in self_loops),
            ))
        return ChainSetReport(
            region=region_name or self.region.name,
            eps=self.eps,
            tau_step=self.tau_step,
            n_cells=self.n_cells,
            n_letters=int(len(self.alphabet)),
            n_edges=self.n_edges,
            blown_cells=int(np.any(self.blown, axis=0).sum()) if self.blown.size else 0,
            sets=sets,
        )


def build_graph(
    spec: SystemSpec,
    region: Region,
    eps: float,
    tau_step: float,
    alphabet: Optional[np.ndarray] = None,
    levels: Optional[int] = None,
    workers: int = 1,
) -> ChainGraph:
    """Cell graph of the region under the constant controls of the alphabet."""
    if eps < region.cell / 2.0:
        raise ConfigError(f"jump tolerance eps={eps} is below half the cell width {region.cell / 2.0}")
    if tau_step <= 0:
        raise ConfigError("tau_step must be positive")
    if alphabet is None:
        alphabet = quantize_controls(spec, levels)
    alphabet = np.asarray(alphabet, dtype=float).reshape(-1, spec.inputs)
    centers = region.centers()
    n_sub = max(1, math.ceil(tau_step / spec.h_int - 1e-9))
    h = tau_step / n_sub

    def advance(letter: np.ndarray):
        result = integrate_batch(spec, centers, letter[None, :], tau_step, h=h, strict=False)
        return result.final, result.blown

    outcomes = map_ordered(advance, list(alphabet), workers)
    n = len(centers)
    endpoints = np.array([o[0] for o in outcomes]).reshape(len(alphabet), n, spec.dim)
    blown = np.array([o[1] for o in outcomes], dtype=bool).reshape(len(alphabet), n)

    radius = eps + region.cell_radius
    tree = cKDTree(centers)
    sources: List[int] = []
    letters: List[int] = []
    targets: List[int] = []
    for w in range(len(alphabet)):
        ok = np.flatnonzero(~blown[w])
        neighbours = tree.query_ball_point(endpoints[w, ok], r=radius)
        for cell, candidates in zip(ok, neighbours):
            if not candidates:
                continue
            candidates = np.array(sorted(candidates))
            dist = np.linalg.norm(centers[candidates] - endpoints[w, cell], axis=1)
            for target in candidates[dist < radius]:
                sources.append(int(cell))
                letters.append(w)
                targets.append(int(target))

    sources_arr = np.array(sources, dtype=int)
    letters_arr = np.array(letters, dtype=int)
    targets_arr = np.array(targets, dtype=int)
    adjacency = csr_matrix((np.ones(len(sources_arr)), (sources_arr, targets_arr)), shape=(n, n))
    adjacency.data[:] = 1.0
    _, labels = connected_components(adjacency, directed=True, connection="strong")
    logger.info(
        f"Chain graph on {n} cells: {len(sources_arr)} edges over {len(alphabet)} letters "
        f"(eps={eps}, tau_step={tau_step}, {int(blown.any(axis=0).sum())} cells flagged)"
    )
    return ChainGraph(
        region=region,
        eps=eps,
        tau_step=tau_step,
        alphabet=alphabet,
        sources=sources_arr,
        letters=letters_arr,
        targets=targets_arr,
        endpoints=endpoints,
        blown=blown,
        adjacency=adjacency,
        labels=labels,
    )


def chain_control_sets(graph: ChainGraph, min_cells: int = 1) -> List[np.ndarray]:
    """Cells of every SCC with an internal edge (self-loops count), ordered by smallest cell."""
    sets = []
    for label in graph.nontrivial_components():
        cells = np.flatnonzero(graph.labels == label)
        if len(cells) >= min_cells:
            sets.append(cells)
    return sorted(sets, key=lambda cells: int(cells[0]))


def first_hitting_time(graph: ChainGraph, from_cells: Iterable[int], to_cell: int) -> float:
    """tau_step times the largest, over from_cells, of the fewest edges to to_cell."""
    from_cells = sorted(set(int(c) for c in from_cells))
    if not from_cells:
        raise ConfigError("from_cells is empty")
    to_cell = int(to_cell)
    if all(cell == to_cell for cell in from_cells):
        return 0.0
    hops = shortest_path(graph.adjacency, directed=True, unweighted=True, indices=from_cells)
    hops = np.atleast_2d(hops)[:, to_cell]
    blocked = np.flatnonzero(np.isinf(hops))
    if blocked.size:
        cell = from_cells[int(blocked[0])]
        raise UnreachableError(cell, graph.region.centers()[cell], target=to_cell)
    return float(np.max(hops)) * graph.tau_step


def no_return_violations(
    spec: SystemSpec,
    graph: ChainGraph,
    cells: np.ndarray,
    steps: int = 8,
    samples: int = 200,
    seed: int = 0,
) -> int:
    """
    Count random alphabet-driven trajectories from the set that come back to
    it after leaving its eps-neighbourhood.
    """
    rng = np.random.default_rng(seed)
    centers = graph.region.centers()
    core = centers[cells]
    tree = cKDTree(core)
    radius = graph.eps + graph.region.cell_radius
    starts = core[rng.integers(0, len(core), samples)]
    choices = rng.integers(0, len(graph.alphabet), (steps, samples))
    n_sub = max(1, math.ceil(graph.tau_step / spec.h_int - 1e-9))
    h = graph.tau_step / n_sub
    X = starts.copy()
    left = np.zeros(samples, dtype=bool)
    violations = np.zeros(samples, dtype=bool)
    alive = np.ones(samples, dtype=bool)
    for step in range(steps):
        result = integrate_batch(spec, X, graph.alphabet[choices[step]], graph.tau_step, h=h, strict=False)
        X = result.final
        alive &= ~result.blown
        distance, _ = tree.query(X)
        inside_set = graph.region.contains(X) & (distance <= graph.region.cell_radius)
        outside = distance > radius
        violations |= alive & left & inside_set
        left |= outside
    return int(violations.sum())
