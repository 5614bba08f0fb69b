"""
Tests for cell graphs and chain control sets.
"""

import numpy as np
import pytest

from src.reachability_graph import build_graph, chain_control_sets, first_hitting_time, no_return_violations
from src.shared.errors import ConfigError, UnreachableError


def nearest_cell(region, point: float) -> int:
    return int(np.argmin(np.abs(region.centers()[:, 0] - point)))


def component_of(sets, cell: int):
    for cells in sets:
        if cell in cells:
            return cells
    return None


@pytest.fixture
def scalar_graph(scalar_spec):
    return build_graph(scalar_spec, scalar_spec.region("D"), eps=0.05, tau_step=0.25, levels=5)


def test_scalar_system_has_one_chain_control_set(scalar_graph):
    region = scalar_graph.region
    sets = chain_control_sets(scalar_graph, min_cells=2)
    assert len(sets) == 1
    centers = region.centers()[sets[0], 0]
    assert centers.min() - region.cell / 2 <= -0.9
    assert centers.max() + region.cell / 2 >= 0.9
    assert centers.min() >= -1.2 and centers.max() <= 1.2


def test_scalar_report_bounds(scalar_graph):
    report = scalar_graph.to_report("D", min_cells=2)
    assert report.region == "D"
    assert report.n_cells == 80
    assert report.n_letters == 5
    assert report.n_edges == scalar_graph.n_edges
    [chain_set] = report.sets
    assert chain_set.lo[0] <= -0.9 and chain_set.hi[0] >= 0.9
    assert chain_set.size == len(chain_set.cells)


def test_contraction_has_one_set_around_the_origin(contraction_spec):
    region = contraction_spec.region("D")
    graph = build_graph(contraction_spec, region, eps=0.05, tau_step=0.25)
    sets = chain_control_sets(graph, min_cells=2)
    assert len(sets) == 1
    assert nearest_cell(region, 0.0) in sets[0]
    centers = region.centers()[sets[0], 0]
    assert centers.min() >= -1.2 and centers.max() <= 1.2
    assert no_return_violations(contraction_spec, graph, sets[0], steps=6, samples=100, seed=3) == 0


def test_bistable_system_separates_the_two_wells(bistable_spec):
    region = bistable_spec.region("D")
    graph = build_graph(bistable_spec, region, eps=0.05, tau_step=0.25)
    sets = chain_control_sets(graph)
    right = component_of(sets, nearest_cell(region, 1.0))
    left = component_of(sets, nearest_cell(region, -1.0))
    assert right is not None and left is not None
    assert not np.array_equal(right, left)
    assert np.all(region.centers()[right, 0] > 0.5)
    assert np.all(region.centers()[left, 0] < -0.5)


def test_first_hitting_time(scalar_graph):
    region = scalar_graph.region
    origin = nearest_cell(region, 0.0)
    assert first_hitting_time(scalar_graph, [origin], origin) == 0.0
    time = first_hitting_time(scalar_graph, [origin], nearest_cell(region, 0.5))
    assert time > 0 and (time / scalar_graph.tau_step) == pytest.approx(round(time / scalar_graph.tau_step))
    with pytest.raises(UnreachableError):
        first_hitting_time(scalar_graph, [nearest_cell(region, 1.9)], origin)
    with pytest.raises(ConfigError):
        first_hitting_time(scalar_graph, [], origin)


def test_first_hitting_time_takes_the_slowest_source(scalar_graph):
    region = scalar_graph.region
    origin = nearest_cell(region, 0.0)
    near, far = nearest_cell(region, 0.1), nearest_cell(region, 0.8)
    near_time = first_hitting_time(scalar_graph, [near], origin)
    far_time = first_hitting_time(scalar_graph, [far], origin)
    assert near_time == pytest.approx(scalar_graph.tau_step)
    assert far_time > near_time
    assert first_hitting_time(scalar_graph, [near, far], origin) == pytest.approx(far_time)
    assert first_hitting_time(scalar_graph, [origin, far], origin) == pytest.approx(far_time)


def test_first_hitting_time_names_the_unreachable_source(scalar_graph):
    region = scalar_graph.region
    origin = nearest_cell(region, 0.0)
    stuck = nearest_cell(region, 1.9)
    with pytest.raises(UnreachableError) as excinfo:
        first_hitting_time(scalar_graph, [nearest_cell(region, 0.1), stuck], origin)
    assert excinfo.value.cell == stuck
    assert excinfo.value.target == origin


def test_edges_and_sets_grow_with_eps(scalar_spec):
    region = scalar_spec.region("D")
    fine = build_graph(scalar_spec, region, eps=0.05, tau_step=0.25, levels=3)
    coarse = build_graph(scalar_spec, region, eps=0.1, tau_step=0.25, levels=3)
    assert fine.edge_set() <= coarse.edge_set()
    coarse_sets = [set(cells.tolist()) for cells in chain_control_sets(coarse)]
    for cells in chain_control_sets(fine):
        assert any(set(cells.tolist()) <= bigger for bigger in coarse_sets)


def test_graph_does_not_depend_on_the_worker_count(scalar_spec):
    region = scalar_spec.region("Q")
    serial = build_graph(scalar_spec, region, eps=0.05, tau_step=0.2, workers=1)
    parallel = build_graph(scalar_spec, region, eps=0.05, tau_step=0.2, workers=3)
    assert serial.edge_set() == parallel.edge_set()


def test_invalid_graph_parameters(scalar_spec):
    region = scalar_spec.region("D")
    with pytest.raises(ConfigError):
        build_graph(scalar_spec, region, eps=0.01, tau_step=0.25)
    with pytest.raises(ConfigError):
        build_graph(scalar_spec, region, eps=0.05, tau_step=0.0)


def test_edge_csv(tmp_path, scalar_graph):
    path = scalar_graph.to_edge_csv(tmp_path / "edges.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "source,letter,target,source_center,target_center"
    assert len(lines) == scalar_graph.n_edges + 1
