import math

import numpy as np
import pytest

from conftest import random_instance
from dstarplus.grid import Bounds, VoxelGrid, VoxelState
from dstarplus.oracle import dijkstra, distance_transform
from dstarplus.planner import edge_cost
from dstarplus.riskfield import CostConfig, CostField

F, U, O = VoxelState.FREE, VoxelState.UNKNOWN, VoxelState.OCCUPIED


def free_field(shape, **cfg):
    return CostField(VoxelGrid.from_array(np.zeros(shape, dtype=np.uint8)), CostConfig(**cfg))


def test_corner_to_corner():
    cf = free_field((3, 3))
    res = dijkstra(cf, cf.grid.bounds(), (0, 0, 0), (2, 2, 0))
    assert res.cost == pytest.approx(2 * math.sqrt(2))
    assert res.path == [(0, 0, 0), (1, 1, 0), (2, 2, 0)]


def test_disconnected_goal():
    arr = np.zeros((5, 5), dtype=np.uint8)
    arr[:, 2] = O
    cf = CostField(VoxelGrid.from_array(arr), CostConfig())
    res = dijkstra(cf, cf.grid.bounds(), (0, 0, 0), (4, 4, 0))
    assert not res.reachable and res.cost == math.inf


def test_endpoints_outside_bounds_raise():
    cf = free_field((3, 3))
    with pytest.raises(ValueError):
        dijkstra(cf, cf.grid.bounds(), (0, 0, 0), (5, 0, 0))


def test_distance_transform_single_obstacle():
    g = VoxelGrid.from_array(np.zeros((7, 7), dtype=np.uint8))
    g.set_state((3, 3, 0), O)
    d = distance_transform(g, 2, g.bounds())
    assert (3, 3, 0) not in d
    assert d[(4, 3, 0)] == 1.0
    assert d[(4, 4, 0)] == pytest.approx(math.sqrt(2))
    assert d[(5, 3, 0)] == 2.0
    assert (5, 5, 0) not in d
    assert len(d) == 12


def test_distance_transform_takes_pointwise_minimum():
    g = VoxelGrid.from_array(np.zeros((1, 9), dtype=np.uint8))
    g.set_state((1, 0, 0), O)
    g.set_state((6, 0, 0), O)
    d = distance_transform(g, 3, g.bounds())
    assert [d.get((x, 0, 0)) for x in range(9)] == [1.0, None, 1.0, 2.0, 2.0, 1.0, None, 1.0, 2.0]


def test_distance_transform_3d_window():
    g = VoxelGrid.from_array(np.zeros((5, 5, 5), dtype=np.uint8))
    g.set_state((2, 2, 2), O)
    d = distance_transform(g, 1, g.bounds())
    assert len(d) == 6


def test_bellman_optimality(rng):
    for _ in range(5):
        grid, cf, bounds, start, goal, res = random_instance(rng, (14, 14))
        dist = res.dist
        for v, dv in dist.items():
            if v == start:
                assert dv == 0.0
                continue
            preds = [dist[u] + edge_cost(cf, u, v) for u, _ in grid.neighbors(v) if u in dist]
            assert dv == pytest.approx(min(preds), abs=1e-9)
