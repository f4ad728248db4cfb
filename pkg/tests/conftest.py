import math
from pathlib import Path

import numpy as np
import pytest

from dstarplus import CostConfig, CostField, VoxelGrid, VoxelState
from dstarplus.oracle import dijkstra

CORPUS = Path(__file__).resolve().parents[1] / "corpus"

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, ok: bool, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
    print(line)
    _ACCEPTANCE.append((name, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(
            f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
        )


@pytest.fixture
def corpus():
    return CORPUS


def costs_close(a: float, b: float, tol: float = 1e-6) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol


def random_instance(rng, shape, mode=None, cu=None, radius=None):
    """Random grid + cost field + reachable start/goal (oracle-checked)."""
    from dstarplus.scenarios import random_states

    arr = random_states(rng, shape)
    grid = VoxelGrid.from_array(arr)
    config = CostConfig(
        unknown_cost=float(rng.uniform(2, 100)) if cu is None else cu,
        radius=int(rng.integers(0, 4)) if radius is None else radius,
    )
    cf = CostField(grid, config)
    bounds = grid.bounds()
    open_cells = [v for v, s in grid.touched() if s != VoxelState.OCCUPIED]
    while True:
        start = open_cells[rng.integers(len(open_cells))]
        goal = open_cells[rng.integers(len(open_cells))]
        res = dijkstra(cf, bounds, start, goal)
        if res.reachable:
            return grid, cf, bounds, start, goal, res


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
