"""Brute-force reference solvers used to cross-check the planner and risk layer."""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Bounds, GridIndex, VoxelGrid, VoxelState
from .planner import edge_cost
from .riskfield import CostField


@dataclass
class OracleResult:
    cost: float
    path: list[GridIndex] | None
    dist: dict[GridIndex, float] = field(repr=False, default_factory=dict)

    @property
    def reachable(self) -> bool:
        return self.path is not None


def _lattice_moves(mode: str):
    dzs = (-1, 0, 1) if mode == "3d" else (0,)
    return [m for m in itertools.product((-1, 0, 1), (-1, 0, 1), dzs) if any(m)]


def dijkstra(cf: CostField, bounds: Bounds, start: GridIndex, goal: GridIndex) -> OracleResult:
    """Exact single-source shortest paths from ``start`` inside ``bounds``."""
    start, goal = tuple(start), tuple(goal)
    if start not in bounds or goal not in bounds:
        raise ValueError(f"start {start} / goal {goal} outside {bounds}")
    moves = _lattice_moves(cf.grid.mode)
    dist = {start: 0.0}
    prev: dict[GridIndex, GridIndex] = {}
    done = set()
    heap = [(0.0, start)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for m in moves:
            v = (u[0] + m[0], u[1] + m[1], u[2] + m[2])
            if v not in bounds or v in done:
                continue
            w = edge_cost(cf, u, v)
            if w == math.inf:
                continue
            nd = d + w
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    if goal not in dist:
        return OracleResult(math.inf, None, dist)
    path = [goal]
    while path[-1] != start:
        path.append(prev[path[-1]])
    path.reverse()
    return OracleResult(dist[goal], path, dist)


def distance_transform(grid: VoxelGrid, r: int, bounds: Bounds) -> dict[GridIndex, float]:
    """Minimum Euclidean distance to an occupied voxel, for d <= r.

    Considers only occupied voxels inside ``bounds``; occupied voxels get no
    entry.  Each window offset is tested against a shifted occupancy mask.
    """
    occ = grid.to_array(bounds) == VoxelState.OCCUPIED
    nz, ny, nx = occ.shape
    best = np.full(occ.shape, np.inf)
    rz = r if grid.mode == "3d" else 0
    for dz in range(-rz, rz + 1):
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                n2 = dx * dx + dy * dy + dz * dz
                if n2 == 0 or n2 > r * r:
                    continue
                if abs(dx) >= nx or abs(dy) >= ny or abs(dz) >= nz:
                    continue
                # occupied at p + offset  ->  candidate distance at p
                shifted = np.zeros_like(occ)
                src = occ[
                    max(dz, 0): nz + min(dz, 0),
                    max(dy, 0): ny + min(dy, 0),
                    max(dx, 0): nx + min(dx, 0),
                ]
                shifted[
                    max(-dz, 0): nz + min(-dz, 0),
                    max(-dy, 0): ny + min(-dy, 0),
                    max(-dx, 0): nx + min(-dx, 0),
                ] = src
                best = np.where(shifted, np.minimum(best, np.sqrt(n2)), best)
    best[occ] = np.inf
    lx, ly, lz = bounds.lo
    out = {}
    for z, y, x in zip(*np.nonzero(np.isfinite(best))):
        out[(int(x) + lx, int(y) + ly, int(z) + lz)] = float(best[z, y, x])
    return out
