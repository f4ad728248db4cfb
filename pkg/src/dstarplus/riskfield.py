"""Proximity-risk cost layer and total traversal cost.

Every non-occupied voxel within Euclidean distance ``radius`` (voxel units)
of an occupied voxel carries an extra cost ``unknown_cost / (d + 1)``, where
``d`` is the distance to the *nearest* occupied voxel.  The total cost of a
voxel is its state's base cost plus that risk.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Iterable

from .grid import ChangeRecord, GridIndex, VoxelGrid, VoxelState

INF = math.inf


@dataclass(frozen=True)
class CostConfig:
    free_cost: float = 1.0
    unknown_cost: float = 50.0
    occupied_cost: float = INF
    radius: int = 2

    def __post_init__(self):
        if not self.free_cost > 0:
            raise ValueError(f"free cost must be positive, got {self.free_cost}")
        if not self.free_cost < self.unknown_cost < self.occupied_cost:
            raise ValueError(
                "costs must satisfy free < unknown < occupied, got "
                f"{self.free_cost}, {self.unknown_cost}, {self.occupied_cost}"
            )
        if not math.isfinite(self.unknown_cost):
            raise ValueError("unknown cost must be finite")
        if int(self.radius) != self.radius or self.radius < 0:
            raise ValueError(f"radius must be a non-negative integer, got {self.radius}")
        object.__setattr__(self, "radius", int(self.radius))

    def base_cost(self, state: VoxelState) -> float:
        if state == VoxelState.FREE:
            return self.free_cost
        if state == VoxelState.UNKNOWN:
            return self.unknown_cost
        return self.occupied_cost

    def risk(self, d: float) -> float:
        return self.unknown_cost / (d + 1.0)


@functools.lru_cache(maxsize=None)
def ball_offsets(radius: int, mode: str) -> tuple[tuple[GridIndex, float], ...]:
    """Nonzero lattice offsets with Euclidean norm <= radius, nearest first."""
    rng = range(-radius, radius + 1)
    zs = rng if mode == "3d" else (0,)
    out = []
    for dz, dy, dx in itertools.product(zs, rng, rng):
        n2 = dx * dx + dy * dy + dz * dz
        if 0 < n2 <= radius * radius:
            out.append(((dx, dy, dz), n2))
    out.sort(key=lambda o: (o[1], o[0][2], o[0][1], o[0][0]))
    return tuple((off, math.sqrt(n2)) for off, n2 in out)


class CostField:
    """Total traversal cost over a :class:`VoxelGrid`.

    ``risk`` maps voxel index to ``(d, risk_cost)``.  Keep it in sync with the
    grid by passing every batch of change records to :meth:`apply_changes`.
    """

    def __init__(self, grid: VoxelGrid, config: CostConfig | None = None):
        self.grid = grid
        self.config = config if config is not None else CostConfig()
        self.risk: dict[GridIndex, tuple[float, float]] = {}
        self._cache: dict[GridIndex, float] = {}
        self._ball = ball_offsets(self.config.radius, grid.mode)
        self.rebuild_full()

    def total_cost(self, idx: GridIndex) -> float:
        c = self._cache.get(idx)
        if c is None:
            c = self._cost_of(self.grid.get_state(idx), self.risk.get(idx))
            self._cache[idx] = c
        return c

    def _cost_of(self, state: VoxelState, entry) -> float:
        if state == VoxelState.OCCUPIED:
            return self.config.occupied_cost
        base = self.config.base_cost(state)
        return base if entry is None else base + entry[1]

    def rebuild_full(self) -> None:
        """Recompute the whole risk table by spreading from each obstacle."""
        occupied = self.grid.occupied
        best: dict[GridIndex, float] = {}
        for ox, oy, oz in occupied:
            for (dx, dy, dz), d in self._ball:
                v = (ox + dx, oy + dy, oz + dz)
                if v in occupied:
                    continue
                if d < best.get(v, INF):
                    best[v] = d
        risk = self.config.risk
        self.risk = {v: (d, risk(d)) for v, d in best.items()}
        self._cache.clear()

    def _nearest(self, v: GridIndex) -> tuple[float, float] | None:
        occupied = self.grid.occupied
        if v in occupied:
            return None
        x, y, z = v
        for (dx, dy, dz), d in self._ball:
            if (x + dx, y + dy, z + dz) in occupied:
                return (d, self.config.risk(d))
        return None

    def apply_changes(self, changes: Iterable[ChangeRecord]) -> set[GridIndex]:
        """Bring the risk table up to date after grid writes.

        Returns the voxels whose total cost differs from before the batch.
        """
        first_old: dict[GridIndex, VoxelState] = {}
        last_new: dict[GridIndex, VoxelState] = {}
        for rec in changes:
            if rec.empty:
                continue
            first_old.setdefault(rec.index, rec.old)
            last_new[rec.index] = rec.new
        if not first_old:
            return set()

        occ = VoxelState.OCCUPIED
        # only a flip in occupancy moves the distance field; it can reach no
        # further than radius from the flipped voxel
        window: set[GridIndex] = set()
        for p, old in first_old.items():
            if (old == occ) != (last_new[p] == occ):
                px, py, pz = p
                window.add(p)
                window.update((px + dx, py + dy, pz + dz) for (dx, dy, dz), _ in self._ball)

        get_state = self.grid.get_state
        before: dict[GridIndex, float] = {}
        for v in window.union(first_old):
            st = first_old.get(v)
            if st is None:
                st = get_state(v)
            before[v] = self._cost_of(st, self.risk.get(v))

        for v in window:
            entry = self._nearest(v)
            if entry is None:
                self.risk.pop(v, None)
            else:
                self.risk[v] = entry

        changed = set()
        cache = self._cache
        for v, old_cost in before.items():
            cache.pop(v, None)
            if self.total_cost(v) != old_cost:
                changed.add(v)
        return changed
