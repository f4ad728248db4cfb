"""Incremental D* lite search over a :class:`~dstarplus.riskfield.CostField`.

The search runs backwards from the goal.  Edge weights are the step length
times the mean of the two endpoint voxel costs, so uniform free space costs
``length * free_cost`` and any edge touching an impassable voxel is infinite.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    NEIGHBOR_OFFSETS,
    Bounds,
    GridIndex,
    VoxelState,
    index_to_world,
    step_length,
)
from .riskfield import CostField

INF = math.inf
KEY_EPS = 1e-9


class PlannerError(ValueError):
    pass


class StartOccupiedError(PlannerError):
    pass


class GoalOccupiedError(PlannerError):
    pass


def edge_cost(cf: CostField, u: GridIndex, v: GridIndex) -> float:
    step = step_length(u, v)
    if step is None:
        raise ValueError(f"{u} and {v} are not lattice neighbors")
    cu = cf.total_cost(u)
    cv = cf.total_cost(v)
    if cu == INF or cv == INF:
        return INF
    return step * (cu + cv) / 2.0


def heuristic(a: GridIndex, b: GridIndex, free_cost: float = 1.0) -> float:
    return math.dist(a, b) * free_cost


def key_less(a: tuple[float, float], b: tuple[float, float]) -> bool:
    if a[0] < b[0] - KEY_EPS:
        return True
    if abs(a[0] - b[0]) <= KEY_EPS:
        return a[1] < b[1] - KEY_EPS
    return False


@dataclass(frozen=True)
class Path:
    indices: tuple[GridIndex, ...]
    total_cost: float
    points: tuple[tuple[float, float, float], ...] = field(default=(), compare=False)

    @property
    def start(self) -> GridIndex:
        return self.indices[0]

    @property
    def goal(self) -> GridIndex:
        return self.indices[-1]

    def __len__(self) -> int:
        return len(self.indices)

    def length(self) -> float:
        """Geometric length in voxel units."""
        return sum(math.dist(a, b) for a, b in zip(self.indices, self.indices[1:]))


class PlannerCore:
    """D* lite state for one start/goal pair.

    ``bounds`` fixes the search domain.  When omitted the domain follows the
    grid: the box of touched voxels plus start and goal, growing as the map
    grows.
    """

    def __init__(self, cf: CostField, start: GridIndex, goal: GridIndex, bounds: Bounds | None = None):
        start, goal = tuple(start), tuple(goal)
        if cf.grid.get_state(start) == VoxelState.OCCUPIED:
            raise StartOccupiedError(f"start {start} is occupied")
        if cf.grid.get_state(goal) == VoxelState.OCCUPIED:
            raise GoalOccupiedError(f"goal {goal} is occupied")
        self.cf = cf
        self.start = start
        self.goal = goal
        self._fixed_bounds = bounds
        self._offsets = NEIGHBOR_OFFSETS[cf.grid.mode]
        self.g: dict[GridIndex, float] = {}
        self.rhs: dict[GridIndex, float] = {goal: 0.0}
        self.km = 0.0
        self._queue: dict[GridIndex, tuple[float, float]] = {}
        self._heap: list = []
        self.bounds = self._domain()
        if start not in self.bounds or goal not in self.bounds:
            raise PlannerError("start and goal must lie inside the search bounds")
        self._insert(goal, self._calc_key(goal))
        self.expansions = 0

    # -- domain -----------------------------------------------------------

    def _domain(self) -> Bounds:
        if self._fixed_bounds is not None:
            return self._fixed_bounds
        b = Bounds(self.start, self.start).union(self.goal)
        gb = self.cf.grid.bounds()
        return b if gb is None else b.union(gb)

    def _refresh_domain(self) -> None:
        if self._fixed_bounds is not None:
            return
        new = self._domain()
        old = self.bounds
        if new == old:
            return
        self.bounds = new
        # new vertices bordering the old domain may now have finite rhs
        shell = old.grow(1).intersect(new)
        for v in shell:
            if v not in old:
                self._update_vertex(v)

    def _succ(self, u: GridIndex):
        x, y, z = u
        b = self.bounds
        lo, hi = b.lo, b.hi
        for (dx, dy, dz), step in self._offsets:
            v = (x + dx, y + dy, z + dz)
            if lo[0] <= v[0] <= hi[0] and lo[1] <= v[1] <= hi[1] and lo[2] <= v[2] <= hi[2]:
                yield v, step

    # -- queue ------------------------------------------------------------

    def _calc_key(self, v: GridIndex) -> tuple[float, float]:
        m = min(self.g.get(v, INF), self.rhs.get(v, INF))
        return (m + heuristic(self.start, v, self.cf.config.free_cost) + self.km, m)

    def _insert(self, v: GridIndex, key: tuple[float, float]) -> None:
        self._queue[v] = key
        heapq.heappush(self._heap, (key[0], key[1], v))

    def _top(self):
        heap, queue = self._heap, self._queue
        while heap:
            k1, k2, v = heap[0]
            if queue.get(v) == (k1, k2):
                return v, (k1, k2)
            heapq.heappop(heap)
        return None, (INF, INF)

    def _edge(self, u: GridIndex, v: GridIndex, step: float) -> float:
        cost = self.cf.total_cost
        cu = cost(u)
        cv = cost(v)
        if cu == INF or cv == INF:
            return INF
        return step * (cu + cv) / 2.0

    def _best_rhs(self, u: GridIndex) -> float:
        g = self.g
        best = INF
        for v, step in self._succ(u):
            gv = g.get(v, INF)
            if gv == INF:
                continue
            c = self._edge(u, v, step) + gv
            if c < best:
                best = c
        return best

    def _update_vertex(self, u: GridIndex, rhs: float | None = None) -> None:
        if u != self.goal:
            self.rhs[u] = self._best_rhs(u) if rhs is None else rhs
        gu = self.g.get(u, INF)
        if gu != self.rhs.get(u, INF):
            self._insert(u, self._calc_key(u))
        else:
            self._queue.pop(u, None)

    def _compute_shortest_path(self) -> None:
        g, rhs = self.g, self.rhs
        start = self.start
        while True:
            u, k_old = self._top()
            if u is None:
                break
            if not (key_less(k_old, self._calc_key(start)) or rhs.get(start, INF) != g.get(start, INF)):
                break
            self.expansions += 1
            k_new = self._calc_key(u)
            gu, ru = g.get(u, INF), rhs.get(u, INF)
            if key_less(k_old, k_new):
                self._insert(u, k_new)
            elif gu > ru:
                g[u] = ru
                del self._queue[u]
                for s, step in self._succ(u):
                    if s == self.goal:
                        continue
                    cand = self._edge(s, u, step) + ru
                    if cand < rhs.get(s, INF):
                        self._update_vertex(s, cand)
            else:
                g[u] = INF
                self._update_vertex(u)
                for s, _ in self._succ(u):
                    self._update_vertex(s)

    # -- public -----------------------------------------------------------

    def compute_path(self) -> Path | None:
        """Repair the search and extract a minimum-cost path, or None."""
        self._refresh_domain()
        self._compute_shortest_path()
        g = self.g
        if g.get(self.start, INF) == INF:
            return None
        cur = self.start
        indices = [cur]
        seen = {cur}
        total = 0.0
        while cur != self.goal:
            best, best_val, best_c = None, INF, INF
            for v, step in self._succ(cur):
                c = self._edge(cur, v, step)
                if c == INF:
                    continue
                val = c + g.get(v, INF)
                if val < best_val - KEY_EPS:
                    best, best_val, best_c = v, val, c
            if best is None or best_val == INF:
                raise PlannerError(f"path extraction stalled at {cur}")
            if best in seen:
                raise PlannerError(f"path extraction revisited {best}")
            seen.add(best)
            indices.append(best)
            total += best_c
            cur = best
        meta = self.cf.grid.meta
        return Path(tuple(indices), total, tuple(index_to_world(meta, v) for v in indices))

    def notify_changes(self, changed) -> None:
        """Re-examine edges incident to voxels whose total cost changed."""
        self._refresh_domain()
        b = self.bounds
        touched = set()
        for v in changed:
            if v not in b:
                continue
            touched.add(v)
            touched.update(s for s, _ in self._succ(v))
        for v in sorted(touched):
            self._update_vertex(v)

    def move_start(self, new_start: GridIndex) -> None:
        new_start = tuple(new_start)
        if new_start == self.start:
            return
        if self.cf.grid.get_state(new_start) == VoxelState.OCCUPIED:
            raise StartOccupiedError(f"start {new_start} is occupied")
        self.km += heuristic(self.start, new_start, self.cf.config.free_cost)
        self.start = new_start
        self._refresh_domain()

    def g_value(self, v: GridIndex) -> float:
        return self.g.get(v, INF)

    def rhs_value(self, v: GridIndex) -> float:
        return self.rhs.get(v, INF)

    def queued(self) -> set[GridIndex]:
        return set(self._queue)

    def check_invariants(self, tol: float = 1e-9) -> list[str]:
        """Return a list of violated invariants (empty when healthy).

        Recomputes every one-step lookahead over the whole search domain and
        compares it with the stored rhs values, then checks that the queue
        holds exactly the locally inconsistent vertices.
        """
        b = self.bounds
        problems = [f"vertex {v} outside domain" for v in set(self.g) | set(self.rhs) if v not in b]
        problems += [f"stray queue entry {v}" for v in self._queue if v not in b]

        sx, sy, sz = b.shape
        lx, ly, lz = b.lo
        shape = (sz + 2, sy + 2, sx + 2)  # one voxel of padding on every side

        def cell(v):
            return (v[2] - lz + 1, v[1] - ly + 1, v[0] - lx + 1)

        g = np.full(shape, INF)
        rhs = np.full(shape, INF)
        cost = np.full(shape, INF)
        queued = np.zeros(shape, dtype=bool)
        for v, gv in self.g.items():
            if v in b:
                g[cell(v)] = gv
        for v, rv in self.rhs.items():
            if v in b:
                rhs[cell(v)] = rv
        for v in self._queue:
            if v in b:
                queued[cell(v)] = True
        total = self.cf.total_cost
        for v in b:
            cost[cell(v)] = total(v)

        inner = (slice(1, -1),) * 3
        c0 = cost[inner]
        expected = np.full(c0.shape, INF)
        for (dx, dy, dz), step in self._offsets:
            sl = (
                slice(1 + dz, shape[0] - 1 + dz),
                slice(1 + dy, shape[1] - 1 + dy),
                slice(1 + dx, shape[2] - 1 + dx),
            )
            np.minimum(expected, step * (c0 + cost[sl]) / 2.0 + g[sl], out=expected)
        gz, gy, gx = cell(self.goal)
        expected[gz - 1, gy - 1, gx - 1] = 0.0

        got = rhs[inner]
        with np.errstate(invalid="ignore"):
            ok = (got == expected) | (np.abs(got - expected) <= tol * np.maximum(1.0, np.abs(expected)))
        for z, y, x in zip(*np.nonzero(~ok)):
            v = (int(x) + lx, int(y) + ly, int(z) + lz)
            problems.append(f"rhs mismatch at {v}: {got[z, y, x]} != {expected[z, y, x]}")
        for z, y, x in zip(*np.nonzero((g[inner] != got) != queued[inner])):
            problems.append(f"queue membership wrong at {(int(x) + lx, int(y) + ly, int(z) + lz)}")
        return problems


def plan(cf: CostField, start: GridIndex, goal: GridIndex, bounds: Bounds | None = None) -> Path | None:
    return PlannerCore(cf, start, goal, bounds).compute_path()
