"""Reveal-and-replan simulator.

A robot starts with an empty map, senses the ground truth within a sensor
radius (occluded by occupied voxels), replans with the incremental planner,
and advances one voxel per cycle along the current path.
"""
from __future__ import annotations

import functools
import itertools
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np
import yaml

from .grid import GridIndex, VoxelGrid, VoxelState, world_to_index
from .mapio import MapDocument, MapFormatError, UpdateStream, load_map, load_updates
from .oracle import dijkstra
from .planner import PlannerCore, PlannerError, edge_cost
from .riskfield import CostConfig, CostField

REACHED = "Reached"
STUCK = "Stuck"
COLLISION = "CollisionDetected"


@dataclass
class RevealScenario:
    truth: MapDocument
    sensor_radius: float
    start: GridIndex
    goal: GridIndex
    config: CostConfig = field(default_factory=CostConfig)
    updates: UpdateStream | None = None
    step_cap: int | None = None

    def __post_init__(self):
        self.start, self.goal = tuple(self.start), tuple(self.goal)
        if not self.sensor_radius >= 1:
            raise ValueError(f"sensor radius must be >= 1, got {self.sensor_radius}")
        b = self.truth.grid.bounds()
        if b is None or self.start not in b or self.goal not in b:
            raise ValueError("start and goal must lie inside the ground-truth map")


@dataclass
class StepRecord:
    step: int
    pose: GridIndex
    replanned: bool
    path_cost: float | None
    clearance: float
    changes: int


@dataclass
class ReplayTrace:
    steps: list[StepRecord]
    outcome: str
    distance: float
    replans: int
    min_clearance: float
    compute_time: float

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "outcome": self.outcome,
            "distance": self.distance,
            "replans": self.replans,
            "min_clearance": _json_float(self.min_clearance),
            "steps": [
                {
                    "step": s.step,
                    "pose": list(s.pose),
                    "replanned": s.replanned,
                    "path_cost": _json_float(s.path_cost),
                    "clearance": _json_float(s.clearance),
                    "changes": s.changes,
                }
                for s in self.steps
            ],
        }
        if timing:
            d["compute_time_s"] = self.compute_time
        return d

    def poses(self) -> list[GridIndex]:
        return [s.pose for s in self.steps]


def _json_float(x):
    if x is None or math.isfinite(x):
        return x
    return "inf"


@functools.lru_cache(maxsize=None)
def _sensor_offsets(radius: float, mode: str):
    r = int(math.floor(radius))
    rng = range(-r, r + 1)
    zs = rng if mode == "3d" else (0,)
    out = [
        (dx, dy, dz)
        for dz, dy, dx in itertools.product(zs, rng, rng)
        if dx * dx + dy * dy + dz * dz <= radius * radius
    ]
    return tuple(out)


def line_of_sight(truth: VoxelGrid, a: GridIndex, b: GridIndex) -> bool:
    """True when no occupied voxel lies strictly between ``a`` and ``b``."""
    d = [q - p for p, q in zip(a, b)]
    n = max(abs(c) for c in d)
    for i in range(1, n):
        t = i / n
        p = tuple(math.floor(a[k] + d[k] * t + 0.5) for k in range(3))
        if p != b and truth.get_state(p) == VoxelState.OCCUPIED:
            return False
    return True


def reveal(truth: VoxelGrid, belief: VoxelGrid, pose: GridIndex, radius: float) -> list:
    """Copy visible ground-truth voxels around ``pose`` into ``belief``."""
    records = []
    x, y, z = pose
    for dx, dy, dz in _sensor_offsets(radius, truth.mode):
        v = (x + dx, y + dy, z + dz)
        if not truth.is_touched(v):
            continue
        if not line_of_sight(truth, pose, v):
            continue
        rec = belief.set_state(v, truth.get_state(v))
        if rec:
            records.append(rec)
    return records


class _Clearance:
    def __init__(self, truth: VoxelGrid):
        occ = sorted(truth.occupied)
        self._pts = np.array(occ, dtype=float).reshape(-1, 3)

    def __call__(self, pose: GridIndex) -> float:
        if len(self._pts) == 0:
            return math.inf
        return float(np.sqrt(((self._pts - np.asarray(pose, dtype=float)) ** 2).sum(axis=1).min()))


def default_step_cap(sc: RevealScenario) -> int:
    truth = sc.truth.grid
    bounds = truth.bounds()
    res = dijkstra(CostField(truth, sc.config), bounds, sc.start, sc.goal)
    if res.reachable:
        return 10 * max(len(res.path) - 1, 1)
    return 10 * sum(bounds.shape)


def run(sc: RevealScenario, validate: bool = False) -> ReplayTrace:
    """Simulate the scenario.

    With ``validate`` the planner's invariants are checked after every cycle
    that changed the map, and a :class:`PlannerError` is raised on violation.
    """
    truth = sc.truth.grid
    belief = VoxelGrid(truth.meta)
    cf = CostField(belief, sc.config)
    cap = sc.step_cap if sc.step_cap is not None else default_step_cap(sc)
    clearance = _Clearance(truth)
    events = iter(sc.updates) if sc.updates is not None else None

    t0 = time.perf_counter()
    robot = sc.start
    pc = PlannerCore(cf, robot, sc.goal)
    steps: list[StepRecord] = []
    distance = 0.0
    replans = 0
    expected = None
    outcome = STUCK

    for step in itertools.count():
        if events is not None:
            ev = next(events, None)
            records = []
            if ev is not None:
                records = [belief.set_state(idx, s) for idx, s in ev.changes]
                records = [r for r in records if r]
                if ev.robot is not None and ev.robot != robot:
                    distance += math.dist(robot, ev.robot)
                    robot = ev.robot
                    pc.move_start(robot)
                    expected = None
        else:
            records = reveal(truth, belief, robot, sc.sensor_radius)
        changed = cf.apply_changes(records)
        pc.notify_changes(changed)
        path = pc.compute_path()
        if validate and (records or step == 0):
            problems = pc.check_invariants()
            if problems:
                raise PlannerError(f"step {step}: {problems[0]}")

        cost = None if path is None else path.total_cost
        replanned = (
            cost is not None and expected is not None and abs(cost - expected) > 1e-6
        )
        replans += replanned
        steps.append(StepRecord(step, robot, replanned, cost, clearance(robot), len(records)))

        if robot == sc.goal:
            outcome = REACHED
            break
        if path is None:
            expected = None
            if not records:
                break
            continue
        if step >= cap:
            break
        nxt = path.indices[1]
        expected = cost - edge_cost(cf, robot, nxt)
        distance += math.dist(robot, nxt)
        robot = nxt
        if truth.get_state(robot) == VoxelState.OCCUPIED:
            steps.append(StepRecord(step + 1, robot, False, None, 0.0, 0))
            outcome = COLLISION
            break
        pc.move_start(robot)

    elapsed = time.perf_counter() - t0
    return ReplayTrace(
        steps=steps,
        outcome=outcome,
        distance=distance,
        replans=replans,
        min_clearance=min(s.clearance for s in steps),
        compute_time=elapsed,
    )


def metrics_report(tr: ReplayTrace) -> str:
    """Tab-delimited ``metric<TAB>value`` summary of a trace."""
    rows = [
        ("outcome", tr.outcome),
        ("distance", f"{tr.distance:.6f}"),
        ("replans", str(tr.replans)),
        ("min_clearance", f"{tr.min_clearance:.6f}"),
        ("compute_time_s", f"{tr.compute_time:.6f}"),
        ("steps", str(len(tr.steps) - 1)),
    ]
    return "metric\tvalue\n" + "".join(f"{k}\t{v}\n" for k, v in rows)


def save_trace(tr: ReplayTrace, out, timing: bool = True) -> None:
    with open(out, "w") as fh:
        json.dump(tr.to_dict(timing), fh, indent=1)
        fh.write("\n")


def load_scenario(path) -> RevealScenario:
    """Read a YAML/JSON scenario; file paths inside are relative to it.

    Keys: ``map`` + ``meta`` (2D) or ``map3d`` (3D), ``sensor_radius``,
    ``start``/``goal`` in world coordinates, optional ``costs`` mapping
    (``cf``, ``cu``, ``co``, ``radius``), ``updates`` and ``step_cap``.
    """
    path = FsPath(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise MapFormatError(path, f"invalid scenario: {exc}") from None
    if not isinstance(doc, dict):
        raise MapFormatError(path, "scenario must be a mapping")
    base = path.parent
    try:
        if "map3d" in doc:
            truth = load_map(base / doc["map3d"])
        else:
            truth = load_map(base / doc["map"], base / doc["meta"])
        costs = doc.get("costs") or {}
        config = CostConfig(
            free_cost=float(costs.get("cf", 1.0)),
            unknown_cost=float(costs.get("cu", 50.0)),
            occupied_cost=float(costs.get("co", math.inf)),
            radius=int(costs.get("radius", 2)),
        )
        updates = load_updates(base / doc["updates"]) if doc.get("updates") else None
        meta = truth.meta
        return RevealScenario(
            truth=truth,
            sensor_radius=float(doc["sensor_radius"]),
            start=world_to_index(meta, doc["start"]),
            goal=world_to_index(meta, doc["goal"]),
            config=config,
            updates=updates,
            step_cap=doc.get("step_cap"),
        )
    except MapFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise MapFormatError(path, f"bad scenario: {exc!r}") from None
