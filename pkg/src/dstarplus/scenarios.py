"""Constructed maps and replay scenarios used by the corpus and test suite."""
from __future__ import annotations

import numpy as np

from .grid import GridMeta, VoxelGrid, VoxelState
from .mapio import MapDocument, UpdateEvent
from .replay import RevealScenario
from .riskfield import CostConfig

F, U, O = VoxelState.FREE, VoxelState.UNKNOWN, VoxelState.OCCUPIED


def _doc(arr, resolution=1.0, mode=None) -> MapDocument:
    arr = np.asarray(arr, dtype=np.uint8)
    if mode is None:
        mode = "2d" if arr.ndim == 2 else "3d"
    return MapDocument(VoxelGrid.from_array(arr, GridMeta(resolution, mode=mode)))


def random_states(rng: np.random.Generator, shape, p=(0.6, 0.25, 0.15)) -> np.ndarray:
    """i.i.d. voxel states; ``shape`` is (ny, nx) or (nz, ny, nx)."""
    return rng.choice(np.array([F, U, O], dtype=np.uint8), size=shape, p=p)


def corridor(length: int = 40, width: int = 7) -> MapDocument:
    """Straight corridor along x with occupied walls on rows 0 and width-1."""
    arr = np.full((width, length), F, dtype=np.uint8)
    arr[0, :] = O
    arr[-1, :] = O
    return _doc(arr)


def shortcut_map() -> MapDocument:
    """Occupied barrier with a 6-voxel-long unknown gap on the straight route.

    Start (2, 3), goal (27, 3).  Going around the barrier top is a known-free
    detour about ten voxels longer (35.28 vs 25).
    """
    arr = np.full((16, 30), F, dtype=np.uint8)
    arr[0, 12:18] = O
    arr[1:6, 12:18] = U
    arr[6:12, 12:18] = O
    return _doc(arr)


SHORTCUT_START = (2, 3, 0)
SHORTCUT_GOAL = (27, 3, 0)


def bend_world() -> MapDocument:
    """30x20 L-shaped corridor of free width 7 inside solid rock."""
    arr = np.full((20, 30), O, dtype=np.uint8)
    arr[2:9, 1:23] = F
    arr[2:19, 16:23] = F
    return _doc(arr)


BEND_START = (3, 5, 0)
BEND_GOAL = (19, 16, 0)


def bend_scenario(sensor_radius: float = 5, radius: int = 2) -> RevealScenario:
    """Initially empty map; the inner wall of the bend is beyond sensor range
    and the first plan cuts straight through it."""
    return RevealScenario(
        bend_world(), sensor_radius, BEND_START, BEND_GOAL, CostConfig(radius=radius)
    )


def bend_straight_sections(pose) -> bool:
    x, y, _ = pose
    return (x <= 11 and y <= 8) or (x >= 16 and y >= 13)


def walled_goal_world() -> MapDocument:
    arr = np.full((20, 20), F, dtype=np.uint8)
    arr[12:19, 12:19] = O
    arr[13:18, 13:18] = F
    return _doc(arr)


def walled_goal_scenario() -> RevealScenario:
    return RevealScenario(walled_goal_world(), 5, (2, 2, 0), (15, 15, 0))


def open_world(size: int = 24) -> MapDocument:
    arr = np.full((size, size), F, dtype=np.uint8)
    arr[size // 3 : 2 * size // 3, size // 2] = O
    return _doc(arr)


def expansion_world(seed: int = 7, size: int = 128, density: float = 0.08) -> MapDocument:
    """Random obstacle field with clear patches around (2, 2) and the far corner."""
    rng = np.random.default_rng(seed)
    arr = np.where(rng.random((size, size)) < density, O, F).astype(np.uint8)
    arr[:6, :6] = F
    arr[-6:, -6:] = F
    return _doc(arr)


def block_reveal_stream(truth: MapDocument, start, block: int = 16) -> list[UpdateEvent]:
    """Reveal the truth in ``block``-sized squares, nearest to ``start`` first."""
    b = truth.grid.bounds()
    sx, sy, _ = b.shape
    blocks = [(bx, by) for by in range(0, sy, block) for bx in range(0, sx, block)]
    cx, cy = start[0] // block, start[1] // block
    blocks.sort(key=lambda c: ((c[0] // block - cx) ** 2 + (c[1] // block - cy) ** 2, c[1], c[0]))
    events = []
    for t, (bx, by) in enumerate(blocks):
        changes = []
        for y in range(by, min(by + block, sy)):
            for x in range(bx, min(bx + block, sx)):
                idx = (b.lo[0] + x, b.lo[1] + y, 0)
                changes.append((idx, truth.grid.get_state(idx)))
        events.append(UpdateEvent(t, changes))
    return events


def expansion_scenario(seed: int = 7) -> RevealScenario:
    truth = expansion_world(seed)
    start, goal = (2, 2, 0), (125, 125, 0)
    return RevealScenario(
        truth, 5, start, goal, CostConfig(radius=2), updates=block_reveal_stream(truth, start)
    )


def overpass_world() -> MapDocument:
    """3D box with a floor-standing wall; the cheap way is over the top."""
    arr = np.full((6, 9, 20), F, dtype=np.uint8)
    arr[0] = O
    arr[:4, :, 9:11] = O
    return _doc(arr)


OVERPASS_START = (2, 4, 1)
OVERPASS_GOAL = (17, 4, 1)
