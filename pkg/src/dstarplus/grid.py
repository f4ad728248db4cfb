"""Chunked, expandable voxel grid with three voxel states.

Voxels are addressed by signed integer ``(x, y, z)`` tuples.  Storage is
allocated lazily in 16-voxel chunks so the grid can grow in any direction
while the map is being explored.  A grid in 2D mode has exactly one z-layer
(``z == 0``).
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Literal, Sequence

CHUNK_EDGE = 16
_SHIFT = 4
_MASK = CHUNK_EDGE - 1

GridIndex = tuple[int, int, int]
Mode = Literal["2d", "3d"]


class VoxelState(enum.IntEnum):
    FREE = 0
    UNKNOWN = 1
    OCCUPIED = 2

    @property
    def letter(self) -> str:
        return "FUO"[self]

    @classmethod
    def from_letter(cls, letter: str) -> "VoxelState":
        try:
            return _BY_LETTER[letter]
        except KeyError:
            raise ValueError(f"unknown voxel state letter {letter!r}") from None


_BY_LETTER = {"F": VoxelState.FREE, "U": VoxelState.UNKNOWN, "O": VoxelState.OCCUPIED}
_STATES = tuple(VoxelState)


@dataclass(frozen=True)
class GridMeta:
    resolution: float = 1.0
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    mode: Mode = "2d"

    def __post_init__(self):
        if not (self.resolution > 0 and math.isfinite(self.resolution)):
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        if self.mode not in ("2d", "3d"):
            raise ValueError(f"mode must be '2d' or '3d', got {self.mode!r}")
        if len(self.origin) != 3:
            raise ValueError("origin must have three components")
        object.__setattr__(self, "origin", tuple(float(c) for c in self.origin))


@dataclass(frozen=True)
class Bounds:
    """Inclusive axis-aligned box of voxel indices."""

    lo: GridIndex
    hi: GridIndex

    def __contains__(self, idx) -> bool:
        lo, hi = self.lo, self.hi
        return (
            lo[0] <= idx[0] <= hi[0]
            and lo[1] <= idx[1] <= hi[1]
            and lo[2] <= idx[2] <= hi[2]
        )

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))

    def __iter__(self) -> Iterator[GridIndex]:
        # (z, y, x) order so iteration matches the canonical file order
        for z in range(self.lo[2], self.hi[2] + 1):
            for y in range(self.lo[1], self.hi[1] + 1):
                for x in range(self.lo[0], self.hi[0] + 1):
                    yield (x, y, z)

    def __len__(self) -> int:
        sx, sy, sz = self.shape
        return sx * sy * sz

    def union(self, other: "Bounds | GridIndex") -> "Bounds":
        if not isinstance(other, Bounds):
            other = Bounds(tuple(other), tuple(other))
        return Bounds(
            tuple(min(a, b) for a, b in zip(self.lo, other.lo)),
            tuple(max(a, b) for a, b in zip(self.hi, other.hi)),
        )

    def grow(self, margin: int) -> "Bounds":
        return Bounds(
            tuple(c - margin for c in self.lo), tuple(c + margin for c in self.hi)
        )

    def intersect(self, other: "Bounds") -> "Bounds | None":
        lo = tuple(max(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        if any(l > h for l, h in zip(lo, hi)):
            return None
        return Bounds(lo, hi)

    @classmethod
    def from_shape(cls, shape: Sequence[int], lo: GridIndex = (0, 0, 0)) -> "Bounds":
        shape = tuple(shape) + (1,) * (3 - len(shape))
        return cls(tuple(lo), tuple(l + s - 1 for l, s in zip(lo, shape)))


@dataclass(frozen=True)
class ChangeRecord:
    index: GridIndex
    old: VoxelState
    new: VoxelState

    @property
    def empty(self) -> bool:
        return self.old == self.new

    def __bool__(self) -> bool:
        return not self.empty


class _Chunk:
    __slots__ = ("states", "touched")

    def __init__(self, size: int):
        self.states = bytearray([VoxelState.UNKNOWN]) * size
        self.touched = bytearray(size)


def _offsets(mode: Mode) -> list[tuple[GridIndex, float]]:
    dzs = (0,) if mode == "2d" else (-1, 0, 1)
    out = []
    for dz, dy, dx in itertools.product(dzs, (-1, 0, 1), (-1, 0, 1)):
        if dx == dy == dz == 0:
            continue
        out.append(((dx, dy, dz), math.sqrt(dx * dx + dy * dy + dz * dz)))
    return out


NEIGHBOR_OFFSETS: dict[str, list[tuple[GridIndex, float]]] = {
    "2d": _offsets("2d"),
    "3d": _offsets("3d"),
}


def neighbors(idx: GridIndex, mode: Mode) -> list[tuple[GridIndex, float]]:
    """Lattice neighbors of ``idx`` with step lengths in voxel units.

    8-connected in 2D, 26-connected in 3D, ordered by ``(dz, dy, dx)``.
    """
    x, y, z = idx
    return [((x + dx, y + dy, z + dz), step) for (dx, dy, dz), step in NEIGHBOR_OFFSETS[mode]]


def step_length(u: GridIndex, v: GridIndex) -> float | None:
    """Euclidean step between lattice neighbors, or None if not neighbors."""
    d = [abs(a - b) for a, b in zip(u, v)]
    if max(d) != 1:
        return None
    return math.sqrt(sum(d))


def world_to_index(meta: GridMeta, point: Sequence[float]) -> GridIndex:
    res = meta.resolution
    ox, oy, oz = meta.origin
    p = tuple(point) + (0.0,) * (3 - len(point))
    ix = math.floor((p[0] - ox) / res + 0.5)
    iy = math.floor((p[1] - oy) / res + 0.5)
    iz = 0 if meta.mode == "2d" else math.floor((p[2] - oz) / res + 0.5)
    return (ix, iy, iz)


def index_to_world(meta: GridMeta, idx: GridIndex) -> tuple[float, float, float]:
    res = meta.resolution
    return tuple(o + i * res for o, i in zip(meta.origin, idx))


class VoxelGrid:
    """Sparse voxel lattice; voxels never written read as UNKNOWN.

    Population counters and :meth:`bounds` cover *touched* voxels, i.e. those
    that have been written at least once (even if written as UNKNOWN).
    """

    def __init__(self, meta: GridMeta | None = None):
        self.meta = meta if meta is not None else GridMeta()
        self._depth = 1 if self.meta.mode == "2d" else CHUNK_EDGE
        self._chunk_size = CHUNK_EDGE * CHUNK_EDGE * self._depth
        self._chunks: dict[GridIndex, _Chunk] = {}
        self._counts = [0, 0, 0]
        self._lo: list[int] | None = None
        self._hi: list[int] | None = None
        self.occupied: set[GridIndex] = set()

    @property
    def mode(self) -> Mode:
        return self.meta.mode

    @property
    def chunk_count(self) -> int:
        return len(self._chunks)

    def _locate(self, idx: GridIndex) -> tuple[GridIndex, int]:
        x, y, z = idx
        if self._depth == 1:
            return (x >> _SHIFT, y >> _SHIFT, 0), ((y & _MASK) << _SHIFT) | (x & _MASK)
        return (
            (x >> _SHIFT, y >> _SHIFT, z >> _SHIFT),
            ((((z & _MASK) << _SHIFT) | (y & _MASK)) << _SHIFT) | (x & _MASK),
        )

    def get_state(self, idx: GridIndex) -> VoxelState:
        key, off = self._locate(idx)
        chunk = self._chunks.get(key)
        if chunk is None:
            return VoxelState.UNKNOWN
        if self._depth == 1 and idx[2] != 0:
            return VoxelState.UNKNOWN
        return _STATES[chunk.states[off]]

    def is_touched(self, idx: GridIndex) -> bool:
        if self._depth == 1 and idx[2] != 0:
            return False
        key, off = self._locate(idx)
        chunk = self._chunks.get(key)
        return chunk is not None and bool(chunk.touched[off])

    def set_state(self, idx: GridIndex, state: VoxelState) -> ChangeRecord:
        idx = (int(idx[0]), int(idx[1]), int(idx[2]))
        state = VoxelState(state)
        if self._depth == 1 and idx[2] != 0:
            raise ValueError(f"z must be 0 in 2D mode, got index {idx}")
        key, off = self._locate(idx)
        chunk = self._chunks.get(key)
        if chunk is None:
            chunk = self._chunks[key] = _Chunk(self._chunk_size)
        old = _STATES[chunk.states[off]]
        if not chunk.touched[off]:
            chunk.touched[off] = 1
            self._counts[old] += 1
            self._extend_bounds(idx)
        if old != state:
            chunk.states[off] = state
            self._counts[old] -= 1
            self._counts[state] += 1
            if state == VoxelState.OCCUPIED:
                self.occupied.add(idx)
            elif old == VoxelState.OCCUPIED:
                self.occupied.discard(idx)
        return ChangeRecord(idx, old, state)

    def _extend_bounds(self, idx: GridIndex) -> None:
        if self._lo is None:
            self._lo, self._hi = list(idx), list(idx)
            return
        for a in range(3):
            if idx[a] < self._lo[a]:
                self._lo[a] = idx[a]
            elif idx[a] > self._hi[a]:
                self._hi[a] = idx[a]

    def bounds(self) -> Bounds | None:
        """Bounding box of touched voxels (None for a fresh grid)."""
        if self._lo is None:
            return None
        return Bounds(tuple(self._lo), tuple(self._hi))

    def population(self) -> dict[VoxelState, int]:
        return {s: self._counts[s] for s in VoxelState}

    def recount(self) -> dict[VoxelState, int]:
        """Population computed from storage; must equal :meth:`population`."""
        counts = [0, 0, 0]
        for chunk in self._chunks.values():
            for s, t in zip(chunk.states, chunk.touched):
                if t:
                    counts[s] += 1
        return {s: counts[s] for s in VoxelState}

    def touched(self) -> Iterator[tuple[GridIndex, VoxelState]]:
        """Touched voxels in canonical ``(z, y, x)`` order."""
        items = []
        for (cx, cy, cz), chunk in self._chunks.items():
            for off, t in enumerate(chunk.touched):
                if not t:
                    continue
                x = (cx << _SHIFT) | (off & _MASK)
                y = (cy << _SHIFT) | ((off >> _SHIFT) & _MASK)
                z = 0 if self._depth == 1 else (cz << _SHIFT) | (off >> (2 * _SHIFT))
                items.append(((x, y, z), _STATES[chunk.states[off]]))
        items.sort(key=lambda it: (it[0][2], it[0][1], it[0][0]))
        return iter(items)

    def neighbors(self, idx: GridIndex) -> list[tuple[GridIndex, float]]:
        return neighbors(idx, self.meta.mode)

    def to_array(self, bounds: Bounds):
        """Dense ``(nz, ny, nx)`` uint8 array of states over ``bounds``."""
        import numpy as np

        sx, sy, sz = bounds.shape
        out = np.full((sz, sy, sx), VoxelState.UNKNOWN, dtype=np.uint8)
        lx, ly, lz = bounds.lo
        for (x, y, z), s in self.touched():
            if (x, y, z) in bounds:
                out[z - lz, y - ly, x - lx] = s
        return out

    @classmethod
    def from_array(cls, states, meta: GridMeta | None = None, lo: GridIndex = (0, 0, 0)) -> "VoxelGrid":
        """Build a grid from a ``(ny, nx)`` or ``(nz, ny, nx)`` array of states."""
        import numpy as np

        arr = np.asarray(states)
        if arr.ndim == 2:
            arr = arr[None]
        if meta is None:
            meta = GridMeta(mode="2d" if arr.shape[0] == 1 else "3d")
        grid = cls(meta)
        lx, ly, lz = lo
        for (z, y, x), s in np.ndenumerate(arr):
            grid.set_state((x + lx, y + ly, z + lz), VoxelState(int(s)))
        return grid
