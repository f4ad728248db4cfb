"""Map, update-stream, path and costmap file formats.

2D maps use the usual occupancy-image convention: a binary PGM (P5) plus a
YAML sidecar with ``resolution``, ``origin``, ``negate``, ``occupied_thresh``
and ``free_thresh``.  3D maps use a plain-text voxel list::

    dsp3d v1 <resolution> <ox> <oy> <oz>
    x y z S          # S in {F, U, O}; unlisted voxels are unknown

Update streams are JSON lines, one event per line::

    {"t": 0, "changes": [[x, y, z, "O"], ...], "robot": [x, y, z] | null}
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np
import yaml

from .grid import Bounds, GridIndex, GridMeta, VoxelGrid, VoxelState
from .planner import Path
from .riskfield import CostField

DEFAULT_OCCUPIED_THRESH = 0.65
DEFAULT_FREE_THRESH = 0.196


class MapFormatError(ValueError):
    """Malformed input file; the message names the file and line."""

    def __init__(self, path, message: str, line: int | None = None):
        where = f"{path}:{line}" if line is not None else f"{path}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


@dataclass
class MapDocument:
    grid: VoxelGrid
    occupied_thresh: float = DEFAULT_OCCUPIED_THRESH
    free_thresh: float = DEFAULT_FREE_THRESH
    negate: bool = False

    @property
    def meta(self) -> GridMeta:
        return self.grid.meta


@dataclass
class UpdateEvent:
    t: int
    changes: list[tuple[GridIndex, VoxelState]] = field(default_factory=list)
    robot: GridIndex | None = None


UpdateStream = list[UpdateEvent]


# -- PGM -------------------------------------------------------------------


def _pgm_tokens(data: bytes, path):
    """Return the four PGM header fields and the raster offset."""
    pos = 0
    tokens = []
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise MapFormatError(path, "truncated PGM header", 1)
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def read_pgm(path) -> np.ndarray:
    data = FsPath(path).read_bytes()
    tokens, offset = _pgm_tokens(data, path)
    if tokens[0] != b"P5":
        raise MapFormatError(path, f"expected binary PGM magic 'P5', got {tokens[0]!r}", 1)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise MapFormatError(path, "non-integer PGM dimensions", 1) from None
    if width <= 0 or height <= 0:
        raise MapFormatError(path, f"bad PGM size {width}x{height}", 1)
    if maxval != 255:
        raise MapFormatError(path, f"only 8-bit PGM supported (maxval {maxval})", 1)
    raster = data[offset:]
    if len(raster) != width * height:
        raise MapFormatError(
            path, f"raster has {len(raster)} bytes, header says {width}x{height}"
        )
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def write_pgm(path, image: np.ndarray) -> None:
    image = np.asarray(image, dtype=np.uint8)
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


# -- 2D maps ---------------------------------------------------------------


def _read_meta(meta_path) -> dict:
    try:
        with open(meta_path) as fh:
            meta = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        line = getattr(getattr(exc, "problem_mark", None), "line", None)
        raise MapFormatError(meta_path, f"invalid YAML: {exc}", None if line is None else line + 1)
    if not isinstance(meta, dict):
        raise MapFormatError(meta_path, "metadata must be a key-value mapping", 1)
    for key in ("resolution", "origin"):
        if key not in meta:
            raise MapFormatError(meta_path, f"missing key {key!r}")
    return meta


def load_grid2d(image_path, meta_path) -> MapDocument:
    meta = _read_meta(meta_path)
    try:
        res = float(meta["resolution"])
        origin = [float(c) for c in meta["origin"]]
        occ_t = float(meta.get("occupied_thresh", DEFAULT_OCCUPIED_THRESH))
        free_t = float(meta.get("free_thresh", DEFAULT_FREE_THRESH))
        negate = bool(int(meta.get("negate", 0)))
    except (TypeError, ValueError) as exc:
        raise MapFormatError(meta_path, f"bad metadata value: {exc}") from None
    for name, t in (("occupied_thresh", occ_t), ("free_thresh", free_t)):
        if not 0.0 <= t <= 1.0:
            raise MapFormatError(meta_path, f"{name} {t} outside [0, 1]")
    if len(origin) < 2:
        raise MapFormatError(meta_path, "origin needs at least x and y")
    if not res > 0:
        raise MapFormatError(meta_path, f"resolution must be positive, got {res}")

    img = read_pgm(image_path)
    h, w = img.shape
    p = img / 255.0 if negate else (255 - img.astype(np.int32)) / 255.0
    states = np.full(img.shape, VoxelState.UNKNOWN, dtype=np.uint8)
    states[p > occ_t] = VoxelState.OCCUPIED
    states[p < free_t] = VoxelState.FREE
    # image row 0 is the top of the map
    states = states[::-1]
    # the sidecar origin is the lower-left corner; grid origin is a voxel center
    gmeta = GridMeta(res, (origin[0] + res / 2, origin[1] + res / 2, 0.0), "2d")
    grid = VoxelGrid.from_array(states, gmeta)
    return MapDocument(grid, occ_t, free_t, negate)


def _unknown_pixel(doc: MapDocument) -> int:
    candidates = [205, round(255 * (1 - (doc.occupied_thresh + doc.free_thresh) / 2))]
    for v in candidates:
        p = v / 255.0 if doc.negate else (255 - v) / 255.0
        if doc.free_thresh <= p <= doc.occupied_thresh:
            return v
    raise ValueError("thresholds leave no pixel value that reads back as unknown")


def save_grid2d(doc: MapDocument, image_path, meta_path) -> None:
    grid = doc.grid
    if grid.mode != "2d":
        raise ValueError("save_grid2d needs a 2D grid")
    bounds = grid.bounds() or Bounds((0, 0, 0), (0, 0, 0))
    states = grid.to_array(bounds)[0][::-1]
    occupied_px, free_px = (255, 0) if doc.negate else (0, 254)
    img = np.full(states.shape, _unknown_pixel(doc), dtype=np.uint8)
    img[states == VoxelState.OCCUPIED] = occupied_px
    img[states == VoxelState.FREE] = free_px
    write_pgm(image_path, img)
    res = grid.meta.resolution
    ox, oy, _ = grid.meta.origin
    lx, ly, _ = bounds.lo
    meta = {
        "image": os.path.basename(str(image_path)),
        "resolution": res,
        "origin": [ox + lx * res - res / 2, oy + ly * res - res / 2, 0.0],
        "negate": int(doc.negate),
        "occupied_thresh": doc.occupied_thresh,
        "free_thresh": doc.free_thresh,
    }
    with open(meta_path, "w") as fh:
        yaml.safe_dump(meta, fh, sort_keys=False)


# -- 3D maps ---------------------------------------------------------------


def _parse_ints(parts, path, lineno):
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise MapFormatError(path, f"non-integer coordinates {' '.join(parts)!r}", lineno) from None


def load_grid3d(path) -> MapDocument:
    with open(path, encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MapFormatError(path, "empty file, expected dsp3d header", 1)
    head = lines[0].split()
    if len(head) != 6 or head[0] != "dsp3d" or head[1] != "v1":
        raise MapFormatError(path, "header must be 'dsp3d v1 <resolution> <ox> <oy> <oz>'", 1)
    try:
        res, ox, oy, oz = (float(t) for t in head[2:])
        meta = GridMeta(res, (ox, oy, oz), "3d")
    except ValueError as exc:
        raise MapFormatError(path, f"bad header values: {exc}", 1) from None
    grid = VoxelGrid(meta)
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 4:
            raise MapFormatError(path, f"expected 'x y z S', got {line!r}", lineno)
        idx = _parse_ints(parts[:3], path, lineno)
        try:
            state = VoxelState.from_letter(parts[3])
        except ValueError as exc:
            raise MapFormatError(path, str(exc), lineno) from None
        grid.set_state(idx, state)
    return MapDocument(grid)


def save_grid3d(doc: MapDocument, path) -> None:
    meta = doc.meta
    ox, oy, oz = meta.origin
    out = [f"dsp3d v1 {meta.resolution!r} {ox!r} {oy!r} {oz!r}"]
    for (x, y, z), s in doc.grid.touched():
        out.append(f"{x} {y} {z} {s.letter}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(out) + "\n")


def load_map(path, meta_path=None) -> MapDocument:
    """Dispatch on format: image + sidecar is 2D, ``dsp3d`` text is 3D."""
    if meta_path is not None:
        return load_grid2d(path, meta_path)
    return load_grid3d(path)


# -- update streams --------------------------------------------------------


def load_updates(path) -> UpdateStream:
    events: UpdateStream = []
    with open(path, encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                t = obj["t"]
                if not isinstance(t, int):
                    raise ValueError("t must be an integer")
                changes = []
                for rec in obj.get("changes", []):
                    if len(rec) != 4 or not all(isinstance(c, int) for c in rec[:3]):
                        raise ValueError(f"bad change record {rec!r}")
                    changes.append((tuple(rec[:3]), VoxelState.from_letter(rec[3])))
                robot = obj.get("robot")
                if robot is not None:
                    if len(robot) != 3 or not all(isinstance(c, int) for c in robot):
                        raise ValueError(f"bad robot pose {robot!r}")
                    robot = tuple(robot)
            except (ValueError, KeyError, TypeError) as exc:
                raise MapFormatError(path, f"malformed event: {exc}", lineno) from None
            if events and t <= events[-1].t:
                raise MapFormatError(path, f"t={t} not after t={events[-1].t}", lineno)
            events.append(UpdateEvent(t, changes, robot))
    return events


def save_updates(stream: UpdateStream, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for ev in stream:
            obj = {
                "t": ev.t,
                "changes": [[*idx, s.letter] for idx, s in ev.changes],
                "robot": None if ev.robot is None else list(ev.robot),
            }
            fh.write(json.dumps(obj, separators=(",", ":")) + "\n")


# -- outputs ---------------------------------------------------------------


def save_path(path: Path, out) -> None:
    doc = {
        "total_cost": path.total_cost,
        "voxel_count": len(path.indices),
        "length": path.length(),
        "indices": [list(v) for v in path.indices],
        "points": [list(p) for p in path.points],
    }
    with open(out, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_path(src) -> dict:
    with open(src) as fh:
        return json.load(fh)


def costmap_image(cf: CostField, bounds: Bounds, z: int | None = None) -> np.ndarray:
    """Grayscale rendering of total cost over one z-layer; darker is costlier.

    Costs saturate at twice the unknown cost; occupied voxels are black.
    Row 0 of the returned image is the top (max y) of the map.
    """
    z = bounds.lo[2] if z is None else z
    cap = 2.0 * cf.config.unknown_cost
    sx, sy, _ = bounds.shape
    lx, ly, _ = bounds.lo
    img = np.zeros((sy, sx), dtype=np.uint8)
    for j in range(sy):
        for i in range(sx):
            idx = (lx + i, ly + j, z)
            if cf.grid.get_state(idx) == VoxelState.OCCUPIED:
                continue
            c = min(cf.total_cost(idx), cap)
            img[sy - 1 - j, i] = math.floor(255.0 * (1.0 - c / cap) + 0.5)
    return img


def save_costmap(cf: CostField, bounds: Bounds, out, z: int | None = None) -> None:
    write_pgm(out, costmap_image(cf, bounds, z))
