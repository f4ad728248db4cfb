"""Regenerate the example map corpus under ``corpus/``.

    python scripts/make_corpus.py [outdir]
"""
import sys
from pathlib import Path

import numpy as np
import yaml

from dstarplus import scenarios as S
from dstarplus.grid import GridMeta, VoxelGrid, VoxelState, index_to_world
from dstarplus.mapio import MapDocument, UpdateEvent, save_grid2d, save_grid3d, save_updates


def save2d(doc, out, name):
    save_grid2d(doc, out / f"{name}.pgm", out / f"{name}.yaml")


def scenario(out, name, map_name, doc, start, goal, **extra):
    meta = doc.meta
    body = {
        "map": f"{map_name}.pgm",
        "meta": f"{map_name}.yaml",
        "sensor_radius": extra.pop("sensor_radius", 5),
        "start": list(index_to_world(meta, start)[:2]),
        "goal": list(index_to_world(meta, goal)[:2]),
        "costs": {"cf": 1.0, "cu": 50.0, "radius": 2},
    }
    body.update(extra)
    (out / f"{name}.scenario.yaml").write_text(yaml.safe_dump(body, sort_keys=False))


def main(out):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(2024)

    save2d(S.corridor(40, 7), out, "corridor")
    save2d(S.corridor(40, 5), out, "narrow")
    save2d(S.shortcut_map(), out, "shortcut")
    save2d(S.bend_world(), out, "bend")
    save2d(S.walled_goal_world(), out, "walled")

    rand = MapDocument(
        VoxelGrid.from_array(S.random_states(rng, (32, 48)), GridMeta(0.05, (-1.0, 2.0, 0.0))),
        occupied_thresh=0.7,
        free_thresh=0.3,
        negate=True,
    )
    save2d(rand, out, "random2d")

    save_grid3d(S.overpass_world(), out / "overpass.dsp3d")
    save_grid3d(
        MapDocument(VoxelGrid.from_array(S.random_states(rng, (8, 16, 16)), GridMeta(0.2, mode="3d"))),
        out / "random3d.dsp3d",
    )
    sparse = VoxelGrid(GridMeta(0.25, (1.5, -2.0, 0.5), "3d"))
    for _ in range(60):
        idx = tuple(int(c) for c in rng.integers(-20, 20, size=3))
        sparse.set_state(idx, VoxelState(int(rng.integers(3))))
    save_grid3d(MapDocument(sparse), out / "sparse3d.dsp3d")

    bend = S.bend_world()
    hidden = [
        UpdateEvent(0, [((x, y, 0), VoxelState.FREE) for x in range(1, 8) for y in range(2, 9)], None),
        UpdateEvent(3, [((x, 9, 0), VoxelState.OCCUPIED) for x in range(1, 16)], (4, 5, 0)),
        UpdateEvent(7, [((15, y, 0), VoxelState.OCCUPIED) for y in range(9, 19)], None),
    ]
    save_updates(hidden, out / "bend_walls.jsonl")
    save_updates(S.block_reveal_stream(S.expansion_world(), (2, 2, 0)), out / "expansion.jsonl")
    save_updates([], out / "empty.jsonl")

    save2d(S.expansion_world(), out, "expansion")
    scenario(out, "bend", "bend", bend, S.BEND_START, S.BEND_GOAL)
    scenario(out, "walled", "walled", S.walled_goal_world(), (2, 2, 0), (15, 15, 0))
    scenario(
        out, "expansion", "expansion", S.expansion_world(), (2, 2, 0), (125, 125, 0),
        updates="expansion.jsonl",
    )


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "corpus")
