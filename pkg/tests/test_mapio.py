import json

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from dstarplus.grid import GridMeta, VoxelGrid, VoxelState
from dstarplus.mapio import (
    MapDocument,
    MapFormatError,
    UpdateEvent,
    costmap_image,
    load_grid2d,
    load_grid3d,
    load_path,
    load_updates,
    read_pgm,
    save_grid2d,
    save_grid3d,
    save_path,
    save_updates,
    write_pgm,
)
from dstarplus.planner import plan
from dstarplus.riskfield import CostConfig, CostField

F, U, O = VoxelState.FREE, VoxelState.UNKNOWN, VoxelState.OCCUPIED

META = "resolution: 0.5\norigin: [1.0, -2.0, 0.0]\nnegate: 0\noccupied_thresh: 0.65\nfree_thresh: 0.196\n"


def write_map(tmp_path, img, meta=META):
    write_pgm(tmp_path / "m.pgm", np.asarray(img, dtype=np.uint8))
    (tmp_path / "m.yaml").write_text(meta)
    return tmp_path / "m.pgm", tmp_path / "m.yaml"


def test_pixel_classification(tmp_path):
    # top row of the image is the highest y
    doc = load_grid2d(*write_map(tmp_path, [[0, 254, 205], [254, 254, 254]]))
    g = doc.grid
    assert g.get_state((0, 1, 0)) == O
    assert g.get_state((1, 1, 0)) == F
    assert g.get_state((2, 1, 0)) == U
    assert g.get_state((0, 0, 0)) == F
    assert doc.meta.resolution == 0.5
    assert doc.meta.origin[:2] == (1.25, -1.75)


def test_negate_flips_pixels(tmp_path):
    meta = META.replace("negate: 0", "negate: 1")
    doc = load_grid2d(*write_map(tmp_path, [[0, 255]], meta))
    assert doc.grid.get_state((0, 0, 0)) == F
    assert doc.grid.get_state((1, 0, 0)) == O


def test_pgm_with_comment(tmp_path):
    (tmp_path / "c.pgm").write_bytes(b"P5\n# made by hand\n2 1\n255\n\x00\xfe")
    assert read_pgm(tmp_path / "c.pgm").tolist() == [[0, 254]]


def test_bad_magic(tmp_path):
    (tmp_path / "a.pgm").write_bytes(b"P2\n1 1\n255\n0\n")
    with pytest.raises(MapFormatError, match="a.pgm:1"):
        read_pgm(tmp_path / "a.pgm")


def test_raster_size_mismatch(tmp_path):
    (tmp_path / "a.pgm").write_bytes(b"P5\n3 3\n255\n\x00\x00")
    with pytest.raises(MapFormatError, match="raster"):
        read_pgm(tmp_path / "a.pgm")


def test_threshold_out_of_range(tmp_path):
    with pytest.raises(MapFormatError, match="occupied_thresh"):
        load_grid2d(*write_map(tmp_path, [[0]], META.replace("0.65", "1.5")))


def test_missing_metadata_key(tmp_path):
    with pytest.raises(MapFormatError, match="resolution"):
        load_grid2d(*write_map(tmp_path, [[0]], "origin: [0, 0, 0]\n"))


def test_save_2d_pixel_values(tmp_path):
    g = VoxelGrid.from_array(np.array([[F, U, O]], dtype=np.uint8))
    save_grid2d(MapDocument(g), tmp_path / "o.pgm", tmp_path / "o.yaml")
    assert read_pgm(tmp_path / "o.pgm").tolist() == [[254, 205, 0]]


def test_dsp3d_single_record(tmp_path):
    (tmp_path / "a.dsp3d").write_text("dsp3d v1 0.1 0 0 0\n1 -2 3 O\n")
    doc = load_grid3d(tmp_path / "a.dsp3d")
    assert list(doc.grid.touched()) == [((1, -2, 3), O)]
    assert doc.meta.resolution == 0.1 and doc.meta.mode == "3d"


def test_dsp3d_empty_body(tmp_path):
    (tmp_path / "a.dsp3d").write_text("dsp3d v1 1.0 0 0 0\n")
    doc = load_grid3d(tmp_path / "a.dsp3d")
    assert list(doc.grid.touched()) == []


@pytest.mark.parametrize(
    "body, line",
    [
        ("dsp3d v2 1 0 0 0\n", 1),
        ("", 1),
        ("dsp3d v1 1 0 0 0\n0 0 0 F\n0 0 X\n", 3),
        ("dsp3d v1 1 0 0 0\n0 0 0 Q\n", 2),
        ("dsp3d v1 1 0 0 0\n0 a 0 F\n", 2),
    ],
)
def test_dsp3d_errors_name_the_line(tmp_path, body, line):
    (tmp_path / "a.dsp3d").write_text(body)
    with pytest.raises(MapFormatError, match=f"a.dsp3d:{line}:"):
        load_grid3d(tmp_path / "a.dsp3d")


def test_dsp3d_round_trip_is_byte_identical(tmp_path, corpus):
    src = corpus / "sparse3d.dsp3d"
    save_grid3d(load_grid3d(src), tmp_path / "b.dsp3d")
    assert (tmp_path / "b.dsp3d").read_bytes() == src.read_bytes()


def test_updates_empty_file(tmp_path):
    (tmp_path / "u.jsonl").write_text("")
    assert load_updates(tmp_path / "u.jsonl") == []


def test_updates_single_event(tmp_path):
    (tmp_path / "u.jsonl").write_text('{"t": 4, "changes": [[1, 2, 0, "O"]], "robot": [0, 0, 0]}\n')
    (ev,) = load_updates(tmp_path / "u.jsonl")
    assert ev == UpdateEvent(4, [((1, 2, 0), O)], (0, 0, 0))


@pytest.mark.parametrize(
    "body, line",
    [
        ('{"t": 1, "changes": []}\n{"t": 1, "changes": []}\n', 2),
        ('{"t": 1, "changes": [[1, 2, "O"]]}\n', 1),
        ('{"t": 1, "changes": [[1, 2, 0, "Z"]]}\n', 1),
        ('{"changes": []}\n', 1),
        ('{"t": 0}\nnot json\n', 2),
    ],
)
def test_updates_errors(tmp_path, body, line):
    (tmp_path / "u.jsonl").write_text(body)
    with pytest.raises(MapFormatError, match=f"u.jsonl:{line}:"):
        load_updates(tmp_path / "u.jsonl")


def test_costmap_around_single_obstacle():
    g = VoxelGrid.from_array(np.zeros((7, 7), dtype=np.uint8))
    g.set_state((3, 3, 0), O)
    cf = CostField(g, CostConfig(unknown_cost=50.0, radius=2))
    img = costmap_image(cf, g.bounds())
    # image row index = 6 - y
    assert img[3, 3] == 0
    assert img[3, 4] == 189
    assert img[2, 4] == 200
    assert img[3, 5] == 210
    assert img[0, 0] == 252


def test_path_export(tmp_path):
    cf = CostField(VoxelGrid.from_array(np.zeros((3, 3), dtype=np.uint8), GridMeta(0.5)), CostConfig())
    p = plan(cf, (0, 0, 0), (2, 0, 0))
    save_path(p, tmp_path / "p.json")
    doc = load_path(tmp_path / "p.json")
    assert doc["total_cost"] == 2.0
    assert doc["indices"] == [[0, 0, 0], [1, 0, 0], [2, 0, 0]]
    assert doc["points"][-1] == [1.0, 0.0, 0.0]
    json.dumps(doc)


states_2d = st.lists(st.lists(st.sampled_from([0, 1, 2]), min_size=1, max_size=9), min_size=1, max_size=9).filter(
    lambda rows: len({len(r) for r in rows}) == 1
)


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(states_2d, st.sampled_from([0.05, 0.1, 1.0]), st.booleans())
def test_2d_round_trip(tmp_path, rows, res, negate):
    arr = np.array(rows, dtype=np.uint8)
    g = VoxelGrid.from_array(arr, GridMeta(res, (0.3, -1.1, 0.0)), lo=(2, -3, 0))
    save_grid2d(MapDocument(g, negate=negate), tmp_path / "r.pgm", tmp_path / "r.yaml")
    back = load_grid2d(tmp_path / "r.pgm", tmp_path / "r.yaml").grid
    np.testing.assert_array_equal(back.to_array(back.bounds())[0], arr)
    # the same voxel centers land in the same world places
    for j in range(arr.shape[0]):
        for i in range(arr.shape[1]):
            w0 = (0.3 + (i + 2) * res, -1.1 + (j - 3) * res)
            ox, oy, _ = back.meta.origin
            assert ox + i * res == pytest.approx(w0[0]) and oy + j * res == pytest.approx(w0[1])


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.dictionaries(st.tuples(*[st.integers(-30, 30)] * 3), st.sampled_from(list(VoxelState)), max_size=40))
def test_3d_round_trip(tmp_path, cells):
    g = VoxelGrid(GridMeta(0.2, (1.0, 2.0, 3.0), "3d"))
    for idx, s in cells.items():
        g.set_state(idx, s)
    save_grid3d(MapDocument(g), tmp_path / "r.dsp3d")
    back = load_grid3d(tmp_path / "r.dsp3d").grid
    assert list(back.touched()) == list(g.touched())
    assert back.meta == g.meta


@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(
    st.lists(
        st.tuples(
            st.lists(st.tuples(st.tuples(*[st.integers(-9, 9)] * 3), st.sampled_from(list(VoxelState))), max_size=5),
            st.none() | st.tuples(*[st.integers(-9, 9)] * 3),
        ),
        max_size=6,
    )
)
def test_update_stream_round_trip(tmp_path, raw):
    stream = [UpdateEvent(2 * t, list(ch), rb) for t, (ch, rb) in enumerate(raw)]
    save_updates(stream, tmp_path / "s.jsonl")
    assert load_updates(tmp_path / "s.jsonl") == stream
