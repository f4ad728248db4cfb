import math

import numpy as np
import pytest

from dstarplus import scenarios as S
from dstarplus.grid import VoxelGrid, VoxelState
from dstarplus.mapio import MapDocument, UpdateEvent
from dstarplus.oracle import dijkstra
from dstarplus.replay import (
    COLLISION,
    REACHED,
    STUCK,
    RevealScenario,
    line_of_sight,
    load_scenario,
    metrics_report,
    reveal,
    run,
)
from dstarplus.riskfield import CostConfig, CostField

F, U, O = VoxelState.FREE, VoxelState.UNKNOWN, VoxelState.OCCUPIED


def full_reveal(truth):
    return [UpdateEvent(0, [(v, s) for v, s in truth.grid.touched()])]


def test_line_of_sight_blocked_by_wall():
    arr = np.zeros((5, 5), dtype=np.uint8)
    arr[:, 2] = O
    g = VoxelGrid.from_array(arr)
    assert not line_of_sight(g, (0, 2, 0), (4, 2, 0))
    assert line_of_sight(g, (0, 2, 0), (2, 2, 0))  # the wall itself is visible
    assert line_of_sight(g, (0, 0, 0), (1, 4, 0))


def test_reveal_respects_radius():
    truth = VoxelGrid.from_array(np.zeros((11, 11), dtype=np.uint8))
    belief = VoxelGrid(truth.meta)
    recs = reveal(truth, belief, (5, 5, 0), 2)
    assert len(recs) == 13
    assert belief.get_state((7, 5, 0)) == F
    assert belief.get_state((7, 7, 0)) == U


def test_prerevealed_world_never_replans():
    truth = S.open_world()
    cfg = CostConfig(radius=0)
    sc = RevealScenario(truth, 3, (1, 1, 0), (22, 20, 0), cfg, updates=full_reveal(truth))
    tr = run(sc, validate=True)
    assert tr.outcome == REACHED
    assert tr.replans == 0
    oracle = dijkstra(CostField(truth.grid, cfg), truth.grid.bounds(), (1, 1, 0), (22, 20, 0))
    length = sum(math.dist(a, b) for a, b in zip(oracle.path, oracle.path[1:]))
    assert tr.distance == pytest.approx(length, abs=1e-6)


def test_bend_is_reached_safely():
    tr = run(S.bend_scenario(), validate=True)
    assert tr.outcome == REACHED
    assert tr.replans >= 1
    assert tr.poses()[-1] == S.BEND_GOAL
    truth = S.bend_world().grid
    assert all(truth.get_state(p) != O for p in tr.poses())
    straight = [s.clearance for s in tr.steps if S.bend_straight_sections(s.pose)]
    assert straight and min(straight) >= 2.0


def test_walled_goal_is_stuck():
    tr = run(S.walled_goal_scenario())
    assert tr.outcome == STUCK
    assert tr.steps[-1].path_cost is None
    assert tr.min_clearance > 0
    poses = tr.poses()
    assert tr.distance == pytest.approx(sum(math.dist(a, b) for a, b in zip(poses, poses[1:])))


def test_step_cap_stops_the_run():
    sc = S.bend_scenario()
    sc.step_cap = 3
    tr = run(sc)
    assert tr.outcome == STUCK
    assert len(tr.steps) == 4


def test_stream_that_lies_leads_to_collision():
    arr = np.zeros((3, 8), dtype=np.uint8)
    arr[:, 4] = O
    truth = MapDocument(VoxelGrid.from_array(arr))
    lie = [UpdateEvent(0, [((x, y, 0), F) for x in range(8) for y in range(3)])]
    tr = run(RevealScenario(truth, 2, (0, 1, 0), (7, 1, 0), updates=lie))
    assert tr.outcome == COLLISION
    assert tr.poses()[-1][0] == 4


def test_stream_robot_pose_teleports():
    truth = S.open_world()
    events = full_reveal(truth) + [UpdateEvent(1, [], (10, 2, 0))]
    tr = run(RevealScenario(truth, 3, (1, 1, 0), (20, 2, 0), CostConfig(radius=0), updates=events))
    assert tr.steps[1].pose == (10, 2, 0)
    assert tr.outcome == REACHED


def test_metrics_report_fields_and_determinism():
    a = metrics_report(run(S.bend_scenario())).splitlines()
    b = metrics_report(run(S.bend_scenario())).splitlines()
    assert a[0] == "metric\tvalue"
    keys = [line.split("\t")[0] for line in a[1:]]
    assert keys == ["outcome", "distance", "replans", "min_clearance", "compute_time_s", "steps"]
    strip = [line for line in a if not line.startswith("compute_time_s")]
    assert strip == [line for line in b if not line.startswith("compute_time_s")]


def test_trace_dict_without_timing():
    d = run(S.walled_goal_scenario()).to_dict(timing=False)
    assert "compute_time_s" not in d
    assert d["outcome"] == STUCK


def test_scenario_validation():
    with pytest.raises(ValueError):
        RevealScenario(S.bend_world(), 0.5, S.BEND_START, S.BEND_GOAL)
    with pytest.raises(ValueError):
        RevealScenario(S.bend_world(), 5, (-4, 0, 0), S.BEND_GOAL)


def test_load_corpus_scenario(corpus):
    sc = load_scenario(corpus / "bend.scenario.yaml")
    assert sc.start == S.BEND_START and sc.goal == S.BEND_GOAL
    assert sc.config == CostConfig(radius=2)
    assert sc.updates is None
    sc = load_scenario(corpus / "expansion.scenario.yaml")
    assert len(sc.updates) == 64
