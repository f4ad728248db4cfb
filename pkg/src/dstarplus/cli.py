"""Command-line front end: ``dstarplus {plan,replay,costmap,check}``.

Exit codes: 0 success, 1 input/format error, 2 no path (plan), 3 robot stuck
(replay), 4 planner/oracle disagreement (check), 5 collision (replay).
"""
from __future__ import annotations

import argparse
import math
import sys

from . import mapio, replay
from .grid import world_to_index
from .oracle import dijkstra
from .planner import PlannerCore, PlannerError
from .riskfield import CostConfig, CostField

EXIT_OK, EXIT_ERROR, EXIT_UNREACHABLE, EXIT_STUCK, EXIT_MISMATCH, EXIT_COLLISION = range(6)
TOL = 1e-6


class CliError(Exception):
    pass


def _point(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y[,Z], got {text!r}") from None
    if len(vals) not in (2, 3):
        raise argparse.ArgumentTypeError(f"expected X,Y[,Z], got {text!r}")
    return vals


def _add_map_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--map", help="2D occupancy image (binary PGM); needs --meta")
    p.add_argument("--meta", help="YAML metadata for --map")
    p.add_argument("--map3d", help="3D voxel map in dsp3d text format")


def _add_cost_args(p: argparse.ArgumentParser) -> None:
    d = CostConfig()
    p.add_argument("--cf", type=float, default=d.free_cost, help="free voxel cost (default %(default)s)")
    p.add_argument("--cu", type=float, default=d.unknown_cost, help="unknown voxel cost (default %(default)s)")
    p.add_argument(
        "--co", type=float, default=d.occupied_cost,
        help="occupied voxel cost; 'inf' makes walls impassable (default %(default)s)",
    )
    p.add_argument("--radius", type=int, default=d.radius, help="risk radius in voxels (default %(default)s)")


def _add_endpoints(p: argparse.ArgumentParser) -> None:
    p.add_argument("--start", type=_point, required=True, help="start X,Y[,Z] in world coordinates")
    p.add_argument("--goal", type=_point, required=True, help="goal X,Y[,Z] in world coordinates")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dstarplus",
        description="Risk-aware incremental grid path planning.",
        epilog="Costs: free < unknown < occupied is enforced. Unknown space is "
        "traversable at --cu; voxels within --radius of an obstacle pay an "
        "extra cu/(d+1).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan a path on a map")
    _add_map_args(p)
    _add_endpoints(p)
    _add_cost_args(p)
    p.add_argument("--out", required=True, help="path output file (JSON)")
    p.add_argument("--costmap-out", help="write a grayscale cost map (PGM)")
    p.add_argument("--figure-out", help="render the plan to an image file")
    p.add_argument("--z", type=int, help="z-layer for 3D cost maps and figures")

    p = sub.add_parser("replay", help="run a reveal-and-replan scenario")
    p.add_argument("--scenario", required=True, help="scenario file (YAML or JSON)")
    p.add_argument("--out", help="trace output file (JSON)")
    p.add_argument("--figure-out", help="render the traversal to an image file")

    p = sub.add_parser("costmap", help="export the total-cost layer of a map")
    _add_map_args(p)
    _add_cost_args(p)
    p.add_argument("--costmap-out", required=True, help="cost map output (PGM)")
    p.add_argument("--figure-out", help="also render a color figure")
    p.add_argument("--z", type=int, help="z-layer for 3D maps")

    p = sub.add_parser("check", help="compare planner and Dijkstra oracle costs")
    _add_map_args(p)
    _add_endpoints(p)
    _add_cost_args(p)
    p.add_argument("--corrupt-vertex-table", action="store_true", help=argparse.SUPPRESS)
    return parser


def _config(args) -> CostConfig:
    try:
        return CostConfig(args.cf, args.cu, args.co, args.radius)
    except ValueError as exc:
        raise CliError(f"bad cost configuration: {exc}") from None


def _load(args) -> mapio.MapDocument:
    if args.map3d:
        if args.map or args.meta:
            raise CliError("use either --map/--meta or --map3d, not both")
        return mapio.load_grid3d(args.map3d)
    if not (args.map and args.meta):
        raise CliError("a 2D map needs both --map and --meta (or use --map3d)")
    return mapio.load_grid2d(args.map, args.meta)


def _cmd_plan(args) -> int:
    config = _config(args)
    doc = _load(args)
    cf = CostField(doc.grid, config)
    start = world_to_index(doc.meta, args.start)
    goal = world_to_index(doc.meta, args.goal)
    try:
        pc = PlannerCore(cf, start, goal)
    except PlannerError as exc:
        print(f"unreachable: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE
    path = pc.compute_path()
    if args.costmap_out:
        mapio.save_costmap(cf, pc.bounds, args.costmap_out, args.z)
    if args.figure_out:
        from .plotting import render_plan

        render_plan(cf, pc.bounds, args.figure_out, path=path, z=args.z if args.z is not None else start[2])
    if path is None:
        print("unreachable", file=sys.stderr)
        return EXIT_UNREACHABLE
    mapio.save_path(path, args.out)
    print(f"total_cost\t{path.total_cost:.6f}\nvoxels\t{len(path)}")
    return EXIT_OK


def _cmd_replay(args) -> int:
    sc = replay.load_scenario(args.scenario)
    tr = replay.run(sc)
    sys.stdout.write(replay.metrics_report(tr))
    if args.out:
        replay.save_trace(tr, args.out)
    if args.figure_out:
        from .plotting import render_plan

        cf = CostField(sc.truth.grid, sc.config)
        render_plan(
            cf, sc.truth.grid.bounds(), args.figure_out,
            trace_poses=tr.poses(), z=sc.start[2], title=f"replay: {tr.outcome}",
        )
    return {
        replay.REACHED: EXIT_OK,
        replay.STUCK: EXIT_STUCK,
        replay.COLLISION: EXIT_COLLISION,
    }[tr.outcome]


def _cmd_costmap(args) -> int:
    doc = _load(args)
    cf = CostField(doc.grid, _config(args))
    bounds = doc.grid.bounds()
    if bounds is None:
        raise CliError("map is empty")
    mapio.save_costmap(cf, bounds, args.costmap_out, args.z)
    if args.figure_out:
        from .plotting import render_plan

        render_plan(cf, bounds, args.figure_out, z=args.z)
    return EXIT_OK


def _fmt(cost: float) -> str:
    return "unreachable" if cost == math.inf else f"{cost:.9f}"


def _cmd_check(args) -> int:
    config = _config(args)
    doc = _load(args)
    cf = CostField(doc.grid, config)
    start = world_to_index(doc.meta, args.start)
    goal = world_to_index(doc.meta, args.goal)
    try:
        pc = PlannerCore(cf, start, goal)
    except PlannerError:
        pc = None
    if pc is None:
        bounds = doc.grid.bounds().union(start).union(goal)
        planner_cost = math.inf
        g_start = math.inf
    else:
        bounds = pc.bounds
        path = pc.compute_path()
        if args.corrupt_vertex_table:
            pc.g[pc.start] = pc.g_value(pc.start) + 1.0
        planner_cost = math.inf if path is None else path.total_cost
        g_start = pc.g_value(pc.start)
    oracle_cost = dijkstra(cf, bounds, start, goal).cost
    print(f"planner\t{_fmt(planner_cost)}\noracle\t{_fmt(oracle_cost)}")

    def agree(a, b):
        return (a == math.inf and b == math.inf) or abs(a - b) <= TOL

    if agree(planner_cost, oracle_cost) and agree(g_start, oracle_cost):
        return EXIT_OK
    print("mismatch between planner and oracle", file=sys.stderr)
    return EXIT_MISMATCH


COMMANDS = {"plan": _cmd_plan, "replay": _cmd_replay, "costmap": _cmd_costmap, "check": _cmd_check}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (CliError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
