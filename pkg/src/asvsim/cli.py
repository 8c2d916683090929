"""Headless entry point: run scenarios, replay session logs, tune gains,
and plan coverage missions.

    asvsim run --scenario fig7a.yaml --out-dir out/ [--serve]
    asvsim replay out/session.jsonl
    asvsim tune --scenario bench.yaml --out-dir out/
    asvsim plan --polygon area.json --k 3 --r-min 5 --swath 10 --out-dir out/
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .autopilot import PidGains
from .coverage import SurveyArea, plan as plan_coverage
from .geo import GeoPoint, geo_to_local
from .scenario import ScenarioError, load_scenario, save_mission_file
from .simulation import SimWorld, replay_metrics
from .tuning import auto_tune


def _cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return 2
    if args.seed is not None:
        scenario.seed = args.seed
    if args.duration is not None:
        scenario.duration = args.duration
    if args.time_scale is not None:
        scenario.time_scale = args.time_scale
    # Environment overrides beat the scenario file but lose to flags.
    if args.time_scale is None and "ASVSIM_TIME_SCALE" in os.environ:
        scenario.time_scale = float(os.environ["ASVSIM_TIME_SCALE"])
    port = args.port if args.port is not None else int(
        os.environ.get("ASVSIM_PORT", scenario.port)
    )

    world = SimWorld(scenario, out_dir=args.out_dir)
    if args.serve:
        from .server import serve

        http, runner = serve(world, port=port, time_scale=scenario.time_scale or 1.0,
                             static_dir=args.static_dir)
        print(f"serving GCS API on http://127.0.0.1:{http.port} (ctrl-c to stop)")
        try:
            import time as _time

            while world.t < scenario.duration:
                _time.sleep(0.2)
        except KeyboardInterrupt:
            pass
        runner.stop()
        http.stop()
        metrics = world.finish()
    else:
        metrics = world.run()

    if args.export_grid and args.out_dir:
        grid = world.gcs.depth_grid(args.grid_cell)
        grid_path = Path(args.out_dir) / "depth_grid.txt"
        if grid.rows:
            grid.save(grid_path)
            print(f"depth grid -> {grid_path}")
        else:
            print("no depth samples received; grid not written", file=sys.stderr)

    print(json.dumps(metrics["totals"], indent=2))
    if args.out_dir:
        print(f"artifacts in {args.out_dir}")
    if args.strict and not metrics["totals"]["all_missions_complete"]:
        print("mission failure (--strict)", file=sys.stderr)
        return 1
    return 0


def _cmd_replay(args) -> int:
    metrics = replay_metrics(args.session_log)
    out = json.dumps(metrics, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(out + "\n")
    print(out)
    return 0


def _cmd_tune(args) -> int:
    initial = PidGains()
    if args.scenario:
        try:
            scenario = load_scenario(args.scenario)
        except ScenarioError as e:
            print(f"scenario error: {e}", file=sys.stderr)
            return 2
        if scenario.vehicles:
            initial = scenario.vehicles[0].gains
    result = auto_tune(initial)
    gains = {
        "p": result.gains.p,
        "i": result.gains.i,
        "d": result.gains.d,
        "i_clamp": result.gains.i_clamp,
        "wp_radius": result.gains.wp_radius,
        "converged": result.converged,
        "iterations": result.iterations,
    }
    text = json.dumps(gains, indent=2)
    print(text)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "gains.json").write_text(text + "\n")
    return 0 if result.converged else 1


def _cmd_plan(args) -> int:
    data = json.loads(Path(args.polygon).read_text())
    pts_raw = data["polygon"] if isinstance(data, dict) else data
    origin_raw = data.get("origin") if isinstance(data, dict) else None
    pts_geo = [GeoPoint(float(p[0]), float(p[1])) for p in pts_raw]
    origin = (
        GeoPoint(float(origin_raw["lat"]), float(origin_raw["lon"]))
        if origin_raw
        else pts_geo[0]
    )
    local = [geo_to_local(origin, p) for p in pts_geo]
    if len(local) > 1 and local[0].distance_to(local[-1]) < 1e-6:
        local.pop()
    area = SurveyArea(tuple(local), swath=args.swath)
    result = plan_coverage(area, k=args.k, r_min=args.r_min)
    missions = result.to_missions(origin, args.speed)

    out = Path(args.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    for i, mission in enumerate(missions):
        save_mission_file(out / f"mission_{i + 1}.json", replace(mission, id=i + 1))
    (out / "plan.txt").write_text(result.description() + "\n")
    print(result.description())
    print(f"wrote {len(missions)} mission file(s) to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asvsim", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario headless (or with --serve)")
    run.add_argument("--scenario", required=True)
    run.add_argument("--duration", type=float, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--time-scale", type=float, default=None)
    run.add_argument("--strict", action="store_true",
                     help="exit nonzero when any mission fails")
    run.add_argument("--out-dir", default=None)
    run.add_argument("--serve", action="store_true",
                     help="also start the GCS HTTP server on the running sim")
    run.add_argument("--port", type=int, default=None,
                     help="default: ASVSIM_PORT env var, then the scenario file")
    run.add_argument("--export-grid", action="store_true",
                     help="write depth_grid.txt from received sonar samples")
    run.add_argument("--grid-cell", type=float, default=10.0)
    run.add_argument("--static-dir", default=None, help="serve the web UI from this directory")
    run.set_defaults(fn=_cmd_run)

    rep = sub.add_parser("replay", help="recompute metrics from a session log")
    rep.add_argument("session_log")
    rep.add_argument("--out", default=None)
    rep.set_defaults(fn=_cmd_replay)

    tune = sub.add_parser("tune", help="auto-tune steering gains in calm water")
    tune.add_argument("--scenario", default=None)
    tune.add_argument("--out-dir", default=None)
    tune.set_defaults(fn=_cmd_tune)

    planp = sub.add_parser("plan", help="plan coverage missions over a polygon")
    planp.add_argument("--polygon", required=True,
                       help="JSON file: {polygon: [[lat, lon], ...], origin?: {lat, lon}}")
    planp.add_argument("--k", type=int, default=1)
    planp.add_argument("--r-min", type=float, default=5.0)
    planp.add_argument("--swath", type=float, default=10.0)
    planp.add_argument("--speed", type=float, default=3.0)
    planp.add_argument("--out-dir", default=None)
    planp.set_defaults(fn=_cmd_plan)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
