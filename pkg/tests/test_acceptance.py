"""Acceptance suite: the ten release criteria, each at its stated
tolerance, printing one pass/fail line per criterion (see the
"acceptance criteria" section of the pytest summary, or run with -s).
"""

import math
import random
from itertools import product

import numpy as np
import pytest

from asvsim.autopilot import (
    Autopilot,
    KillDecision,
    RcFrame,
    SafetyInputs,
    TickInputs,
    evaluate_kill,
    resolve_mode,
)
from asvsim.coverage import SurveyArea, partition, plan, polygon_area
from asvsim.dubins import shortest_path_math
from asvsim.environment import UniformField
from asvsim.geo import GeoPoint, LocalPoint, Vector2, boat_to_world, local_to_geo, world_to_boat
from asvsim.link import LinkModel, transmit
from asvsim.protocol import FrameDecoder, Kill, Mode, ProtocolError, SensorKind, decode, encode
from asvsim.scenario import scenario_from_dict
from asvsim.sensors import SampleQuality, SensorSample, filter_outliers, grid_depth
from asvsim.simulation import SimWorld, replay_metrics
from asvsim.vehicle import (
    EngineStatus,
    VehicleParams,
    VehicleState,
    Vehicle,
    step as vehicle_step,
)
from conftest import bench_scenario, survey_scenario
from oracles import boat_to_world_reference, dubins_shortest_reference
from test_link import demo_mission, run_transfer
from test_protocol import random_message
from test_vehicle import fit_circle

CALM = UniformField()
PARAMS = VehicleParams()


class TestA1PerformanceEnvelope:
    def test_a1(self, acceptance_report):
        # Steady full-throttle speed: 21.7 km/h +/- 0.5 %.
        st = VehicleState(fuel=PARAMS.fuel_capacity)
        for _ in range(int(60 / 0.05)):
            st = vehicle_step(PARAMS, st, 0.0, 1.0, CALM, 0.05)
        speed_kmh = st.v_water * 3.6
        assert speed_kmh == pytest.approx(21.7, rel=0.005)

        # Full-deflection turn radius: 5.0 m +/- 2 %, measured off the track.
        pts = []
        for _ in range(int(40 / 0.05)):
            st = vehicle_step(PARAMS, st, 1.0, 1.0, CALM, 0.05)
            pts.append((st.pos.east, st.pos.north))
        radius = fit_circle(np.array(pts[len(pts) // 2 :]))
        assert radius == pytest.approx(5.0, rel=0.02)

        # Fuel exhaustion at 4.0 h (full) and 18.0 h (idle) +/- 1 %,
        # accelerated integration at dt = 0.1 s.
        hours = {}
        for label, u in (("full", 1.0), ("idle", 0.0)):
            s = VehicleState(fuel=PARAMS.fuel_capacity)
            while s.engine is EngineStatus.RUNNING:
                s = vehicle_step(PARAMS, s, 0.0, u, CALM, 0.1)
            hours[label] = s.t / 3600.0
        assert hours["full"] == pytest.approx(4.0, rel=0.01)
        assert hours["idle"] == pytest.approx(18.0, rel=0.01)
        acceptance_report(
            "A1 performance envelope",
            f"speed {speed_kmh:.3f} km/h, radius {radius:.3f} m, "
            f"endurance {hours['full']:.3f}/{hours['idle']:.3f} h",
        )


MODE_BAND_US = {
    Mode.MANUAL_RC: 1100.0,
    Mode.AUTO_WP_OFFBOARD: 1290.0,
    Mode.AUTO_WP_ONBOARD: 1420.0,
    Mode.VELOCITY_CONTROL: 1550.0,
    Mode.MANUAL_ONBOARD: 1100.0,   # reached via the hardware switch
}


class TestA2KillFailsafe:
    def test_a2(self, acceptance_report):
        cases = 0
        for hw, override, powered, line_high in product((False, True), repeat=4):
            safety = SafetyInputs(hw, override, powered, line_high)
            for mode in Mode:
                for ch6 in (1000.0, 1900.0):
                    rc = RcFrame(
                        ch5_us=MODE_BAND_US[mode],
                        ch6_us=ch6,
                    )
                    if mode is Mode.MANUAL_ONBOARD and not hw:
                        continue   # only the hardware switch selects it
                    expected_killed = not override and (
                        ch6 < 1300.0 or not powered or not line_high
                    )
                    assert (evaluate_kill(safety, rc) is KillDecision.ENGINE_KILLED) == expected_killed

                    ap = Autopilot(1, GeoPoint(34.0, -81.0))
                    vehicle = Vehicle()
                    from test_autopilot import nav_for

                    out = ap.control_tick(TickInputs(rc=rc, safety=safety), nav_for(vehicle), 0.05)
                    if out.engine_cmd is KillDecision.ENGINE_KILLED:
                        vehicle.kill()
                    vehicle.step(out.steering, out.throttle, CALM, 0.05)
                    engine_killed = vehicle.state.engine is EngineStatus.KILLED
                    assert engine_killed == expected_killed, (safety, mode, ch6)
                    if hw:
                        assert out.mode is Mode.MANUAL_ONBOARD
                    cases += 1

        # Power-loss kill and override dominance, spelled out.
        assert evaluate_kill(SafetyInputs(autopilot_powered=False), RcFrame()) is KillDecision.ENGINE_KILLED
        assert (
            evaluate_kill(
                SafetyInputs(kill_override=True, autopilot_powered=False, kill_line_high=False),
                RcFrame(ch6_us=900.0),
            )
            is KillDecision.ENGINE_ALLOWED
        )

        # End-to-end kill latency via the GCS radio path.
        world = SimWorld(scenario_from_dict(bench_scenario()))
        world.gcs.rc_kill_mirror = False
        world.step_for(2.0)
        t0 = world.t
        ok, _ = world.gcs.command(1, Kill(), world.t)
        assert ok
        while world.runtime(1).vehicle.state.engine is EngineStatus.RUNNING:
            world.step()
            assert world.t - t0 < 5.0
        latency = world.t - t0
        bound = world.scenario.link.latency + 1.0 + world.dt
        assert latency <= bound
        acceptance_report(
            "A2 kill/failsafe suite",
            f"{cases} truth-table cases, end-to-end kill {latency * 1000:.0f} ms "
            f"<= {bound * 1000:.0f} ms",
        )


class TestA3ModeResolution:
    def test_a3(self, acceptance_report):
        def band_reference(us: float) -> Mode:
            if us < 1230:
                return Mode.MANUAL_RC
            if us < 1360:
                return Mode.AUTO_WP_OFFBOARD
            if us < 1490:
                return Mode.AUTO_WP_ONBOARD
            if us < 1620:
                return Mode.VELOCITY_CONTROL
            if us < 1750:
                return Mode.MANUAL_RC
            return Mode.AUTO_WP_ONBOARD

        checked = 0
        for us in range(900, 2101):
            rc = RcFrame(ch5_us=float(us))
            assert resolve_mode(SafetyInputs(), rc) is band_reference(us), us
            assert resolve_mode(SafetyInputs(hw_manual_switch=True), rc) is Mode.MANUAL_ONBOARD
            checked += 1
        acceptance_report("A3 mode resolution", f"{checked} PWM values x 2 switch states")


class TestA4CalmWaterTracking:
    def test_a4(self, acceptance_report):
        world = SimWorld(scenario_from_dict(survey_scenario(duration=600)))
        metrics = world.run(600)
        v = metrics["per_vehicle"]["1"]
        assert v["waypoints_hit"] == v["waypoints_total"] > 0
        assert v["mission_complete"]
        rms = v["cross_track_rms_straight"]
        assert rms <= 1.0
        acceptance_report(
            "A4 calm-water tracking",
            f"{v['waypoints_hit']}/{v['waypoints_total']} waypoints, "
            f"straight-segment cross-track RMS {rms:.2f} m",
        )


class TestA5AdverseCurrent:
    def test_a5(self, acceptance_report):
        world = SimWorld(scenario_from_dict(survey_scenario(current=(3.0, 0.0), duration=900)))
        metrics = world.run(900)
        v = metrics["per_vehicle"]["1"]
        assert v["waypoints_hit"] == v["waypoints_total"]   # eventually accepted
        assert v["first_pass_misses"] >= 1
        acceptance_report(
            "A5 adverse current",
            f"{v['first_pass_misses']} first-pass misses, all {v['waypoints_total']} "
            "waypoints eventually accepted",
        )


class TestA6Protocol:
    def test_a6(self, acceptance_report):
        rng = random.Random(1234)
        for _ in range(100_000):
            msg = random_message(rng)
            seq, sys_id = rng.randrange(256), rng.randrange(256)
            frame = encode(msg, seq, sys_id)
            back = decode(frame)
            assert back.message == msg and back.seq == seq and back.sys_id == sys_id
            assert encode(back.message, back.seq, back.sys_id) == frame

        # Exhaustive single-bit-flip sweep over a sample telemetry frame.
        from asvsim.protocol import Telemetry, _f32

        sample = encode(
            Telemetry(GeoPoint(34.0007, -81.0003), _f32(1.2), _f32(5.1), _f32(0.4),
                      _f32(-1.1), _f32(7.7), 321.5),
            9,
            3,
        )
        flips = 0
        for i in range(len(sample)):
            for bit in range(8):
                mutated = bytearray(sample)
                mutated[i] ^= 1 << bit
                with pytest.raises(ProtocolError):
                    decode(bytes(mutated))
                flips += 1

        # A megabyte of fuzz through the stream decoder.
        fuzz_rng = random.Random(77)
        blob = bytes(fuzz_rng.randrange(256) for _ in range(1_000_000))
        dec = FrameDecoder()
        for i in range(0, len(blob), 4096):
            dec.feed(blob[i : i + 4096])

        # Mission upload through 20 % loss converges bit-identically.
        mission = demo_mission(12)
        from asvsim.protocol import AckStatus

        sender, receiver, _ = run_transfer(mission, base_loss=0.2, seed=9)
        assert sender.result is AckStatus.ACCEPTED
        assert receiver.loaded == mission
        acceptance_report(
            "A6 protocol",
            f"1e5 round trips, {flips} bit flips rejected, 1 MB fuzz survived, "
            "lossy upload identical",
        )


class TestA7LinkEnvelope:
    def test_a7(self, acceptance_report):
        rng = random.Random(5)
        model = LinkModel()
        assert all(transmit(model, b"x", 2790.0, rng) is not None for _ in range(200))
        assert all(transmit(model, b"x", 2810.0, rng) is None for _ in range(200))

        # Onboard-auto mission completes under total link loss.
        doc = survey_scenario(duration=600)
        doc["events"] = [{"t": 0.0, "action": "set_link", "sys_id": 1, "base_loss": 1.0}]
        world = SimWorld(scenario_from_dict(doc))
        metrics = world.run(600)
        v = metrics["per_vehicle"]["1"]
        assert v["mission_complete"]
        assert metrics["frames"]["up_dropped"] == metrics["frames"]["up_sent"] > 0
        acceptance_report(
            "A7 link envelope",
            "delivery at 2790 m, silence at 2810 m, mission finished with zero link",
        )


class TestA8Coverage:
    def test_a8(self, acceptance_report):
        from test_coverage import raster_coverage_oracle
        from test_dubins import circumradius

        # Coverage >= 99 % on convex polygons.
        convex = [
            SurveyArea(
                (LocalPoint(0, 0), LocalPoint(100, 0), LocalPoint(100, 100), LocalPoint(0, 100)),
                swath=10.0,
            ),
            SurveyArea(
                (LocalPoint(0, 0), LocalPoint(150, 0), LocalPoint(150, 60), LocalPoint(0, 60)),
                swath=10.0,
            ),
            SurveyArea(
                (
                    LocalPoint(50, 0), LocalPoint(100, 25), LocalPoint(100, 75),
                    LocalPoint(50, 100), LocalPoint(0, 75), LocalPoint(0, 25),
                ),
                swath=10.0,
            ),
        ]
        ratios = []
        for area in convex:
            result = plan(area, k=1, r_min=5.0)
            track = [p for p, _ in result.waypoints(0)]
            ratio = raster_coverage_oracle(area, [track])
            ratios.append(ratio)
            assert ratio >= 0.99, ratio
            # Max track curvature <= 1/5 per meter on every non-straight leg.
            for leg in result.vehicles[0]:
                if leg.kind == "transect":
                    continue
                pts = [(p.east, p.north) for p in leg.points]
                for i in range(len(pts) - 2):
                    assert circumradius(pts[i], pts[i + 1], pts[i + 2]) >= 5.0 * 0.999

        # k=3 partition equal within 1 %.
        square = convex[0]
        pieces = partition(square, 3)
        total = abs(polygon_area(list(square.boundary)))
        for piece in pieces:
            assert abs(polygon_area(list(piece.boundary))) == pytest.approx(total / 3, rel=0.01)

        # dubins_connect matches the brute-force oracle over 1000 pose pairs.
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(1000):
            p1 = (rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(0, 2 * math.pi))
            p2 = (rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(0, 2 * math.pi))
            analytic = shortest_path_math(p1, p2, 5.0).length
            oracle = dubins_shortest_reference(p1, p2, 5.0)
            worst = max(worst, abs(analytic - oracle))
            assert analytic == pytest.approx(oracle, abs=1e-6)
        acceptance_report(
            "A8 coverage",
            f"ratios {', '.join(f'{r:.3f}' for r in ratios)}, dubins worst "
            f"|analytic - oracle| = {worst:.2e}",
        )


class TestA9Sensing:
    def test_a9(self, acceptance_report):
        # Transform vs the independent trigonometric oracle, 1000 states.
        rng = np.random.default_rng(31)
        for _ in range(1000):
            fwd, stbd, ve, vn = rng.uniform(-10, 10, 4)
            psi = rng.uniform(0, 2 * math.pi)
            got = boat_to_world(Vector2(fwd, stbd), psi, Vector2(ve, vn))
            exp = boat_to_world_reference(fwd, stbd, psi, ve, vn)
            assert abs(got.x - exp[0]) < 1e-9 and abs(got.y - exp[1]) < 1e-9
            back = world_to_boat(got, psi, Vector2(ve, vn))
            assert abs(back.x - fwd) < 1e-9 and abs(back.y - stbd) < 1e-9

        # Outlier filter on labeled aeration-style corruption.
        origin = GeoPoint(34.0, -81.0)
        n = 6000
        truth = 5.0 + 0.002 * np.arange(n)
        injected = set(int(i) for i in rng.choice(n, size=int(0.08 * n), replace=False))
        series = []
        for i in range(n):
            if i in injected:
                v = truth[i] * rng.uniform(2.0, 10.0)
            else:
                v = truth[i] + rng.normal(0, 0.05)
            series.append(
                SensorSample(float(i), origin, 0.0, SensorKind.DEPTH,
                             (float(max(v, 0.0)),))
            )
        out = filter_outliers(series)
        caught = sum(1 for i in injected if out[i].quality is SampleQuality.SUSPECT)
        false_pos = sum(
            1 for i in range(n)
            if i not in injected and out[i].quality is SampleQuality.SUSPECT
        )
        catch_rate = caught / len(injected)
        fp_rate = false_pos / (n - len(injected))
        assert catch_rate >= 0.95
        assert fp_rate <= 0.01

        # Ramp-bathymetry grid RMSE <= 2 * noise_sd on a lawnmower sampling.
        noise_sd = 0.05
        samples = []
        t = 0.0
        for col, east in enumerate(np.arange(2.5, 60, 5.0)):
            norths = np.arange(1.0, 60, 2.0)
            if col % 2:
                norths = norths[::-1]
            for north in norths:
                depth = 4.0 + 0.01 * east + rng.normal(0, noise_sd)
                samples.append(
                    SensorSample(t, local_to_geo(origin, LocalPoint(float(east), float(north))),
                                 0.0, SensorKind.DEPTH, (float(max(depth, 0.0)),))
                )
                t += 0.5
        grid = grid_depth(samples, cell_size=5.0, origin=origin)
        errs = [
            grid.cells[r, c] - (4.0 + 0.01 * grid.cell_center(r, c).east)
            for r in range(grid.rows)
            for c in range(grid.cols)
            if grid.counts[r, c] > 0
        ]
        rmse = float(np.sqrt(np.mean(np.square(errs))))
        assert rmse <= 2 * noise_sd
        acceptance_report(
            "A9 sensing",
            f"transform exact to 1e-9, filter catch {catch_rate:.3f} / fp {fp_rate:.4f}, "
            f"grid RMSE {rmse:.3f} m",
        )


class TestA10DeterminismReplay:
    def test_a10(self, acceptance_report, tmp_path):
        doc = survey_scenario(duration=90, seed=2718, base_loss=0.05)
        outs = []
        metrics = []
        for run in ("a", "b"):
            out = tmp_path / run
            world = SimWorld(scenario_from_dict(doc), out_dir=out)
            metrics.append(world.run(90))
            outs.append(out)
        for name in ("session.jsonl", "tracks.csv", "samples.log", "metrics.json"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name
        assert metrics[0] == metrics[1]
        replayed = replay_metrics(outs[0] / "session.jsonl")
        assert replayed == metrics[0]
        acceptance_report(
            "A10 determinism & replay",
            "byte-identical logs across runs; replayed metrics exact",
        )
