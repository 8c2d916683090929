import pytest

from asvsim.autopilot import Mission, Waypoint
from asvsim.gcs import LinkState, preflight
from asvsim.geo import GeoPoint, LocalPoint, local_to_geo
from asvsim.protocol import AckStatus, Kill, Mode, SetMode, VelocitySetpoint, encode
from asvsim.scenario import scenario_from_dict
from asvsim.simulation import SimWorld
from asvsim.vehicle import EngineStatus
from conftest import bench_scenario, survey_scenario

ORIGIN = GeoPoint(34.0, -81.0)


def wait_connected(world, sys_id=1, timeout=5.0):
    t0 = world.t
    while world.gcs.fleet[sys_id].link_state is not LinkState.CONNECTED:
        world.step()
        assert world.t - t0 < timeout


def line_mission(mission_id=5, n=4, speed=3.0) -> Mission:
    wps = tuple(
        Waypoint(local_to_geo(ORIGIN, LocalPoint(0.0, 30.0 * (i + 1))), speed) for i in range(n)
    )
    return Mission(mission_id, wps, ORIGIN)


class TestRegistry:
    def test_telemetry_updates_single_entry(self):
        world = SimWorld(scenario_from_dict(bench_scenario()))
        world.step_for(3.0)
        entry = world.gcs.fleet[1]
        assert entry.telemetry is not None
        assert entry.heartbeat is not None
        assert entry.link_state is LinkState.CONNECTED

    def test_unknown_sys_id_quarantined_counted(self):
        world = SimWorld(scenario_from_dict(bench_scenario()))
        frame = encode(Kill(), 0, 99)
        assert world.gcs.handle_frame_bytes(frame, 0.0) is None
        assert world.gcs.quarantined == 1

    def test_garbage_frame_quarantined(self):
        world = SimWorld(scenario_from_dict(bench_scenario()))
        assert world.gcs.handle_frame_bytes(b"\x00garbage", 0.0) is None
        assert world.gcs.quarantined == 1


class TestCommands:
    def test_unknown_vehicle_rejected(self):
        world = SimWorld(scenario_from_dict(bench_scenario()))
        ok, reason = world.gcs.command(77, Kill(), 0.0)
        assert not ok and "unknown" in reason

    def test_setmode_rejected_when_lost(self):
        world = SimWorld(scenario_from_dict(bench_scenario()))
        ok, reason = world.gcs.command(1, SetMode(Mode.AUTO_WP_ONBOARD), 0.0)
        assert not ok and "lost" in reason

    def test_kill_attempted_even_when_lost(self):
        world = SimWorld(scenario_from_dict(bench_scenario()))
        ok, reason = world.gcs.command(1, Kill(), 0.0)
        assert ok and "attempted" in reason

    def test_kill_mirrors_rc_channel(self):
        world = SimWorld(scenario_from_dict(bench_scenario()))
        wait_connected(world)
        world.gcs.command(1, Kill(), world.t)
        assert world.runtime(1).transmitter.ch6_us == 1000.0

    def test_kill_stops_connected_vehicle(self):
        world = SimWorld(scenario_from_dict(bench_scenario()))
        wait_connected(world)
        world.gcs.command(1, Kill(), world.t)
        world.step_for(1.5)
        assert world.runtime(1).vehicle.state.engine is EngineStatus.KILLED

    def test_velocity_setpoint_tracked(self):
        doc = bench_scenario(mode="VELOCITY_CONTROL")
        world = SimWorld(scenario_from_dict(doc))
        wait_connected(world)
        params = world.runtime(1).vehicle.params
        target = 3.0
        # Stream setpoints at 5 Hz for 3 tau.
        steps_per_send = int(0.2 / world.dt)
        for i in range(int(3 * params.tau_v / world.dt) + 20):
            if i % steps_per_send == 0:
                world.gcs.command(1, VelocitySetpoint(0.0, target), world.t)
            world.step()
        assert world.runtime(1).vehicle.state.v_water == pytest.approx(target, rel=0.10)


class TestUpload:
    def test_upload_and_activate_sets_mode_after_ack(self):
        world = SimWorld(scenario_from_dict(bench_scenario()))
        wait_connected(world)
        handle, reason = world.gcs.upload_and_activate(1, line_mission(), world.t)
        assert handle is not None, reason
        while handle.status is None:
            world.step()
            assert world.t < 40.0
        assert handle.status is AckStatus.ACCEPTED
        world.step_for(1.0)
        rt = world.runtime(1)
        assert rt.autopilot.mode is Mode.AUTO_WP_OFFBOARD
        assert world.gcs.fleet[1].active_mission_id == 5
        assert rt.autopilot.guidance.mission.id == 5

    def test_upload_rejected_when_lost(self):
        world = SimWorld(scenario_from_dict(bench_scenario()))
        handle, reason = world.gcs.upload_mission(1, line_mission(), 0.0)
        assert handle is None and "lost" in reason

    def test_partial_upload_never_activates(self):
        doc = bench_scenario()
        doc["events"] = [{"t": 3.2, "action": "set_link", "sys_id": 1, "max_range": 0.0}]
        world = SimWorld(scenario_from_dict(doc))
        wait_connected(world)
        # Weaken the link so the burst leaves gaps, then the event cuts it.
        world.runtime(1).link.model.base_loss = 0.7
        handle, _ = world.gcs.upload_and_activate(1, line_mission(n=12), world.t)
        assert handle is not None
        while handle.status is None:
            world.step()
            assert world.t < 60.0
        assert handle.status is AckStatus.FAILED
        assert not handle.activated
        rt = world.runtime(1)
        assert rt.autopilot.guidance.mission is None
        assert rt.autopilot.mode is not Mode.AUTO_WP_OFFBOARD

    def test_four_vehicle_simultaneous_upload(self):
        doc = survey_scenario(n_vehicles=4, duration=300)
        for v in doc["vehicles"]:
            v["mode"] = "MANUAL_RC"
        doc.pop("survey")
        world = SimWorld(scenario_from_dict(doc))
        for sys_id in (1, 2, 3, 4):
            wait_connected(world, sys_id)
        handles = {}
        for sys_id in (1, 2, 3, 4):
            handle, reason = world.gcs.upload_and_activate(
                1 if False else sys_id, line_mission(mission_id=100 + sys_id, n=8), world.t
            )
            assert handle is not None, reason
            handles[sys_id] = handle
        while any(h.status is None for h in handles.values()):
            world.step()
            assert world.t < 60.0
        for sys_id, handle in handles.items():
            assert handle.status is AckStatus.ACCEPTED
            rt = world.runtime(sys_id)
            assert rt.autopilot.guidance.mission.id == 100 + sys_id


class TestPreflight:
    def test_nominal_all_items_pass(self):
        world = SimWorld(scenario_from_dict(bench_scenario()))
        report = preflight(world, 1)
        failures = [(i.name, i.stage, i.detail) for i in report.items if not i.passed]
        assert report.passed, failures
        names = {i.name for i in report.items}
        assert names == {
            "steering sweep", "throttle sweep", "kill circuit",
            "mode cycling", "link heartbeat", "sensor streams",
        }
        stages = {i.stage for i in report.items}
        assert stages == {"engine_off", "engine_on"}

    def test_kill_override_detected(self):
        world = SimWorld(scenario_from_dict(bench_scenario()))
        world.set_safety(1, kill_override=True)
        report = preflight(world, 1)
        kill_items = [i for i in report.items if i.name == "kill circuit"]
        assert kill_items and all(not i.passed for i in kill_items)
        assert any("override" in i.detail for i in kill_items)
        assert not report.passed

    def test_disabled_depth_sensor_isolated(self):
        doc = bench_scenario(sensors={"depth": False})
        world = SimWorld(scenario_from_dict(doc))
        report = preflight(world, 1)
        sensor_items = [i for i in report.items if i.name == "sensor streams"]
        assert sensor_items and all(not i.passed for i in sensor_items)
        assert all("depth" in i.detail for i in sensor_items)
        others = [i for i in report.items if i.name != "sensor streams"]
        assert all(i.passed for i in others)

    def test_unreachable_vehicle_all_failed(self):
        doc = bench_scenario()
        doc["link"] = {"base_loss": 1.0}
        world = SimWorld(scenario_from_dict(doc))
        report = preflight(world, 1)
        assert not report.passed
        assert all(not i.passed for i in report.items)
        assert all("link lost" in i.detail for i in report.items)

    def test_unknown_vehicle(self):
        world = SimWorld(scenario_from_dict(bench_scenario()))
        report = preflight(world, 9)
        assert not report.passed


class TestDepthGrid:
    def test_grid_accumulates_from_reports(self):
        doc = bench_scenario()
        world = SimWorld(scenario_from_dict(doc))
        world.step_for(10.0)
        grid = world.gcs.depth_grid(cell_size=10.0)
        assert grid.rows >= 1 and grid.cols >= 1
        populated = grid.counts > 0
        assert populated.any()
        # Bench vehicle sits on 5 m default bathymetry.
        import numpy as np

        assert abs(float(np.nanmean(grid.cells[populated])) - 5.0) < 0.5
