"""Fixed-step fleet simulation: vehicles, autopilots, radio links, sensors,
and the ground station, advanced together on one clock.

Everything observable about a run is appended to the session event log in
canonical (t, sys_id) order; run metrics are a pure function of those
records, which is what makes replay exact.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable

import numpy as np

from .autopilot import (
    Autopilot,
    AutopilotConfig,
    KillDecision,
    NavInput,
    OperatorInput,
    RcFrame,
    SafetyInputs,
    TickInputs,
    TickOutputs,
)
from .eventlog import EventLogWriter, read_events
from .gcs import GcsService
from .geo import geo_to_local, local_to_geo
from .link import RadioLink
from .protocol import ProtocolError, SensorKind, SensorReport, decode, encode
from .scenario import Scenario, ScenarioEvent, VehicleSpec
from .sensors import (
    AerationModel,
    SampleQuality,
    SensorSample,
    format_sample,
    sample_depth,
    sample_field,
    to_world,
)
from .vehicle import Vehicle, VehicleState

STRAIGHT_LEG_MIN_M = 20.0


class RcTransmitter:
    """Simulated handheld radio: channel values the operator (or a scripted
    event) sets, with a loss flag that freezes the received frame and lets
    its age grow."""

    def __init__(self, ch5_us: float = 1100.0):
        self.ch1_us = 1500.0
        self.ch3_us = 1500.0
        self.ch5_us = ch5_us
        self.ch6_us = 1900.0
        self.lost = False
        self._lost_since = 0.0

    def set_lost(self, t: float, lost: bool) -> None:
        if lost and not self.lost:
            self._lost_since = t
        self.lost = lost

    def frame(self, t: float) -> RcFrame:
        age = (t - self._lost_since) if self.lost else 0.0
        return RcFrame(self.ch1_us, self.ch3_us, self.ch5_us, self.ch6_us, age)


class VehicleRuntime:
    """Everything belonging to one hull inside the world."""

    def __init__(self, spec: VehicleSpec, scenario: Scenario):
        self.spec = spec
        origin = scenario.origin
        start_local = geo_to_local(origin, spec.start)
        fuel = spec.fuel if spec.fuel is not None else spec.params.fuel_capacity
        self.vehicle = Vehicle(
            spec.params,
            spec.steering_cal,
            spec.throttle_cal,
            VehicleState(pos=start_local, psi=spec.heading, fuel=fuel),
        )
        cfg = AutopilotConfig(
            tick_hz=1.0 / scenario.dt,
            telemetry_hz=scenario.telemetry_hz,
            v_max=spec.params.v_max,
            mode_bands=spec.mode_bands,
            steering_cal=spec.steering_cal,
            throttle_cal=spec.throttle_cal,
        )
        self.autopilot = Autopilot(spec.sys_id, origin, spec.gains, cfg)
        if spec.mission is not None:
            self.autopilot.load_mission(spec.mission)
        self.transmitter = RcTransmitter(spec.rc_mode_us)
        self.safety = SafetyInputs(hw_manual_switch=spec.hw_manual)
        self.operator = OperatorInput()
        # Distinct deterministic streams per vehicle and purpose; plain
        # integer seeds only (string hashing is process-randomized).
        import random

        link_seed = (scenario.seed * 1_000_003 + spec.sys_id * 101 + scenario.link.seed) & 0x7FFFFFFF
        self.link = RadioLink(replace(scenario.link), rng=random.Random(link_seed))
        self.sensor_rng = np.random.default_rng([scenario.seed & 0x7FFFFFFF, spec.sys_id, 7])
        self.aeration = AerationModel(v_max=spec.params.v_max)
        self.seq = 0
        self.last_outputs: TickOutputs | None = None
        self.sample_counts: dict[SensorKind, int] = {}
        self._next_sample_t = 0.0
        self.mission_len = len(spec.mission.waypoints) if spec.mission else 0

    def next_seq(self) -> int:
        s = self.seq
        self.seq = (self.seq + 1) % 256
        return s


@dataclass
class RunArtifacts:
    session_log: Path | None = None
    track_log: Path | None = None
    sample_log: Path | None = None
    metrics_file: Path | None = None


class SimWorld:
    """One scenario, stepped deterministically. Thread-safe through
    ``self.lock`` (the HTTP server shares the world with the stepping
    thread)."""

    def __init__(self, scenario: Scenario, out_dir: str | Path | None = None):
        self.scenario = scenario
        self.origin = scenario.origin
        self.env = scenario.environment
        self.dt = scenario.dt
        self.t = 0.0
        self.tick_count = 0
        self.lock = threading.RLock()
        self.gcs = GcsService(scenario.origin)
        self.gcs_local = geo_to_local(scenario.origin, scenario.gcs_pos)
        self.runtimes: dict[int, VehicleRuntime] = {}
        self._pending_events = list(scenario.events)
        self._records: list[dict] | None = None
        self._metrics_acc = MetricsAccumulator()
        self.artifacts = RunArtifacts()
        self._writer: EventLogWriter | None = None
        self._track_fh = None
        self._sample_fh = None

        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            self.artifacts = RunArtifacts(
                session_log=out / "session.jsonl",
                track_log=out / "tracks.csv",
                sample_log=out / "samples.log",
                metrics_file=out / "metrics.json",
            )
            self._writer = EventLogWriter(self.artifacts.session_log)
            self._track_fh = open(self.artifacts.track_log, "w")
            self._track_fh.write("t,sys_id,lat,lon,east,north,psi,v_water,fuel,engine,mode\n")
            self._sample_fh = open(self.artifacts.sample_log, "w")

        for spec in sorted(scenario.vehicles, key=lambda v: v.sys_id):
            rt = VehicleRuntime(spec, scenario)
            self.runtimes[spec.sys_id] = rt
            self.gcs.register_vehicle(
                spec.sys_id,
                send=self._make_gcs_sender(spec.sys_id),
                kill_mirror=self._make_kill_mirror(spec.sys_id),
            )

        self._record(self._header_record())

    # -- record plumbing -----------------------------------------------------

    def _header_record(self) -> dict:
        sc = self.scenario
        return {
            "type": "header",
            "name": sc.name,
            "seed": sc.seed,
            "dt": sc.dt,
            "duration": sc.duration,
            "telemetry_hz": sc.telemetry_hz,
            "vehicles": [
                {
                    "sys": v.sys_id,
                    "mission_len": len(v.mission.waypoints) if v.mission else 0,
                    "fuel0": v.fuel if v.fuel is not None else v.params.fuel_capacity,
                }
                for v in sorted(sc.vehicles, key=lambda v: v.sys_id)
            ],
        }

    def _record(self, record: dict) -> None:
        self._metrics_acc.add(record)
        if self._writer is not None:
            self._writer.append(record)
        if self._records is not None:
            self._records.append(record)

    def keep_records(self) -> None:
        """Retain records in memory (used by tests and replay comparisons)."""
        self._records = [self._header_record()]

    # -- GCS outbound path ----------------------------------------------------

    def _make_gcs_sender(self, sys_id: int):
        def send(message) -> bool:
            rt = self.runtimes[sys_id]
            data = encode(message, rt.next_seq(), sys_id)
            dist = rt.vehicle.state.pos.distance_to(self.gcs_local)
            ok = rt.link.send_to_vehicle(data, self.t, dist)
            if ok:
                self._record({"type": "frame", "t": self.t, "dir": "down", "sys": sys_id,
                              "hex": data.hex()})
            else:
                self._record({"type": "drop", "t": self.t, "dir": "down", "sys": sys_id})
            return ok

        return send

    def _make_kill_mirror(self, sys_id: int):
        def mirror() -> None:
            self.runtimes[sys_id].transmitter.ch6_us = 1000.0

        return mirror

    # -- bench / scripting handles ---------------------------------------------

    def runtime(self, sys_id: int) -> VehicleRuntime | None:
        return self.runtimes.get(sys_id)

    def set_safety(self, sys_id: int, **kwargs) -> None:
        rt = self.runtimes[sys_id]
        rt.safety = replace(rt.safety, **kwargs)

    def bench_start_engine(self, sys_id: int) -> None:
        self.runtimes[sys_id].vehicle.start_engine()

    def step_for(self, seconds: float) -> None:
        for _ in range(int(round(seconds / self.dt))):
            self.step()

    # -- scenario events ---------------------------------------------------------

    def _apply_events(self) -> None:
        while self._pending_events and self._pending_events[0].t <= self.t + 1e-12:
            ev = self._pending_events.pop(0)
            self._apply_event(ev)

    def _apply_event(self, ev: ScenarioEvent) -> None:
        targets = [ev.sys_id] if ev.sys_id is not None else list(self.runtimes)
        for sys_id in targets:
            rt = self.runtimes.get(sys_id)
            if rt is None:
                continue
            tx = rt.transmitter
            if ev.action == "set_link":
                for key in ("base_loss", "max_range", "latency"):
                    if key in ev.args:
                        setattr(rt.link.model, key, float(ev.args[key]))
            elif ev.action == "rc_loss":
                tx.set_lost(self.t, True)
            elif ev.action == "rc_restore":
                tx.set_lost(self.t, False)
            elif ev.action in ("set_ch1", "set_ch3", "set_ch5", "set_ch6"):
                setattr(tx, f"ch{ev.action[-1]}_us", float(ev.args["us"]))
            elif ev.action == "set_safety":
                rt.safety = replace(rt.safety, **{k: bool(v) for k, v in ev.args.items()})
            elif ev.action == "operator":
                rt.operator = OperatorInput(
                    float(ev.args.get("steering", 0.0)), float(ev.args.get("throttle", 0.0))
                )
            elif ev.action == "start_engine":
                rt.vehicle.start_engine()

    # -- sensors ---------------------------------------------------------------

    def _sample_sensors(self, rt: VehicleRuntime) -> list[SensorReport]:
        spec = rt.spec.sensors
        if self.t < rt._next_sample_t:
            return []
        rt._next_sample_t = self.t + 1.0 / spec.rate_hz
        state = rt.vehicle.state
        v_ground = rt.vehicle.ground_velocity(self.env)
        reports: list[SensorReport] = []
        samples: list[SensorSample] = []
        if spec.depth:
            s = sample_depth(self.env, state, self.origin, rt.sensor_rng,
                             spec.depth_noise_sd, rt.aeration)
            samples.append(s)
            if s.quality is not SampleQuality.UNDEFINED and s.values:
                reports.append(
                    SensorReport(
                        SensorKind.DEPTH,
                        (float(np.float32(s.values[0])), float(np.float32(state.pos.east)),
                         float(np.float32(state.pos.north))),
                    )
                )
        for kind, enabled in ((SensorKind.WIND, spec.wind), (SensorKind.CURRENT, spec.current)):
            if not enabled:
                continue
            s = sample_field(self.env, state, self.origin, kind, v_ground,
                             rt.sensor_rng, spec.vector_noise_sd)
            samples.append(s)
            world_vec = to_world(s, v_ground)
            reports.append(
                SensorReport(
                    kind,
                    (float(np.float32(world_vec.x)), float(np.float32(world_vec.y)),
                     float(np.float32(state.pos.east)), float(np.float32(state.pos.north))),
                )
            )
        for s in samples:
            rt.sample_counts[s.kind] = rt.sample_counts.get(s.kind, 0) + 1
            line = format_sample(s, rt.spec.sys_id)
            self._record({"type": "sample", "t": self.t, "sys": rt.spec.sys_id, "line": line})
            if self._sample_fh is not None:
                self._sample_fh.write(line + "\n")
        return reports

    # -- main loop ----------------------------------------------------------------

    def step(self) -> None:
        with self.lock:
            self._step_locked()

    def _step_locked(self) -> None:
        self._apply_events()
        t = self.t

        for sys_id in sorted(self.runtimes):
            rt = self.runtimes[sys_id]
            inbound = []
            for data in rt.link.poll_vehicle(t):
                try:
                    inbound.append(decode(data).message)
                except ProtocolError:
                    pass
            state = rt.vehicle.state
            nav = NavInput(state, local_to_geo(self.origin, state.pos),
                           rt.vehicle.ground_velocity(self.env))
            out = rt.autopilot.control_tick(
                TickInputs(rt.transmitter.frame(t), rt.safety, tuple(inbound), rt.operator),
                nav,
                self.dt,
            )
            rt.last_outputs = out
            if out.engine_cmd is KillDecision.ENGINE_KILLED:
                rt.vehicle.kill()
            rt.vehicle.step(out.steering, out.throttle, self.env, self.dt)

            outbound = list(out.outbound)
            outbound.extend(self._sample_sensors(rt))
            dist = rt.vehicle.state.pos.distance_to(self.gcs_local)
            for message in outbound:
                data = encode(message, rt.next_seq(), sys_id)
                if rt.link.send_to_gcs(data, t, dist):
                    self._record({"type": "frame", "t": t, "dir": "up", "sys": sys_id,
                                  "hex": data.hex()})
                else:
                    self._record({"type": "drop", "t": t, "dir": "up", "sys": sys_id})

            self._record_state(rt, out)

        # Ground station: receive, then do periodic work.
        for sys_id in sorted(self.runtimes):
            rt = self.runtimes[sys_id]
            for data in rt.link.poll_gcs(t):
                self.gcs.handle_frame_bytes(data, t)
        self.gcs.tick(t)

        self.t = round(self.t + self.dt, 9)
        self.tick_count += 1

    def _record_state(self, rt: VehicleRuntime, out: TickOutputs) -> None:
        state = rt.vehicle.state
        geo = local_to_geo(self.origin, state.pos)
        g = out.guidance
        record = {
            "type": "state",
            "t": self.t,
            "sys": rt.spec.sys_id,
            "east": state.pos.east,
            "north": state.pos.north,
            "lat": geo.lat,
            "lon": geo.lon,
            "psi": state.psi,
            "v_water": state.v_water,
            "fuel": state.fuel,
            "engine": state.engine.name,
            "mode": out.mode.name,
        }
        if g is not None:
            record["wp"] = g.wp_index
            record["cross"] = g.cross_track
            record["leg"] = g.leg_length
            record["done"] = g.done
            if g.hit:
                self._record({"type": "wp", "t": self.t, "sys": rt.spec.sys_id,
                              "index": g.wp_index - 1, "event": "hit"})
            if g.first_pass_miss:
                self._record({"type": "wp", "t": self.t, "sys": rt.spec.sys_id,
                              "index": g.wp_index, "event": "miss"})
        self._record(record)
        if self._track_fh is not None:
            self._track_fh.write(
                f"{self.t!r},{rt.spec.sys_id},{geo.lat!r},{geo.lon!r},"
                f"{state.pos.east!r},{state.pos.north!r},{state.psi!r},"
                f"{state.v_water!r},{state.fuel!r},{state.engine.name},{out.mode.name}\n"
            )

    def run(self, duration: float | None = None) -> dict:
        """Run to ``duration`` (or the scenario's) and return metrics."""
        horizon = duration if duration is not None else self.scenario.duration
        steps = int(round(horizon / self.dt))
        for _ in range(steps):
            self.step()
        return self.finish()

    def finish(self) -> dict:
        metrics = self._metrics_acc.result()
        if self.artifacts.metrics_file is not None:
            import json

            self.artifacts.metrics_file.write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n")
        self.close()
        return metrics

    def close(self) -> None:
        if self._writer is not None:
            self._writer.close()
        for fh in (self._track_fh, self._sample_fh):
            if fh is not None and not fh.closed:
                fh.close()

    @property
    def records(self) -> list[dict]:
        if self._records is None:
            raise RuntimeError("call keep_records() before stepping to retain records")
        return self._records


class MetricsAccumulator:
    """Folds session records into run metrics. Replay feeds the same record
    stream back through this class, so replayed metrics are exact."""

    def __init__(self) -> None:
        self.per_vehicle: dict[int, dict] = {}
        self.frames = {"up_sent": 0, "up_dropped": 0, "down_sent": 0, "down_dropped": 0}
        self._fuel0: dict[int, float] = {}
        self._fuel_last: dict[int, float] = {}
        self._cross_sq: dict[int, list[float]] = {}

    def _veh(self, sys: int) -> dict:
        return self.per_vehicle.setdefault(
            sys,
            {
                "waypoints_total": 0,
                "waypoints_hit": 0,
                "first_pass_misses": 0,
                "mission_complete": False,
                "cross_track_rms_straight": None,
                "fuel_used": 0.0,
            },
        )

    def add(self, r: dict) -> None:
        rtype = r.get("type")
        if rtype == "header":
            for v in r.get("vehicles", []):
                veh = self._veh(v["sys"])
                veh["waypoints_total"] = v["mission_len"]
                self._fuel0[v["sys"]] = v["fuel0"]
        elif rtype == "wp":
            veh = self._veh(r["sys"])
            if r["event"] == "hit":
                veh["waypoints_hit"] += 1
            else:
                veh["first_pass_misses"] += 1
        elif rtype == "state":
            sys = r["sys"]
            self._fuel_last[sys] = r["fuel"]
            if (
                "cross" in r
                and not r.get("done", False)
                and r.get("wp", 0) >= 1
                and r.get("leg", 0.0) >= STRAIGHT_LEG_MIN_M
            ):
                self._cross_sq.setdefault(sys, []).append(r["cross"] ** 2)
        elif rtype == "frame":
            self.frames[f"{r['dir']}_sent"] += 1
        elif rtype == "drop":
            self.frames[f"{r['dir']}_sent"] += 1
            self.frames[f"{r['dir']}_dropped"] += 1

    def result(self) -> dict:
        for sys, veh in self.per_vehicle.items():
            veh["mission_complete"] = (
                veh["waypoints_total"] > 0 and veh["waypoints_hit"] >= veh["waypoints_total"]
            )
            sq = self._cross_sq.get(sys)
            veh["cross_track_rms_straight"] = math.sqrt(sum(sq) / len(sq)) if sq else None
            if sys in self._fuel0 and sys in self._fuel_last:
                veh["fuel_used"] = self._fuel0[sys] - self._fuel_last[sys]
        totals = {
            "frames_sent": self.frames["up_sent"] + self.frames["down_sent"],
            "frames_dropped": self.frames["up_dropped"] + self.frames["down_dropped"],
            "frames_delivered_to_queue": (
                self.frames["up_sent"]
                + self.frames["down_sent"]
                - self.frames["up_dropped"]
                - self.frames["down_dropped"]
            ),
            "waypoints_total": sum(v["waypoints_total"] for v in self.per_vehicle.values()),
            "waypoints_hit": sum(v["waypoints_hit"] for v in self.per_vehicle.values()),
            "first_pass_misses": sum(v["first_pass_misses"] for v in self.per_vehicle.values()),
            "all_missions_complete": all(
                v["mission_complete"]
                for v in self.per_vehicle.values()
                if v["waypoints_total"] > 0
            )
            if self.per_vehicle
            else False,
        }
        return {
            "per_vehicle": {str(k): v for k, v in sorted(self.per_vehicle.items())},
            "frames": dict(self.frames),
            "totals": totals,
        }


def compute_metrics(records: Iterable[dict]) -> dict:
    acc = MetricsAccumulator()
    for r in records:
        acc.add(r)
    return acc.result()


def replay_metrics(session_log: str | Path) -> dict:
    """Recompute metrics from a recorded session log."""
    return compute_metrics(read_events(session_log))
