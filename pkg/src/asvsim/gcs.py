"""Ground control station service: fleet registry fed by the telemetry
stream, command dispatch, reliable mission upload, the automated preflight
checklist, and fan-out to stream subscribers (the web UI).

The GCS treats the kill path as special: routine commands are rejected on
a lost link, a kill is always attempted — and mirrored onto the simulated
RC kill channel, matching the parallel hardware circuits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

from .autopilot import Mission
from .geo import GeoPoint
from .link import MissionSender
from .protocol import (
    AckStatus,
    DecodedFrame,
    Heartbeat,
    Kill,
    Message,
    Mode,
    ProtocolError,
    SensorKind,
    SensorReport,
    SetMode,
    Telemetry,
    VelocitySetpoint,
    decode,
)
from .sensors import DepthGrid, SampleQuality, SensorSample, grid_depth
from .vehicle import EngineStatus

GCS_SYS_ID = 0


class LinkState(enum.Enum):
    CONNECTED = "connected"
    DEGRADED = "degraded"
    LOST = "lost"


@dataclass
class FleetEntry:
    sys_id: int
    last_heartbeat_t: float = -math.inf
    heartbeat: Heartbeat | None = None
    telemetry: Telemetry | None = None
    link_state: LinkState = LinkState.LOST
    active_mission_id: int | None = None
    heartbeat_period: float = 1.0

    def age(self, t: float) -> float:
        return t - self.last_heartbeat_t

    def update_link_state(self, t: float) -> None:
        age = self.age(t)
        if age >= 3.0 * self.heartbeat_period:
            self.link_state = LinkState.LOST
        elif age > 1.5 * self.heartbeat_period:
            self.link_state = LinkState.DEGRADED
        else:
            self.link_state = LinkState.CONNECTED


@dataclass
class UploadHandle:
    sys_id: int
    mission_id: int
    sender: MissionSender
    activate: bool = False
    activated: bool = False

    @property
    def status(self) -> AckStatus | None:
        return self.sender.result


@dataclass
class ChecklistItem:
    name: str
    stage: str              # 'engine_off' or 'engine_on'
    passed: bool
    detail: str = ""


@dataclass
class ChecklistReport:
    items: list[ChecklistItem] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.items) and all(i.passed for i in self.items)

    def add(self, name: str, stage: str, passed: bool, detail: str = "") -> None:
        self.items.append(ChecklistItem(name, stage, passed, detail))


class GcsService:
    """Shore-side brain. One per simulation; vehicles are registered with a
    send callback (frames go out through the per-vehicle radio link) and an
    optional RC kill-mirror callback."""

    def __init__(self, origin: GeoPoint, heartbeat_hz: float = 1.0, rc_kill_mirror: bool = True):
        self.origin = origin
        self.heartbeat_period = 1.0 / heartbeat_hz
        self.rc_kill_mirror = rc_kill_mirror
        self.fleet: dict[int, FleetEntry] = {}
        self._send: dict[int, Callable[[Message], bool]] = {}
        self._mirror: dict[int, Callable[[], None]] = {}
        self._uploads: dict[int, UploadHandle] = {}
        self.quarantined = 0
        self._next_heartbeat = 0.0
        self._subscribers: list[Callable[[bytes], None]] = []
        self._depth_samples: list[tuple[float, float, float]] = []   # east, north, depth
        self._mission_seq = 0

    # -- wiring ------------------------------------------------------------

    def register_vehicle(
        self,
        sys_id: int,
        send: Callable[[Message], bool],
        kill_mirror: Callable[[], None] | None = None,
    ) -> None:
        self.fleet[sys_id] = FleetEntry(sys_id)
        self._send[sys_id] = send
        if kill_mirror is not None:
            self._mirror[sys_id] = kill_mirror

    def subscribe(self, fn: Callable[[bytes], None]) -> None:
        self._subscribers.append(fn)

    def unsubscribe(self, fn: Callable[[bytes], None]) -> None:
        if fn in self._subscribers:
            self._subscribers.remove(fn)

    # -- inbound -------------------------------------------------------------

    def handle_frame_bytes(self, data: bytes, t: float) -> DecodedFrame | None:
        try:
            frame = decode(data)
        except ProtocolError:
            self.quarantined += 1
            return None
        if frame.sys_id not in self.fleet:
            self.quarantined += 1
            return None
        for fn in list(self._subscribers):
            fn(data)
        self._apply(frame, t)
        return frame

    def _apply(self, frame: DecodedFrame, t: float) -> None:
        entry = self.fleet[frame.sys_id]
        msg = frame.message
        if isinstance(msg, Heartbeat):
            entry.last_heartbeat_t = t
            entry.heartbeat = msg
            entry.update_link_state(t)
        elif isinstance(msg, Telemetry):
            entry.telemetry = msg
        elif isinstance(msg, SensorReport):
            if msg.kind is SensorKind.DEPTH and len(msg.values) >= 3:
                depth, east, north = msg.values[0], msg.values[1], msg.values[2]
                self._depth_samples.append((east, north, depth))
        upload = self._uploads.get(frame.sys_id)
        if upload is not None and not upload.sender.done:
            upload.sender.on_message(msg, t)
            self._finish_upload(frame.sys_id, t)

    # -- commands ------------------------------------------------------------

    def command(self, sys_id: int, cmd: Message, t: float) -> tuple[bool, str]:
        """Enqueue a command for transmission. 'Accepted' means handed to
        the radio; delivery is up to the link."""
        if sys_id not in self.fleet:
            return False, f"unknown sys_id {sys_id}"
        if not isinstance(cmd, (SetMode, Kill, VelocitySetpoint)):
            return False, f"unsupported command {type(cmd).__name__}"
        entry = self.fleet[sys_id]
        entry.update_link_state(t)
        if isinstance(cmd, Kill):
            self._send[sys_id](cmd)
            if self.rc_kill_mirror and sys_id in self._mirror:
                self._mirror[sys_id]()
            return True, "kill attempted" if entry.link_state is LinkState.LOST else "ok"
        if entry.link_state is LinkState.LOST:
            return False, "link lost"
        self._send[sys_id](cmd)
        return True, "ok"

    def next_mission_id(self) -> int:
        self._mission_seq += 1
        return self._mission_seq

    def upload_mission(
        self, sys_id: int, mission: Mission, t: float, activate: bool = False
    ) -> tuple[UploadHandle | None, str]:
        if sys_id not in self.fleet:
            return None, f"unknown sys_id {sys_id}"
        entry = self.fleet[sys_id]
        entry.update_link_state(t)
        if entry.link_state is LinkState.LOST:
            return None, "link lost"
        existing = self._uploads.get(sys_id)
        if existing is not None and not existing.sender.done:
            return None, "upload already in progress"
        sender = MissionSender(mission.to_transfer(), lambda m: self._send[sys_id](m), t)
        handle = UploadHandle(sys_id, mission.id, sender, activate=activate)
        self._uploads[sys_id] = handle
        return handle, "ok"

    def upload_and_activate(self, sys_id: int, mission: Mission, t: float):
        return self.upload_mission(sys_id, mission, t, activate=True)

    def _finish_upload(self, sys_id: int, t: float) -> None:
        handle = self._uploads.get(sys_id)
        if handle is None or handle.sender.result is not AckStatus.ACCEPTED:
            return
        entry = self.fleet[sys_id]
        entry.active_mission_id = handle.mission_id
        if handle.activate and not handle.activated:
            handle.activated = True
            self.command(sys_id, SetMode(Mode.AUTO_WP_OFFBOARD), t)

    # -- periodic ------------------------------------------------------------

    def tick(self, t: float) -> None:
        if t >= self._next_heartbeat:
            self._next_heartbeat = t + self.heartbeat_period
            hb = Heartbeat(Mode.MANUAL_RC, EngineStatus.RUNNING, True)
            for sys_id in self.fleet:
                self._send[sys_id](hb)
        for entry in self.fleet.values():
            entry.update_link_state(t)
        for sys_id, handle in list(self._uploads.items()):
            if not handle.sender.done:
                handle.sender.tick(t)
                self._finish_upload(sys_id, t)

    # -- data products ---------------------------------------------------------

    def depth_grid(self, cell_size: float = 10.0) -> DepthGrid:
        from .geo import LocalPoint, local_to_geo

        samples = [
            SensorSample(
                0.0,
                local_to_geo(self.origin, LocalPoint(e, n)),
                0.0,
                SensorKind.DEPTH,
                (float(d),),
                SampleQuality.OK,
            )
            for e, n, d in self._depth_samples
        ]
        return grid_depth(samples, cell_size, self.origin)


PREFLIGHT_RC_BANDS: tuple[tuple[float, Mode], ...] = (
    (1100.0, Mode.MANUAL_RC),
    (1290.0, Mode.AUTO_WP_OFFBOARD),
    (1420.0, Mode.AUTO_WP_ONBOARD),
    (1550.0, Mode.VELOCITY_CONTROL),
    (1680.0, Mode.MANUAL_RC),
    (1900.0, Mode.AUTO_WP_ONBOARD),
)


def preflight(world, sys_id: int) -> ChecklistReport:
    """Automated startup checklist against a (stationary) simulated vehicle.

    Runs the engine-off stage, then the engine-on stage: steering and
    throttle sweeps reflected at the servo PWM outputs, kill assert/clear,
    mode cycling across every resolvable mode, a link heartbeat check, and
    sensor stream presence. ``world`` is the running simulation; the bench
    handles it exposes (transmitter, safety, engine start) stand in for the
    human crew of the real procedure.
    """
    report = ChecklistReport()
    rt = world.runtime(sys_id)
    if rt is None:
        report.add("vehicle known", "engine_off", False, f"unknown sys_id {sys_id}")
        return report
    if rt.vehicle.state.v_water > 0.2:
        report.add("vehicle stationary", "engine_off", False,
                   f"moving at {rt.vehicle.state.v_water:.2f} m/s; bench check requires standstill")
        return report

    tx = rt.transmitter
    saved = (tx.ch1_us, tx.ch3_us, tx.ch5_us, tx.ch6_us)

    # Reachability gate: give the link a heartbeat window before poking.
    world.step_for(2.5)
    entry = world.gcs.fleet.get(sys_id)
    if entry is None or entry.link_state is LinkState.LOST:
        for name in ("steering sweep", "throttle sweep", "kill circuit", "mode cycling",
                     "link heartbeat", "sensor streams"):
            for stage in ("engine_off", "engine_on"):
                report.add(name, stage, False, "link lost: vehicle unreachable")
        return report

    def settle(n: int = 3) -> None:
        for _ in range(n):
            world.step()

    def check_steering(stage: str) -> None:
        cal = rt.autopilot.config.steering_cal
        tx.ch5_us = 1100.0  # MANUAL_RC band: stick passthrough
        failures = []
        for target, label in ((cal.min_us, "min"), (cal.trim_us, "trim"), (cal.max_us, "max")):
            tx.ch1_us = target
            settle()
            got = rt.last_outputs.steering.pulse_us if rt.last_outputs else float("nan")
            if abs(got - target) > 1.0:
                failures.append(f"{label}: commanded {target:.0f}us, servo at {got:.0f}us")
        tx.ch1_us = cal.trim_us
        settle()
        report.add("steering sweep", stage, not failures, "; ".join(failures))

    def check_throttle(stage: str) -> None:
        cal = rt.autopilot.config.throttle_cal
        tx.ch5_us = 1100.0
        # Sweep the no-thrust side (clutch out below trim) so the bench
        # check never launches the boat.
        failures = []
        for target, label in ((cal.min_us, "min"), (cal.trim_us, "trim")):
            tx.ch3_us = target
            settle()
            got = rt.last_outputs.throttle.pulse_us if rt.last_outputs else float("nan")
            if abs(got - target) > 1.0:
                failures.append(f"{label}: commanded {target:.0f}us, servo at {got:.0f}us")
        tx.ch3_us = cal.trim_us
        settle()
        report.add("throttle sweep", stage, not failures, "; ".join(failures))

    def check_kill(stage: str) -> None:
        from .autopilot import KillDecision

        tx.ch6_us = 1000.0
        settle()
        killed = (
            rt.last_outputs is not None
            and rt.last_outputs.engine_cmd is KillDecision.ENGINE_KILLED
        )
        engine_stopped = rt.vehicle.state.engine is not EngineStatus.RUNNING
        tx.ch6_us = 1900.0
        settle()
        if rt.safety.kill_override:
            report.add("kill circuit", stage, False,
                       "kill ineffective: physical override engaged")
            return
        if not killed:
            report.add("kill circuit", stage, False, "kill command not honored")
            return
        if stage == "engine_on" and not engine_stopped:
            report.add("kill circuit", stage, False, "engine kept running through kill")
            return
        report.add("kill circuit", stage, True)

    def check_modes(stage: str) -> None:
        failures = []
        for us, expected in PREFLIGHT_RC_BANDS:
            tx.ch5_us = us
            settle(2)
            if rt.autopilot.mode is not expected:
                failures.append(f"ch5={us:.0f}us -> {rt.autopilot.mode.name}, expected {expected.name}")
        world.set_safety(sys_id, hw_manual_switch=True)
        settle(2)
        if rt.autopilot.mode is not Mode.MANUAL_ONBOARD:
            failures.append("hardware manual switch did not force MANUAL_ONBOARD")
        world.set_safety(sys_id, hw_manual_switch=False)
        tx.ch5_us = 1100.0
        settle(2)
        report.add("mode cycling", stage, not failures, "; ".join(failures))

    def check_link(stage: str) -> None:
        world.step_for(2.5)
        entry = world.gcs.fleet[sys_id]
        age = entry.age(world.t)
        ok = age <= 2.0 * entry.heartbeat_period
        report.add("link heartbeat", stage, ok, "" if ok else f"last heartbeat {age:.1f}s ago")

    def check_sensors(stage: str) -> None:
        before = dict(rt.sample_counts)
        world.step_for(2.0)
        failures = []
        for kind in (SensorKind.DEPTH, SensorKind.WIND, SensorKind.CURRENT):
            got = rt.sample_counts.get(kind, 0) - before.get(kind, 0)
            if got < 1:
                failures.append(f"no {kind.name.lower()} samples within 2 s")
        report.add("sensor streams", stage, not failures, "; ".join(failures))

    # Engine-off stage.
    rt.vehicle.kill()
    for check in (check_steering, check_throttle, check_kill, check_modes, check_link, check_sensors):
        check("engine_off")

    # Engine-on stage.
    world.bench_start_engine(sys_id)
    settle()
    for check in (check_steering, check_throttle, check_kill, check_modes, check_link, check_sensors):
        check("engine_on")
    world.bench_start_engine(sys_id)

    tx.ch1_us, tx.ch3_us, tx.ch5_us, tx.ch6_us = saved
    return report
