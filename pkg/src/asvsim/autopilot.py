"""Onboard controller: operating-mode state machine, RC decode, kill/failsafe
circuit semantics, PID heading control, pure-pursuit waypoint guidance, and
the velocity-setpoint loop.

The controller runs at a fixed tick rate (default 20 Hz). Each tick it
resolves the operating mode from the hardware manual switch and RC channel
five, evaluates the kill circuit, drains inbound link messages, and emits
servo PWM plus any outbound telemetry.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .geo import (
    GeoPoint,
    Heading,
    LocalPoint,
    Vector2,
    bearing,
    geo_to_local,
    wrap_angle,
)
from .link import MissionData, MissionReceiver
from .protocol import (
    Heartbeat,
    Kill,
    Message,
    MissionCount,
    MissionItem,
    Mode,
    SetMode,
    Telemetry,
    VelocitySetpoint,
)
from .vehicle import PwmSignal, ServoCalibration, VehicleState, normalized_to_pwm

# Channel-five PWM bands. Six switch positions feed five modes, so the two
# spare bands fall back to safe choices (manual, and plain onboard auto).
DEFAULT_MODE_BANDS: tuple[tuple[float, float, Mode], ...] = (
    (900.0, 1230.0, Mode.MANUAL_RC),
    (1230.0, 1360.0, Mode.AUTO_WP_OFFBOARD),
    (1360.0, 1490.0, Mode.AUTO_WP_ONBOARD),
    (1490.0, 1620.0, Mode.VELOCITY_CONTROL),
    (1620.0, 1750.0, Mode.MANUAL_RC),
    (1750.0, 2100.0, Mode.AUTO_WP_ONBOARD),
)

KILL_BAND_MAX_US = 1300.0  # ch6 below this commands a kill


@dataclass(frozen=True)
class RcFrame:
    """Last received RC channels (microseconds) plus their age in seconds."""

    ch1_us: float = 1500.0   # steering
    ch3_us: float = 1500.0   # throttle
    ch5_us: float = 1100.0   # mode select
    ch6_us: float = 1900.0   # kill (low band = kill)
    age: float = 0.0


@dataclass(frozen=True)
class SafetyInputs:
    hw_manual_switch: bool = False   # factory manual/auto switch
    kill_override: bool = False      # physical override: disables the kill path
    autopilot_powered: bool = True
    kill_line_high: bool = True      # active-low kill line


class KillDecision(enum.Enum):
    ENGINE_ALLOWED = "allowed"
    ENGINE_KILLED = "killed"


@dataclass(frozen=True)
class PidGains:
    p: float = 2.0
    i: float = 0.2
    d: float = 0.005
    i_clamp: float = 0.5     # max integral contribution to the output
    wp_radius: float = 5.0   # m, waypoint acceptance radius

    def __post_init__(self) -> None:
        if self.p < 0 or self.i < 0 or self.d < 0:
            raise ValueError("gains must be non-negative")
        if self.wp_radius <= 0:
            raise ValueError("wp_radius must be positive")


@dataclass(frozen=True)
class Waypoint:
    target: GeoPoint
    speed: float = 3.0


@dataclass(frozen=True)
class Mission:
    id: int
    waypoints: tuple[Waypoint, ...]
    home: GeoPoint

    def __post_init__(self) -> None:
        if not self.waypoints:
            raise ValueError("mission needs at least one waypoint")

    def to_transfer(self) -> MissionData:
        return MissionData(
            self.id, tuple((w.target.lat, w.target.lon, w.speed) for w in self.waypoints)
        )

    @staticmethod
    def from_transfer(data: MissionData, home: GeoPoint) -> "Mission":
        return Mission(
            data.mission_id,
            tuple(Waypoint(GeoPoint(lat, lon), speed) for lat, lon, speed in data.items),
            home,
        )


def band_lookup(ch5_us: float, bands=DEFAULT_MODE_BANDS) -> Mode:
    if ch5_us < bands[0][0]:
        return bands[0][2]
    for lo, hi, mode in bands:
        if lo <= ch5_us < hi:
            return mode
    return bands[-1][2]


def resolve_mode(
    safety: SafetyInputs,
    rc: RcFrame,
    last_mode: Mode | None = None,
    rc_timeout: float = 2.0,
    bands=DEFAULT_MODE_BANDS,
) -> Mode:
    """Total mode resolution. The hardware manual switch dominates all radio
    input; a stale RC frame holds the last autonomous mode (an interrupted
    mission keeps running) and otherwise degrades to MANUAL_RC, where the
    controller's RC-loss kill rule applies."""
    if safety.hw_manual_switch:
        return Mode.MANUAL_ONBOARD
    if rc.age > rc_timeout:
        if last_mode in (Mode.AUTO_WP_OFFBOARD, Mode.AUTO_WP_ONBOARD, Mode.VELOCITY_CONTROL):
            return last_mode
        return Mode.MANUAL_RC
    return band_lookup(rc.ch5_us, bands)


def evaluate_kill(safety: SafetyInputs, rc: RcFrame) -> KillDecision:
    """Kill circuit truth table. The relay is energized only while the
    autopilot is powered and driving the line high, so losing power kills
    the engine; the physical override disconnects the whole path for
    manual recovery."""
    if safety.kill_override:
        return KillDecision.ENGINE_ALLOWED
    if rc.ch6_us < KILL_BAND_MAX_US:
        return KillDecision.ENGINE_KILLED
    if not safety.autopilot_powered:
        return KillDecision.ENGINE_KILLED
    if not safety.kill_line_high:
        return KillDecision.ENGINE_KILLED
    return KillDecision.ENGINE_ALLOWED


class HeadingPid:
    """PID on wrapped heading error with integral clamping and
    freeze-on-saturation anti-windup. Output is a steering fraction."""

    def __init__(self, gains: PidGains):
        self.gains = gains
        self.integral = 0.0
        self._prev_error: float | None = None

    def reset(self) -> None:
        self.integral = 0.0
        self._prev_error = None

    def update(self, psi_des: Heading, psi: Heading, dt: float) -> float:
        if dt <= 0:
            raise ValueError("dt must be positive")
        g = self.gains
        e = wrap_angle(psi_des - psi)
        de = 0.0 if self._prev_error is None else (e - self._prev_error) / dt
        self._prev_error = e
        raw = g.p * e + g.i * self.integral + g.d * de
        if -1.0 <= raw <= 1.0:
            self.integral += e * dt
            limit = g.i_clamp / max(g.i, 1e-9)
            self.integral = min(max(self.integral, -limit), limit)
            return raw
        return 1.0 if raw > 1.0 else -1.0


@dataclass(frozen=True)
class GuidanceOutput:
    psi_des: Heading
    speed: float
    done: bool
    wp_index: int
    cross_track: float      # m, signed (positive right of the leg)
    leg_length: float       # m, current leg length
    hit: bool = False       # waypoint accepted this update
    first_pass_miss: bool = False


class WaypointGuidance:
    """Pure-pursuit tracking of the leg from the previous waypoint to the
    active one; the waypoint is accepted inside the acceptance radius.

    A waypoint counts as missed on first pass when the vehicle made a real
    approach (closest distance under four acceptance radii), never entered
    the acceptance radius, and is now receding — it got swept past and has
    to come around again. The vehicle keeps trying; the flag is
    observational.
    """

    def __init__(self, lookahead: float = 8.0):
        self.lookahead = lookahead
        self.mission: Mission | None = None
        self._points: list[LocalPoint] = []
        self._speeds: list[float] = []
        self.index = 0
        self._seg_start: LocalPoint | None = None
        self._missed_flagged = False
        self._min_dist = math.inf
        self.hits = 0
        self.first_pass_misses = 0

    def load(self, mission: Mission, origin: GeoPoint) -> None:
        self.mission = mission
        self._points = [geo_to_local(origin, w.target) for w in mission.waypoints]
        self._speeds = [w.speed for w in mission.waypoints]
        self.index = 0
        self._seg_start = None
        self._missed_flagged = False
        self._min_dist = math.inf
        self.hits = 0
        self.first_pass_misses = 0

    @property
    def active(self) -> bool:
        return self.mission is not None and self.index < len(self._points)

    def update(self, pos: LocalPoint, psi: Heading, wp_radius: float) -> GuidanceOutput:
        if self.mission is None or self.index >= len(self._points):
            return GuidanceOutput(psi, 0.0, True, self.index, 0.0, 0.0)
        if self._seg_start is None:
            self._seg_start = pos

        hit = False
        miss = False
        target = self._points[self.index]
        dist = pos.distance_to(target)
        if dist <= wp_radius:
            hit = True
            self.hits += 1
            self._seg_start = target
            self.index += 1
            self._missed_flagged = False
            self._min_dist = math.inf
            if self.index >= len(self._points):
                return GuidanceOutput(psi, 0.0, True, self.index, 0.0, 0.0, hit=True)
            target = self._points[self.index]
            dist = pos.distance_to(target)
        if (
            not self._missed_flagged
            and self._min_dist < 4.0 * wp_radius
            and dist > self._min_dist + 2.0 * wp_radius
        ):
            self._missed_flagged = True
            self.first_pass_misses += 1
            miss = True
        self._min_dist = min(self._min_dist, dist)

        start = self._seg_start
        dx, dy = target.east - start.east, target.north - start.north
        leg = math.hypot(dx, dy)
        if leg < 1e-9:
            psi_des = bearing(pos, target)
            cross = 0.0
            along = 0.0
        else:
            ux, uy = dx / leg, dy / leg
            rx, ry = pos.east - start.east, pos.north - start.north
            along = rx * ux + ry * uy
            cross = rx * uy - ry * ux   # positive right of the leg
            s = min(max(along + self.lookahead, 0.0), leg)
            aim = LocalPoint(start.east + ux * s, start.north + uy * s)
            if pos.distance_to(aim) < 1e-6:
                psi_des = bearing(pos, target)
            else:
                psi_des = bearing(pos, aim)

        return GuidanceOutput(
            psi_des,
            self._speeds[self.index],
            False,
            self.index,
            cross,
            leg,
            hit=hit,
            first_pass_miss=miss,
        )


@dataclass(frozen=True)
class AutopilotConfig:
    tick_hz: float = 20.0
    rc_timeout: float = 2.0
    lookahead: float = 8.0
    heartbeat_hz: float = 1.0
    telemetry_hz: float = 2.0
    setpoint_timeout: float = 2.0
    speed_gain: float = 0.25          # throttle fraction per m/s of speed error
    v_max: float = 6.03               # configured plant top speed, for feedforward
    mode_bands: tuple = DEFAULT_MODE_BANDS
    steering_cal: ServoCalibration = field(default_factory=ServoCalibration)
    throttle_cal: ServoCalibration = field(default_factory=ServoCalibration)


@dataclass(frozen=True)
class OperatorInput:
    """Simulated factory joystick, used in MANUAL_ONBOARD."""

    steering: float = 0.0
    throttle: float = 0.0


@dataclass(frozen=True)
class NavInput:
    """The controller's navigation solution (perfect at desk scale)."""

    state: VehicleState
    geo: GeoPoint
    v_ground: Vector2


@dataclass(frozen=True)
class TickInputs:
    rc: RcFrame = field(default_factory=RcFrame)
    safety: SafetyInputs = field(default_factory=SafetyInputs)
    messages: tuple = ()
    operator: OperatorInput = field(default_factory=OperatorInput)


@dataclass(frozen=True)
class TickOutputs:
    steering: PwmSignal
    throttle: PwmSignal
    engine_cmd: KillDecision
    mode: Mode
    outbound: tuple
    guidance: GuidanceOutput | None = None


class Autopilot:
    """One vehicle's controller. Step synchronously with its plant; inbound
    link messages are drained at tick start (single consumer)."""

    def __init__(self, sys_id: int, origin: GeoPoint, gains: PidGains | None = None,
                 config: AutopilotConfig | None = None):
        self.sys_id = sys_id
        self.origin = origin
        self.gains = gains or PidGains()
        self.config = config or AutopilotConfig()
        self.pid = HeadingPid(self.gains)
        self.guidance = WaypointGuidance(self.config.lookahead)
        self.receiver = MissionReceiver()
        self.mode: Mode = Mode.MANUAL_RC
        self._mode_override: Mode | None = None
        self._last_band: Mode | None = None
        self._setpoint: VelocitySetpoint | None = None
        self._setpoint_t = -math.inf
        self._gcs_kill = False
        self._seq = 0
        self._next_heartbeat = 0.0
        self._next_telemetry = 0.0
        self._loaded_mission_id: int | None = None

    # -- helpers -----------------------------------------------------------

    def _speed_loop(self, target: float, v_water: float) -> float:
        u = target / self.config.v_max + self.config.speed_gain * (target - v_water)
        return min(max(u, 0.0), 1.0)

    def load_mission(self, mission: Mission) -> None:
        self.guidance.load(mission, self.origin)
        self._loaded_mission_id = mission.id

    def _adopt_received_mission(self) -> None:
        data = self.receiver.loaded
        if data is not None and data.mission_id != self._loaded_mission_id:
            self.load_mission(Mission.from_transfer(data, self.origin))

    def _process_messages(self, messages, now: float, outbound: list) -> None:
        send = lambda m: outbound.append(m)
        for msg in messages:
            if isinstance(msg, Kill):
                self._gcs_kill = True
            elif isinstance(msg, SetMode):
                self._mode_override = msg.mode
            elif isinstance(msg, VelocitySetpoint):
                self._setpoint = msg
                self._setpoint_t = now
            elif isinstance(msg, (MissionCount, MissionItem)):
                self.receiver.on_message(msg, now, send)
        self.receiver.tick(now, send)
        self._adopt_received_mission()

    def _resolve(self, safety: SafetyInputs, rc: RcFrame) -> Mode:
        base = resolve_mode(safety, rc, self.mode, self.config.rc_timeout, self.config.mode_bands)
        if safety.hw_manual_switch:
            return Mode.MANUAL_ONBOARD
        if rc.age <= self.config.rc_timeout:
            band = band_lookup(rc.ch5_us, self.config.mode_bands)
            if self._last_band is not None and band != self._last_band:
                # Operator moved the mode switch: RC wins over a GCS request.
                self._mode_override = None
            self._last_band = band
        if self._mode_override is not None:
            return self._mode_override
        return base

    # -- main entry --------------------------------------------------------

    def control_tick(self, inputs: TickInputs, nav: NavInput, dt: float) -> TickOutputs:
        cfg = self.config
        now = nav.state.t
        outbound: list[Message] = []
        self._process_messages(inputs.messages, now, outbound)

        mode = self._resolve(inputs.safety, inputs.rc)
        if mode != self.mode:
            self.pid.reset()
            self.mode = mode

        kill = evaluate_kill(inputs.safety, inputs.rc)
        if self._gcs_kill:
            kill = KillDecision.ENGINE_KILLED
            self._gcs_kill = False
        if (
            mode is Mode.MANUAL_RC
            and inputs.rc.age > cfg.rc_timeout
            and not inputs.safety.kill_override
        ):
            # RC loss while under direct radio control: safest is to stop.
            kill = KillDecision.ENGINE_KILLED

        trim_steer = PwmSignal(cfg.steering_cal.trim_us)
        trim_thr = PwmSignal(cfg.throttle_cal.trim_us)
        guidance_out: GuidanceOutput | None = None

        if mode is Mode.MANUAL_ONBOARD:
            steering = normalized_to_pwm(inputs.operator.steering, cfg.steering_cal)
            throttle = normalized_to_pwm(inputs.operator.throttle, cfg.throttle_cal)
        elif mode is Mode.MANUAL_RC:
            if inputs.rc.age > cfg.rc_timeout:
                steering, throttle = trim_steer, trim_thr
            else:
                steering = PwmSignal(inputs.rc.ch1_us)
                throttle = PwmSignal(inputs.rc.ch3_us)
        elif mode in (Mode.AUTO_WP_OFFBOARD, Mode.AUTO_WP_ONBOARD):
            if self.guidance.active:
                guidance_out = self.guidance.update(
                    nav.state.pos, nav.state.psi, self.gains.wp_radius
                )
                if guidance_out.done:
                    steering, throttle = trim_steer, trim_thr
                else:
                    frac = self.pid.update(guidance_out.psi_des, nav.state.psi, dt)
                    steering = normalized_to_pwm(frac, cfg.steering_cal)
                    throttle = normalized_to_pwm(
                        self._speed_loop(guidance_out.speed, nav.state.v_water), cfg.throttle_cal
                    )
            else:
                guidance_out = self.guidance.update(nav.state.pos, nav.state.psi, self.gains.wp_radius)
                steering, throttle = trim_steer, trim_thr
        else:  # VELOCITY_CONTROL
            sp = self._setpoint
            if sp is None or now - self._setpoint_t > cfg.setpoint_timeout:
                steering, throttle = trim_steer, trim_thr
            else:
                steering = normalized_to_pwm(sp.steering, cfg.steering_cal)
                throttle = normalized_to_pwm(
                    self._speed_loop(sp.speed, nav.state.v_water), cfg.throttle_cal
                )

        if now >= self._next_heartbeat:
            self._next_heartbeat = now + 1.0 / cfg.heartbeat_hz
            outbound.append(
                Heartbeat(mode, nav.state.engine, kill is KillDecision.ENGINE_ALLOWED)
            )
        if now >= self._next_telemetry:
            self._next_telemetry = now + 1.0 / cfg.telemetry_hz
            outbound.append(
                Telemetry(
                    nav.geo,
                    nav.state.psi,
                    nav.state.v_water,
                    nav.v_ground.x,
                    nav.v_ground.y,
                    nav.state.fuel,
                    now,
                )
            )

        return TickOutputs(steering, throttle, kill, mode, tuple(outbound), guidance_out)
