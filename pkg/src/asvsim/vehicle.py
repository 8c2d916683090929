"""Single-vehicle plant model: servo-driven jet propulsion with a clutch,
first-order speed response, curvature-limited steering, fuel burn, and a
latching engine-kill circuit.

The model is deliberately simple — the smallest plant consistent with a
Dubins-style planner and the published performance envelope of the real
boat (top speed 21.7 km/h, 5 m minimum turn radius, 9.8 L tank lasting
4 h at full throttle and 18 h at idle).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from .environment import EnvironmentField
from .geo import Heading, LocalPoint, Vector2, normalize_heading

MAX_STEP_DT = 0.1


@dataclass(frozen=True)
class ServoCalibration:
    """PWM endpoints/neutral for one servo channel, measured in microseconds."""

    min_us: float = 1100.0
    trim_us: float = 1500.0
    max_us: float = 1900.0
    reversed: bool = False

    def __post_init__(self) -> None:
        if not 800.0 <= self.min_us < self.trim_us < self.max_us <= 2200.0:
            raise ValueError(
                f"calibration must satisfy 800 <= min < trim < max <= 2200, "
                f"got ({self.min_us}, {self.trim_us}, {self.max_us})"
            )

    def clamp(self, pulse_us: float) -> float:
        return min(max(pulse_us, self.min_us), self.max_us)


@dataclass(frozen=True)
class PwmSignal:
    """One channel's pulse width in microseconds."""

    pulse_us: float


def pwm_to_normalized(sig: PwmSignal, cal: ServoCalibration) -> float:
    """Map a pulse width to [-1, 1]: trim -> 0, max -> +1, min -> -1,
    piecewise linear, clamped, sign-flipped for reversed channels."""
    us = cal.clamp(sig.pulse_us)
    if us >= cal.trim_us:
        frac = (us - cal.trim_us) / (cal.max_us - cal.trim_us)
    else:
        frac = (us - cal.trim_us) / (cal.trim_us - cal.min_us)
    return -frac if cal.reversed else frac


def normalized_to_pwm(frac: float, cal: ServoCalibration) -> PwmSignal:
    """Inverse of :func:`pwm_to_normalized` (fraction clamped to [-1, 1])."""
    f = min(max(frac, -1.0), 1.0)
    if cal.reversed:
        f = -f
    if f >= 0.0:
        return PwmSignal(cal.trim_us + f * (cal.max_us - cal.trim_us))
    return PwmSignal(cal.trim_us + f * (cal.trim_us - cal.min_us))


@dataclass(frozen=True)
class VehicleParams:
    v_max: float = 6.03                 # m/s, 21.7 km/h
    r_min: float = 5.0                  # m, turn radius at full deflection
    delta_max: float = 0.5              # rad, nozzle limit (informational)
    tau_v: float = 2.0                  # s, first-order speed lag
    fuel_capacity: float = 9.8          # liters
    rate_idle: float = 9.8 / 18.0       # L/h at zero throttle
    rate_full: float = 9.8 / 4.0        # L/h at full throttle
    payload_max: float = 163.0          # kg, informational only
    wind_coeff: float = 0.02            # ground drift per m/s of wind

    def __post_init__(self) -> None:
        if self.v_max <= 0 or self.r_min <= 0 or self.fuel_capacity <= 0:
            raise ValueError("v_max, r_min and fuel_capacity must be positive")
        if not self.rate_full > self.rate_idle > 0:
            raise ValueError("need rate_full > rate_idle > 0")

    def fuel_rate(self, u: float) -> float:
        """Fuel burn in L/h at throttle fraction ``u`` (linear between the
        two published operating points)."""
        return self.rate_idle + (self.rate_full - self.rate_idle) * u


def fuel_endurance(params: VehicleParams, u: float) -> float:
    """Hours of run time on a full tank at constant throttle fraction ``u``."""
    if not 0.0 <= u <= 1.0:
        raise ValueError("throttle fraction must be in [0, 1]")
    return params.fuel_capacity / params.fuel_rate(u)


class EngineStatus(enum.IntEnum):
    # Values are the wire codes used in Heartbeat frames.
    RUNNING = 0
    KILLED = 1
    FUEL_EXHAUSTED = 2


@dataclass(frozen=True)
class VehicleState:
    pos: LocalPoint = field(default_factory=lambda: LocalPoint(0.0, 0.0))
    psi: Heading = 0.0
    v_water: float = 0.0                # m/s, water-relative forward speed
    fuel: float = 9.8                   # liters
    engine: EngineStatus = EngineStatus.RUNNING
    clutch_engaged: bool = True
    t: float = 0.0                      # s, simulation time


def ground_velocity(params: VehicleParams, state: VehicleState, env: EnvironmentField) -> Vector2:
    """World-frame velocity over ground: hull motion through the water,
    advected by the current, plus a small wind-drift term."""
    s, c = math.sin(state.psi), math.cos(state.psi)
    current = env.current_at(state.pos)
    wind = env.wind_at(state.pos)
    return Vector2(
        state.v_water * s + current.x + params.wind_coeff * wind.x,
        state.v_water * c + current.y + params.wind_coeff * wind.y,
    )


def step(
    params: VehicleParams,
    state: VehicleState,
    steering: float,
    throttle: float,
    env: EnvironmentField,
    dt: float,
) -> VehicleState:
    """Advance one explicit-Euler step.

    ``steering`` and ``throttle`` are normalized servo fractions in [-1, 1]
    (already decoded from PWM). Negative throttle disengages the clutch —
    the jet drive has no reverse; the impeller simply stops turning.
    """
    if not 0.0 < dt <= MAX_STEP_DT:
        raise ValueError(f"dt must be in (0, {MAX_STEP_DT}] s, got {dt}")
    steering = min(max(steering, -1.0), 1.0)
    throttle = min(max(throttle, -1.0), 1.0)

    clutch = throttle >= 0.0
    u = max(throttle, 0.0)
    running = state.engine is EngineStatus.RUNNING

    v_target = u * params.v_max if (running and clutch) else 0.0
    v_water = state.v_water + (dt / params.tau_v) * (v_target - state.v_water)
    v_water = min(max(v_water, 0.0), params.v_max)

    yaw_rate = (state.v_water / params.r_min) * steering
    psi = normalize_heading(state.psi + yaw_rate * dt)

    vg = ground_velocity(params, state, env)
    pos = state.pos.offset(vg.x * dt, vg.y * dt)

    fuel = state.fuel
    engine = state.engine
    if running:
        fuel = max(0.0, fuel - dt * params.fuel_rate(u) / 3600.0)
        if fuel == 0.0:
            engine = EngineStatus.FUEL_EXHAUSTED

    return VehicleState(
        pos=pos,
        psi=psi,
        v_water=v_water,
        fuel=fuel,
        engine=engine,
        clutch_engaged=clutch,
        t=state.t + dt,
    )


def apply_kill(state: VehicleState) -> VehicleState:
    """Kill the engine (magneto shorted to ground). Thrust ceases at once;
    speed then decays with the usual lag. Latching: see :func:`start_engine`."""
    if state.engine is EngineStatus.FUEL_EXHAUSTED:
        return state
    return replace(state, engine=EngineStatus.KILLED)


def start_engine(state: VehicleState) -> VehicleState:
    """Bench/operator engine start. Fails silently into the same state when
    there is no fuel; the kill circuit must already be released."""
    if state.fuel <= 0.0:
        return replace(state, engine=EngineStatus.FUEL_EXHAUSTED)
    return replace(state, engine=EngineStatus.RUNNING)


class Vehicle:
    """One simulated hull: parameters, servo calibrations, and current state.

    Instances are single-threaded state machines; step them from one thread
    (or hand the whole instance over), never share concurrently.
    """

    def __init__(
        self,
        params: VehicleParams | None = None,
        steering_cal: ServoCalibration | None = None,
        throttle_cal: ServoCalibration | None = None,
        state: VehicleState | None = None,
    ):
        self.params = params or VehicleParams()
        self.steering_cal = steering_cal or ServoCalibration()
        self.throttle_cal = throttle_cal or ServoCalibration()
        self.state = state or VehicleState(fuel=self.params.fuel_capacity)

    def step(self, steering: PwmSignal, throttle: PwmSignal, env: EnvironmentField, dt: float) -> VehicleState:
        self.state = step(
            self.params,
            self.state,
            pwm_to_normalized(steering, self.steering_cal),
            pwm_to_normalized(throttle, self.throttle_cal),
            env,
            dt,
        )
        return self.state

    def kill(self) -> VehicleState:
        self.state = apply_kill(self.state)
        return self.state

    def start_engine(self) -> VehicleState:
        self.state = start_engine(self.state)
        return self.state

    def ground_velocity(self, env: EnvironmentField) -> Vector2:
        return ground_velocity(self.params, self.state, env)
