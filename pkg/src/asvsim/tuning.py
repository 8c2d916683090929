"""Automated steering-gain tuning.

Reproduces the hand procedure used on the real boat: drive a scripted
right-angle line test in calm water, look at how the hull finds the target
line, and nudge one gain at a time — proportional for turn authority,
derivative against oscillation and chatter, integral against steady bias,
and the waypoint radius against corner cutting — until the run is clean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

from .autopilot import GuidanceOutput, HeadingPid, Mission, PidGains, Waypoint, WaypointGuidance
from .environment import UniformField
from .geo import GeoPoint, LocalPoint, local_to_geo
from .vehicle import Vehicle, VehicleParams, VehicleState, step as vehicle_step


@dataclass
class LineTestMetrics:
    settle_time: float          # s from corner until cross-track stays < 0.5 m (inf = never)
    oscillations: int           # target-line crossings with >= 0.3 m excursions
    oscillation_period: float   # s, mean interval between crossings (inf if < 2)
    chatter_rate: float         # steering reversals per second after the corner
    bias: float                 # m, mean cross-track over the final stretch
    corner_overshoot: float     # m past the corner before turning in
    settled: bool

    def passes(self) -> bool:
        return (
            self.settled
            and self.oscillations <= 3
            and self.chatter_rate <= 4.0
            and abs(self.bias) < 0.5
        )


@dataclass
class TuneResult:
    gains: PidGains
    converged: bool
    iterations: int
    history: list[tuple[str, PidGains]]
    metrics: LineTestMetrics


def line_test(
    gains: PidGains,
    params: VehicleParams | None = None,
    dt: float = 0.05,
    lookahead: float = 8.0,
) -> LineTestMetrics:
    """Closed-loop scripted run: north leg, right-angle corner, long east
    leg; all measurements are taken on the east leg."""
    params = params or VehicleParams()
    env = UniformField()
    origin = GeoPoint(34.0, -81.0)
    corner = LocalPoint(0.0, 60.0)
    far = LocalPoint(260.0, 60.0)
    mission = Mission(
        1,
        (
            Waypoint(local_to_geo(origin, corner), 4.0),
            Waypoint(local_to_geo(origin, far), 4.0),
        ),
        local_to_geo(origin, LocalPoint(0.0, 0.0)),
    )

    vehicle = Vehicle(params, state=VehicleState(pos=LocalPoint(0.0, 0.0), psi=0.0,
                                                 fuel=params.fuel_capacity))
    pid = HeadingPid(gains)
    guidance = WaypointGuidance(lookahead)
    guidance.load(mission, origin)

    on_leg2 = False
    leg2_start_t = 0.0
    cross: list[tuple[float, float]] = []     # (t, cross-track on leg2)
    steer: list[tuple[float, float]] = []
    overshoot = 0.0
    t = 0.0
    for _ in range(int(90.0 / dt)):
        state = vehicle.state
        g: GuidanceOutput = guidance.update(state.pos, state.psi, gains.wp_radius)
        if g.done:
            break
        frac = pid.update(g.psi_des, state.psi, dt)
        u = min(max(g.speed / params.v_max + 0.25 * (g.speed - state.v_water), 0.0), 1.0)
        vehicle.state = vehicle_step(params, state, frac, u, env, dt)
        t += dt
        if g.wp_index == 1:
            if not on_leg2:
                on_leg2 = True
                leg2_start_t = t
            overshoot = max(overshoot, vehicle.state.pos.north - corner.north)
            cross.append((t, g.cross_track))
            steer.append((t, frac))

    if not cross:
        return LineTestMetrics(math.inf, 0, math.inf, 0.0, math.inf, overshoot, False)

    # Oscillations: crossings of the target line with real excursions.
    oscillations = 0
    crossing_times = []
    prev_sign = 0
    peak = 0.0
    for ts, c in cross:
        s = 1 if c > 0 else (-1 if c < 0 else prev_sign)
        if prev_sign != 0 and s != prev_sign and peak >= 0.3:
            oscillations += 1
            crossing_times.append(ts)
            peak = 0.0
        peak = max(peak, abs(c))
        prev_sign = s
    if len(crossing_times) >= 2:
        period = (crossing_times[-1] - crossing_times[0]) / (len(crossing_times) - 1)
    else:
        period = math.inf

    # Settle: last time |cross| exceeded 0.5 m.
    settle_time = math.inf
    last_bad = None
    for ts, c in cross:
        if abs(c) > 0.5:
            last_bad = ts
    if last_bad is None:
        settle_time = 0.0
    elif cross[-1][0] - last_bad > 5.0:
        settle_time = last_bad - leg2_start_t

    # Chatter: steering direction reversals with meaningful amplitude.
    reversals = 0
    prev_delta = 0.0
    prev_frac = steer[0][1]
    for _, f in steer[1:]:
        delta = f - prev_frac
        if prev_delta * delta < 0 and (abs(delta) > 0.08 or abs(prev_delta) > 0.08):
            reversals += 1
        if abs(delta) > 1e-9:
            prev_delta = delta
        prev_frac = f
    span = max(steer[-1][0] - steer[0][0], 1e-6)
    chatter_rate = reversals / span

    tail = [c for ts, c in cross if ts >= cross[-1][0] - 15.0]
    bias = sum(tail) / len(tail) if tail else math.inf

    return LineTestMetrics(
        settle_time=settle_time,
        oscillations=oscillations,
        oscillation_period=period,
        chatter_rate=chatter_rate,
        bias=bias,
        corner_overshoot=overshoot,
        settled=settle_time != math.inf,
    )


def auto_tune(
    initial: PidGains,
    test: Callable[[PidGains], LineTestMetrics] | None = None,
    max_iterations: int = 25,
) -> TuneResult:
    """Iterate the tuning rules until the line test is clean (or the
    iteration budget runs out, in which case the best gains seen so far
    come back flagged unconverged)."""
    test = test or line_test
    gains = initial
    history: list[tuple[str, PidGains]] = []
    best = (math.inf, gains, None)

    for iteration in range(1, max_iterations + 1):
        m = test(gains)
        score = (
            (0.0 if m.settled else 50.0)
            + max(0, m.oscillations - 3) * 10.0
            + max(0.0, m.chatter_rate - 4.0) * 5.0
            + max(0.0, abs(m.bias) - 0.5) * 4.0
        )
        if score < best[0]:
            best = (score, gains, m)
        if m.passes():
            return TuneResult(gains, True, iteration, history, m)

        if m.chatter_rate > 4.0:
            action, gains = "decrease d (chatter)", replace(gains, d=gains.d * 0.4)
        elif m.corner_overshoot > 5.0:
            # Sluggish turn-in: the hull blows far past the corner before it
            # comes around, regardless of how it rings afterwards.
            action, gains = "increase p (slow turn)", replace(gains, p=gains.p * 1.5)
        elif m.oscillations > 3 and m.oscillation_period < 2.5:
            # Fast ringing about the line: too much proportional authority.
            action, gains = "decrease p (oscillation)", replace(gains, p=max(gains.p * 0.7, 0.05))
        elif m.oscillations > 3:
            # Slow weaving: the hull lacks the authority to hold the line.
            action, gains = "increase p (slow weave)", replace(gains, p=gains.p * 1.5)
        elif not m.settled:
            action, gains = "increase d (damping)", replace(gains, d=gains.d + 0.01)
        elif abs(m.bias) >= 0.5:
            action, gains = "increase i (bias)", replace(gains, i=max(gains.i * 1.5, 0.05))
        elif m.corner_overshoot > 12.0:
            action, gains = "increase wp_radius (late turn)", replace(
                gains, wp_radius=min(gains.wp_radius + 1.0, 12.0)
            )
        else:
            action, gains = "decrease i (residual oscillation)", replace(gains, i=gains.i * 0.7)
        history.append((action, gains))

    m = best[2] or test(best[1])
    return TuneResult(best[1], False, max_iterations, history, m)
