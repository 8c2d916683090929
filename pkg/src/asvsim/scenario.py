"""Scenario files: one YAML document fully determines a run.

The schema is documented in docs/FORMATS.md. Validation errors carry the
dotted field path and, where the YAML parser can supply it, the source
line number.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import yaml

from .autopilot import DEFAULT_MODE_BANDS, Mission, PidGains, Waypoint
from .environment import (
    DepthPlane,
    EnvironmentField,
    GridField,
    ShearChannelField,
    UniformField,
    VortexField,
)
from .geo import GeoPoint, LocalPoint, Vector2, geo_to_local, local_to_geo
from .link import LinkModel
from .protocol import Mode
from .vehicle import ServoCalibration, VehicleParams


class ScenarioError(ValueError):
    def __init__(self, path: str, message: str, line: int | None = None):
        self.field_path = path
        self.line = line
        loc = f" (line {line})" if line else ""
        super().__init__(f"{path}{loc}: {message}")


def _index_lines(path: Path) -> dict[str, int]:
    """Map dotted field paths to 1-based source lines."""
    try:
        root = yaml.compose(path.read_text())
    except yaml.YAMLError:
        return {}
    lines: dict[str, int] = {}

    def walk(node, prefix: str) -> None:
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                p = f"{prefix}.{k.value}" if prefix else str(k.value)
                lines[p] = k.start_mark.line + 1
                walk(v, p)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                p = f"{prefix}[{i}]"
                lines[p] = v.start_mark.line + 1
                walk(v, p)

    if root is not None:
        walk(root, "")
    return lines


@dataclass
class SensorsConfig:
    depth: bool = True
    wind: bool = True
    current: bool = True
    rate_hz: float = 2.0
    depth_noise_sd: float = 0.05
    vector_noise_sd: float = 0.1


@dataclass
class VehicleSpec:
    sys_id: int
    start: GeoPoint
    heading: float = 0.0
    fuel: float | None = None
    params: VehicleParams = dc_field(default_factory=VehicleParams)
    gains: PidGains = dc_field(default_factory=PidGains)
    steering_cal: ServoCalibration = dc_field(default_factory=ServoCalibration)
    throttle_cal: ServoCalibration = dc_field(default_factory=ServoCalibration)
    mission: Mission | None = None
    sensors: SensorsConfig = dc_field(default_factory=SensorsConfig)
    rc_mode_us: float = 1100.0      # initial ch5 (MANUAL_RC band by default)
    hw_manual: bool = False
    mode_bands: tuple = DEFAULT_MODE_BANDS


@dataclass
class ScenarioEvent:
    t: float
    action: str
    sys_id: int | None = None
    args: dict = dc_field(default_factory=dict)


EVENT_ACTIONS = {
    "set_link",        # args: base_loss / max_range / latency
    "rc_loss",         # RC transmitter stops updating
    "rc_restore",
    "set_ch1",         # args: us
    "set_ch3",
    "set_ch5",
    "set_ch6",
    "set_safety",      # args: hw_manual_switch / kill_override / autopilot_powered / kill_line_high
    "operator",        # args: steering / throttle fractions
    "start_engine",
}


@dataclass
class Scenario:
    name: str = "scenario"
    seed: int = 0
    port: int = 8400
    origin: GeoPoint = dc_field(default_factory=lambda: GeoPoint(34.0, -81.0))
    dt: float = 0.05
    duration: float = 60.0
    time_scale: float = 0.0          # 0 = free-running headless
    environment: EnvironmentField = dc_field(default_factory=UniformField)
    link: LinkModel = dc_field(default_factory=LinkModel)
    gcs_pos: GeoPoint | None = None  # defaults to origin
    telemetry_hz: float = 2.0
    vehicles: list[VehicleSpec] = dc_field(default_factory=list)
    events: list[ScenarioEvent] = dc_field(default_factory=list)

    def __post_init__(self) -> None:
        if self.gcs_pos is None:
            self.gcs_pos = self.origin
        if not 0.0 < self.dt <= 0.1:
            raise ScenarioError("dt", f"must be in (0, 0.1], got {self.dt}")


def _req(data: dict, key: str, path: str, lines: dict):
    if key not in data:
        raise ScenarioError(f"{path}.{key}" if path else key, "required field missing",
                            lines.get(path))
    return data[key]


def _num(value, path: str, lines: dict, lo=None, hi=None) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise ScenarioError(path, f"expected a finite number, got {value!r}", lines.get(path))
    if lo is not None and value < lo:
        raise ScenarioError(path, f"must be >= {lo}, got {value}", lines.get(path))
    if hi is not None and value > hi:
        raise ScenarioError(path, f"must be <= {hi}, got {value}", lines.get(path))
    return float(value)


def _geo(value, path: str, lines: dict) -> GeoPoint:
    try:
        if isinstance(value, dict):
            return GeoPoint(float(value["lat"]), float(value["lon"]))
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return GeoPoint(float(value[0]), float(value[1]))
    except (KeyError, TypeError, ValueError) as e:
        raise ScenarioError(path, str(e), lines.get(path)) from None
    raise ScenarioError(path, f"expected {{lat, lon}} or [lat, lon], got {value!r}", lines.get(path))


def _environment(data: dict, origin: GeoPoint, path: str, lines: dict) -> EnvironmentField:
    kind = data.get("type", "uniform")
    depth_cfg = data.get("depth", {})
    if isinstance(depth_cfg, (int, float)):
        depth = DepthPlane(float(depth_cfg))
    elif isinstance(depth_cfg, dict):
        depth = DepthPlane(
            float(depth_cfg.get("base", 5.0)),
            float(depth_cfg.get("slope_east", 0.0)),
            float(depth_cfg.get("slope_north", 0.0)),
        )
    else:
        raise ScenarioError(f"{path}.depth", "expected number or mapping", lines.get(f"{path}.depth"))
    max_current = float(data.get("max_current", 4.0))

    def vec(key, default=(0.0, 0.0)):
        v = data.get(key, list(default))
        if not (isinstance(v, (list, tuple)) and len(v) == 2):
            raise ScenarioError(f"{path}.{key}", f"expected [east, north], got {v!r}",
                                lines.get(f"{path}.{key}"))
        return Vector2(float(v[0]), float(v[1]))

    if kind == "uniform":
        return UniformField(vec("current"), vec("wind"), depth, max_current)
    if kind == "shear_channel":
        center = data.get("center", [0.0, 0.0])
        return ShearChannelField(
            axis_heading=float(data.get("axis_heading", 0.0)),
            peak_speed=float(data.get("peak_speed", 3.0)),
            center=LocalPoint(float(center[0]), float(center[1])),
            half_width=float(data.get("half_width", 100.0)),
            wind=vec("wind"),
            depth=depth,
            max_current=max_current,
        )
    if kind == "vortex":
        center = data.get("center", [0.0, 0.0])
        return VortexField(
            center=LocalPoint(float(center[0]), float(center[1])),
            peak_speed=float(data.get("peak_speed", 1.5)),
            core_radius=float(data.get("core_radius", 50.0)),
            wind=vec("wind"),
            depth=depth,
            max_current=max_current,
        )
    if kind == "grid":
        file = _req(data, "file", path, lines)
        return GridField.load(file)
    raise ScenarioError(f"{path}.type", f"unknown environment type {kind!r}", lines.get(f"{path}.type"))


def _servo(data: dict | None, path: str, lines: dict) -> ServoCalibration:
    if data is None:
        return ServoCalibration()
    try:
        return ServoCalibration(
            float(data.get("min", 1100.0)),
            float(data.get("trim", 1500.0)),
            float(data.get("max", 1900.0)),
            bool(data.get("reversed", False)),
        )
    except ValueError as e:
        raise ScenarioError(path, str(e), lines.get(path)) from None


def mission_from_dict(data: dict, mission_id: int, path: str = "mission", lines: dict | None = None) -> Mission:
    lines = lines or {}
    wps_raw = _req(data, "waypoints", path, lines)
    if not isinstance(wps_raw, list) or not wps_raw:
        raise ScenarioError(f"{path}.waypoints", "expected a non-empty list",
                            lines.get(f"{path}.waypoints"))
    wps = []
    for i, row in enumerate(wps_raw):
        p = f"{path}.waypoints[{i}]"
        if isinstance(row, dict):
            geo = _geo(row, p, lines)
            speed = float(row.get("speed", 3.0))
        elif isinstance(row, (list, tuple)) and len(row) in (2, 3):
            geo = GeoPoint(float(row[0]), float(row[1]))
            speed = float(row[2]) if len(row) == 3 else 3.0
        else:
            raise ScenarioError(p, f"expected [lat, lon, speed?], got {row!r}", lines.get(p))
        wps.append(Waypoint(geo, speed))
    home = _geo(data["home"], f"{path}.home", lines) if "home" in data else wps[0].target
    return Mission(int(data.get("id", mission_id)), tuple(wps), home)


def load_mission_file(path: str | Path) -> Mission:
    data = json.loads(Path(path).read_text())
    return mission_from_dict(data, data.get("id", 1), path=str(path))


def save_mission_file(path: str | Path, mission: Mission) -> None:
    data = {
        "id": mission.id,
        "home": {"lat": mission.home.lat, "lon": mission.home.lon},
        "waypoints": [
            {"lat": w.target.lat, "lon": w.target.lon, "speed": w.speed}
            for w in mission.waypoints
        ],
    }
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def _vehicle(data: dict, index: int, origin: GeoPoint, base_dir: Path, lines: dict) -> VehicleSpec:
    path = f"vehicles[{index}]"
    sys_id = int(_num(_req(data, "sys_id", path, lines), f"{path}.sys_id", lines, lo=1, hi=255))
    start_raw = data.get("start")
    if start_raw is None:
        start = origin
    elif isinstance(start_raw, dict) and "east" in start_raw:
        start = local_to_geo(origin, LocalPoint(float(start_raw["east"]), float(start_raw["north"])))
    else:
        start = _geo(start_raw, f"{path}.start", lines)

    params_cfg = data.get("params", {}) or {}
    try:
        params = VehicleParams(**{k: float(v) for k, v in params_cfg.items()})
    except (TypeError, ValueError) as e:
        raise ScenarioError(f"{path}.params", str(e), lines.get(f"{path}.params")) from None

    gains_cfg = data.get("gains", {}) or {}
    try:
        gains = PidGains(**{k: float(v) for k, v in gains_cfg.items()})
    except (TypeError, ValueError) as e:
        raise ScenarioError(f"{path}.gains", str(e), lines.get(f"{path}.gains")) from None

    servo_cfg = data.get("servo", {}) or {}
    mission = None
    if "mission" in data and data["mission"] is not None:
        mcfg = data["mission"]
        if isinstance(mcfg, str):
            mission = load_mission_file(base_dir / mcfg)
        else:
            mission = mission_from_dict(mcfg, sys_id, f"{path}.mission", lines)

    sensors_cfg = data.get("sensors", {}) or {}
    sensors = SensorsConfig(
        depth=bool(sensors_cfg.get("depth", True)),
        wind=bool(sensors_cfg.get("wind", True)),
        current=bool(sensors_cfg.get("current", True)),
        rate_hz=float(sensors_cfg.get("rate_hz", 2.0)),
        depth_noise_sd=float(sensors_cfg.get("depth_noise_sd", 0.05)),
        vector_noise_sd=float(sensors_cfg.get("vector_noise_sd", 0.1)),
    )

    mode_name = str(data.get("mode", "MANUAL_RC"))
    try:
        mode = Mode[mode_name]
    except KeyError:
        raise ScenarioError(f"{path}.mode", f"unknown mode {mode_name!r}",
                            lines.get(f"{path}.mode")) from None

    bands = DEFAULT_MODE_BANDS
    if "mode_bands" in data:
        rows = data["mode_bands"]
        try:
            bands = tuple((float(lo), float(hi), Mode[name]) for lo, hi, name in rows)
        except (KeyError, TypeError, ValueError) as e:
            raise ScenarioError(f"{path}.mode_bands",
                                f"expected [lo_us, hi_us, MODE] rows: {e}",
                                lines.get(f"{path}.mode_bands")) from None
    rc_mode_us = next((lo + (hi - lo) / 2 for lo, hi, m in bands if m is mode), 1100.0) \
        if mode is not Mode.MANUAL_ONBOARD else 1100.0

    return VehicleSpec(
        sys_id=sys_id,
        start=start,
        heading=_num(data.get("heading", 0.0), f"{path}.heading", lines),
        fuel=float(data["fuel"]) if "fuel" in data else None,
        params=params,
        gains=gains,
        steering_cal=_servo(servo_cfg.get("steering"), f"{path}.servo.steering", lines),
        throttle_cal=_servo(servo_cfg.get("throttle"), f"{path}.servo.throttle", lines),
        mission=mission,
        sensors=sensors,
        rc_mode_us=rc_mode_us,
        hw_manual=mode is Mode.MANUAL_ONBOARD,
        mode_bands=bands,
    )


def scenario_from_dict(data: dict, base_dir: Path = Path("."), lines: dict | None = None) -> Scenario:
    lines = lines or {}
    if not isinstance(data, dict):
        raise ScenarioError("", "scenario document must be a mapping")
    origin = _geo(_req(data, "origin", "", lines), "origin", lines)

    link_cfg = data.get("link", {}) or {}
    try:
        link = LinkModel(
            max_range=float(link_cfg.get("max_range", 2800.0)),
            base_loss=float(link_cfg.get("base_loss", 0.0)),
            latency=float(link_cfg.get("latency", 0.05)),
            seed=int(link_cfg.get("seed", 0)),
        )
    except ValueError as e:
        raise ScenarioError("link", str(e), lines.get("link")) from None

    vehicles_raw = data.get("vehicles", [])
    if not isinstance(vehicles_raw, list):
        raise ScenarioError("vehicles", "expected a list", lines.get("vehicles"))
    vehicles = [_vehicle(v, i, origin, base_dir, lines) for i, v in enumerate(vehicles_raw)]
    ids = [v.sys_id for v in vehicles]
    if len(set(ids)) != len(ids):
        raise ScenarioError("vehicles", f"duplicate sys_id in {ids}", lines.get("vehicles"))

    events = []
    for i, ev in enumerate(data.get("events", []) or []):
        p = f"events[{i}]"
        action = str(_req(ev, "action", p, lines))
        if action not in EVENT_ACTIONS:
            raise ScenarioError(f"{p}.action", f"unknown action {action!r}", lines.get(f"{p}.action"))
        events.append(
            ScenarioEvent(
                t=_num(_req(ev, "t", p, lines), f"{p}.t", lines, lo=0.0),
                action=action,
                sys_id=int(ev["sys_id"]) if "sys_id" in ev else None,
                args={k: v for k, v in ev.items() if k not in ("t", "action", "sys_id")},
            )
        )
    events.sort(key=lambda e: e.t)

    scenario = Scenario(
        name=str(data.get("name", "scenario")),
        seed=int(data.get("seed", 0)),
        port=int(data.get("port", 8400)),
        origin=origin,
        dt=_num(data.get("dt", 0.05), "dt", lines, lo=1e-4, hi=0.1),
        duration=_num(data.get("duration", 60.0), "duration", lines, lo=0.0),
        time_scale=_num(data.get("time_scale", 0.0), "time_scale", lines, lo=0.0),
        environment=_environment(data.get("environment", {}) or {}, origin, "environment", lines),
        link=link,
        gcs_pos=_geo(data["gcs"], "gcs", lines) if "gcs" in data else None,
        telemetry_hz=_num(data.get("telemetry_hz", 2.0), "telemetry_hz", lines, lo=0.1),
        vehicles=vehicles,
        events=events,
    )

    survey = data.get("survey")
    if survey:
        _apply_survey(scenario, survey, lines)
    return scenario


def _apply_survey(scenario: Scenario, survey: dict, lines: dict) -> None:
    """Plan coverage missions for the fleet from a survey polygon."""
    from .coverage import SurveyArea, plan

    poly_raw = _req(survey, "polygon", "survey", lines)
    pts = [geo_to_local(scenario.origin, _geo(p, f"survey.polygon[{i}]", lines))
           for i, p in enumerate(poly_raw)]
    if len(pts) > 1 and pts[0].distance_to(pts[-1]) < 1e-6:
        pts.pop()
    area = SurveyArea(
        tuple(pts),
        swath=float(survey.get("swath", 10.0)),
        transect_heading=float(survey.get("heading", 0.0)),
    )
    r_min = float(survey.get("r_min", 5.0))
    speed = float(survey.get("speed", 3.0))
    entries = [geo_to_local(scenario.origin, v.start) for v in scenario.vehicles]
    result = plan(area, k=len(scenario.vehicles), r_min=r_min, entries=entries)
    missions = result.to_missions(scenario.origin, speed)
    for v, m in zip(scenario.vehicles, missions):
        v.mission = Mission(v.sys_id, m.waypoints, m.home)


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate a scenario YAML file."""
    p = Path(path)
    try:
        data = yaml.safe_load(p.read_text())
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ScenarioError("", f"invalid YAML: {e}", mark.line + 1 if mark else None) from None
    return scenario_from_dict(data, base_dir=p.parent, lines=_index_lines(p))
