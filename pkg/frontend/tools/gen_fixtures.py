"""Regenerate test/fixtures.json from the Python encoder.

Run from frontend/: python3 tools/gen_fixtures.py
The browser decoder must reproduce these frames field for field; the
fixture file is committed so the TS tests run without Python.
"""

import json
import pathlib
import struct

from asvsim.geo import GeoPoint
from asvsim.protocol import (
    AckStatus,
    Heartbeat,
    Kill,
    MissionAck,
    MissionCount,
    MissionItem,
    MissionRequest,
    Mode,
    SensorKind,
    SensorReport,
    SetMode,
    Telemetry,
    VelocitySetpoint,
    encode,
)
from asvsim.vehicle import EngineStatus


def f32(x: float) -> float:
    return struct.unpack("<f", struct.pack("<f", x))[0]


CASES = [
    (
        Heartbeat(Mode.AUTO_WP_ONBOARD, EngineStatus.RUNNING, True),
        7,
        2,
        {"kind": "heartbeat", "mode": 3, "engine": 0, "armed": True},
    ),
    (
        Heartbeat(Mode.MANUAL_ONBOARD, EngineStatus.KILLED, False),
        255,
        1,
        {"kind": "heartbeat", "mode": 0, "engine": 1, "armed": False},
    ),
    (
        Telemetry(GeoPoint(34.001234, -81.004321), f32(1.25), f32(4.5), f32(0.75),
                  f32(-2.5), f32(7.125), 1234.5),
        12,
        3,
        {
            "kind": "telemetry",
            "lat": 34.001234,
            "lon": -81.004321,
            "psi": f32(1.25),
            "vWater": f32(4.5),
            "vGroundEast": f32(0.75),
            "vGroundNorth": f32(-2.5),
            "fuel": f32(7.125),
            "t": 1234.5,
        },
    ),
    (SetMode(Mode.VELOCITY_CONTROL), 0, 1, {"kind": "set_mode", "mode": 4}),
    (Kill(), 3, 4, {"kind": "kill"}),
    (MissionCount(12, 3_000_000_001), 9, 1,
     {"kind": "mission_count", "n": 12, "missionId": 3_000_000_001}),
    (
        MissionItem(5, 34.5, -80.25, f32(3.5)),
        1,
        2,
        {"kind": "mission_item", "index": 5, "lat": 34.5, "lon": -80.25, "speed": f32(3.5)},
    ),
    (MissionAck(77, AckStatus.FAILED), 8, 1,
     {"kind": "mission_ack", "missionId": 77, "status": 1}),
    (MissionRequest(513), 2, 1, {"kind": "mission_request", "index": 513}),
    (
        VelocitySetpoint(f32(-0.5), f32(2.25)),
        4,
        2,
        {"kind": "velocity_setpoint", "steering": f32(-0.5), "speed": f32(2.25)},
    ),
    (
        SensorReport(SensorKind.WIND, (f32(1.5), f32(-0.25), f32(120.0), f32(45.5))),
        6,
        3,
        {"kind": "sensor_report", "sensor": 1, "values": [f32(1.5), f32(-0.25), 120.0, 45.5]},
    ),
    (SensorReport(SensorKind.DEPTH, ()), 0, 1,
     {"kind": "sensor_report", "sensor": 0, "values": []}),
]


def main() -> None:
    fixtures = []
    for message, seq, sys_id, expected in CASES:
        frame = encode(message, seq, sys_id)
        fixtures.append(
            {
                "name": type(message).__name__,
                "hex": frame.hex(),
                "seq": seq,
                "sysId": sys_id,
                "expected": expected,
            }
        )
    out = pathlib.Path(__file__).parent.parent / "test" / "fixtures.json"
    out.parent.mkdir(exist_ok=True)
    out.write_text(json.dumps({"frames": fixtures}, indent=2) + "\n")
    print(f"wrote {out} ({len(fixtures)} frames)")


if __name__ == "__main__":
    main()
