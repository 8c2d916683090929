"""Binary telemetry/command frame codec.

Wire format (everything little-endian, layouts frozen — the browser UI
decodes these bytes directly):

    offset  size  field
    0       1     magic 0xA5
    1       1     payload length N (0..255)
    2       1     seq (wraps mod 256)
    3       1     sys_id (vehicle id; 0 = ground station)
    4       1     msg_id
    5       N     payload
    5+N     2     CRC-16/CCITT-FALSE over bytes 1..5+N-1 (length through
                  payload inclusive), little-endian

Payload layouts per msg_id are given next to each message class. The full
byte-exact table is also in docs/FORMATS.md.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

from .geo import GeoPoint
from .vehicle import EngineStatus

MAGIC = 0xA5
HEADER_LEN = 5
FRAME_OVERHEAD = 7  # header + crc
MAX_PAYLOAD = 255


class Mode(enum.IntEnum):
    """Operating modes; values are the wire codes."""

    MANUAL_ONBOARD = 0
    MANUAL_RC = 1
    AUTO_WP_OFFBOARD = 2
    AUTO_WP_ONBOARD = 3
    VELOCITY_CONTROL = 4


class SensorKind(enum.IntEnum):
    DEPTH = 0
    WIND = 1
    CURRENT = 2


class AckStatus(enum.IntEnum):
    ACCEPTED = 0
    FAILED = 1


class ProtocolError(Exception):
    """Base for all decode failures; decoding never raises anything else."""


class BadMagic(ProtocolError):
    pass


class Truncated(ProtocolError):
    """Frame shorter than declared, or buffer length inconsistent with the
    length byte."""


class CrcMismatch(ProtocolError):
    pass


class UnknownMsg(ProtocolError):
    pass


class MalformedPayload(ProtocolError):
    """CRC-valid frame whose payload fails field-level validation."""


def crc16(data: bytes) -> int:
    """CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection."""
    crc = 0xFFFF
    for b in data:
        crc ^= b << 8
        for _ in range(8):
            if crc & 0x8000:
                crc = ((crc << 1) ^ 0x1021) & 0xFFFF
            else:
                crc = (crc << 1) & 0xFFFF
    return crc


# Table-driven variant used on the hot path.
_CRC_TABLE = []
for _byte in range(256):
    _c = _byte << 8
    for _ in range(8):
        _c = ((_c << 1) ^ 0x1021) & 0xFFFF if _c & 0x8000 else (_c << 1) & 0xFFFF
    _CRC_TABLE.append(_c)


def _crc16_fast(data: bytes) -> int:
    crc = 0xFFFF
    for b in data:
        crc = ((crc << 8) & 0xFFFF) ^ _CRC_TABLE[((crc >> 8) ^ b) & 0xFF]
    return crc


@dataclass(frozen=True)
class Heartbeat:
    """msg_id 0, payload '<BBB': mode, engine, armed."""

    mode: Mode
    engine: EngineStatus
    armed: bool


@dataclass(frozen=True)
class Telemetry:
    """msg_id 1, payload '<ddfffffd': lat, lon, psi, v_water,
    v_ground_east, v_ground_north, fuel, t."""

    geo: GeoPoint
    psi: float
    v_water: float
    v_ground_east: float
    v_ground_north: float
    fuel: float
    t: float


@dataclass(frozen=True)
class SetMode:
    """msg_id 2, payload '<B': mode."""

    mode: Mode


@dataclass(frozen=True)
class Kill:
    """msg_id 3, empty payload."""


@dataclass(frozen=True)
class MissionCount:
    """msg_id 4, payload '<HI': item count, mission id."""

    n: int
    mission_id: int


@dataclass(frozen=True)
class MissionItem:
    """msg_id 5, payload '<Hddf': index, lat, lon, speed."""

    index: int
    lat: float
    lon: float
    speed: float


@dataclass(frozen=True)
class MissionAck:
    """msg_id 6, payload '<IB': mission id, status."""

    mission_id: int
    status: AckStatus


@dataclass(frozen=True)
class MissionRequest:
    """msg_id 7, payload '<H': missing item index."""

    index: int


@dataclass(frozen=True)
class VelocitySetpoint:
    """msg_id 8, payload '<ff': steering fraction, speed m/s."""

    steering: float
    speed: float


@dataclass(frozen=True)
class SensorReport:
    """msg_id 9, payload '<BB' + count * '<f': kind, count, values."""

    kind: SensorKind
    values: tuple[float, ...]


Message = (
    Heartbeat
    | Telemetry
    | SetMode
    | Kill
    | MissionCount
    | MissionItem
    | MissionAck
    | MissionRequest
    | VelocitySetpoint
    | SensorReport
)


def _f32(x: float) -> float:
    """Round-trip a float through 32-bit precision (what the wire carries)."""
    return struct.unpack("<f", struct.pack("<f", x))[0]


def _pack_heartbeat(m: Heartbeat) -> bytes:
    return struct.pack("<BBB", int(m.mode), int(m.engine), 1 if m.armed else 0)


def _unpack_heartbeat(p: bytes) -> Heartbeat:
    mode, engine, armed = struct.unpack("<BBB", p)
    return Heartbeat(Mode(mode), EngineStatus(engine), bool(armed))


def _pack_telemetry(m: Telemetry) -> bytes:
    return struct.pack(
        "<ddfffffd",
        m.geo.lat,
        m.geo.lon,
        m.psi,
        m.v_water,
        m.v_ground_east,
        m.v_ground_north,
        m.fuel,
        m.t,
    )


def _unpack_telemetry(p: bytes) -> Telemetry:
    lat, lon, psi, v_water, vge, vgn, fuel, t = struct.unpack("<ddfffffd", p)
    return Telemetry(GeoPoint(lat, lon), psi, v_water, vge, vgn, fuel, t)


def _pack_sensor_report(m: SensorReport) -> bytes:
    if len(m.values) > 60:
        raise ValueError("sensor report limited to 60 values")
    return struct.pack("<BB", int(m.kind), len(m.values)) + struct.pack(
        f"<{len(m.values)}f", *m.values
    )


def _unpack_sensor_report(p: bytes) -> SensorReport:
    kind, count = struct.unpack("<BB", p[:2])
    values = struct.unpack(f"<{count}f", p[2:])
    return SensorReport(SensorKind(kind), tuple(values))


_CODECS: dict[int, tuple[type, object, object]] = {
    0: (Heartbeat, _pack_heartbeat, _unpack_heartbeat),
    1: (Telemetry, _pack_telemetry, _unpack_telemetry),
    2: (
        SetMode,
        lambda m: struct.pack("<B", int(m.mode)),
        lambda p: SetMode(Mode(struct.unpack("<B", p)[0])),
    ),
    3: (Kill, lambda m: b"", lambda p: _unpack_kill(p)),
    4: (
        MissionCount,
        lambda m: struct.pack("<HI", m.n, m.mission_id),
        lambda p: MissionCount(*struct.unpack("<HI", p)),
    ),
    5: (
        MissionItem,
        lambda m: struct.pack("<Hddf", m.index, m.lat, m.lon, m.speed),
        lambda p: MissionItem(*struct.unpack("<Hddf", p)),
    ),
    6: (
        MissionAck,
        lambda m: struct.pack("<IB", m.mission_id, int(m.status)),
        lambda p: MissionAck(struct.unpack("<IB", p)[0], AckStatus(struct.unpack("<IB", p)[1])),
    ),
    7: (
        MissionRequest,
        lambda m: struct.pack("<H", m.index),
        lambda p: MissionRequest(*struct.unpack("<H", p)),
    ),
    8: (
        VelocitySetpoint,
        lambda m: struct.pack("<ff", m.steering, m.speed),
        lambda p: VelocitySetpoint(*struct.unpack("<ff", p)),
    ),
    9: (SensorReport, _pack_sensor_report, _unpack_sensor_report),
}

_MSG_ID = {cls: msg_id for msg_id, (cls, _, _) in _CODECS.items()}


def _unpack_kill(p: bytes) -> Kill:
    if p:
        raise ValueError("kill carries no payload")
    return Kill()


@dataclass(frozen=True)
class DecodedFrame:
    seq: int
    sys_id: int
    message: Message


def encode(message: Message, seq: int, sys_id: int) -> bytes:
    """Frame a message. ``seq`` wraps mod 256."""
    msg_id = _MSG_ID[type(message)]
    payload = _CODECS[msg_id][1](message)
    if len(payload) > MAX_PAYLOAD:
        raise ValueError("payload exceeds 255 bytes")
    body = struct.pack("<BBBB", len(payload), seq & 0xFF, sys_id & 0xFF, msg_id) + payload
    return bytes([MAGIC]) + body + struct.pack("<H", _crc16_fast(body))


def decode(buf: bytes) -> DecodedFrame:
    """Decode exactly one frame; the buffer must contain the whole frame and
    nothing else. Raises a :class:`ProtocolError` subclass otherwise."""
    if len(buf) < 1 or buf[0] != MAGIC:
        raise BadMagic(f"expected magic 0x{MAGIC:02X}")
    if len(buf) < FRAME_OVERHEAD:
        raise Truncated(f"frame needs at least {FRAME_OVERHEAD} bytes, got {len(buf)}")
    length = buf[1]
    total = length + FRAME_OVERHEAD
    if len(buf) < total:
        raise Truncated(f"declared {total} bytes, got {len(buf)}")
    if len(buf) > total:
        raise Truncated(f"length mismatch: declared {total} bytes, buffer has {len(buf)}")
    body = buf[1 : HEADER_LEN + length]
    (crc,) = struct.unpack("<H", buf[HEADER_LEN + length : total])
    if _crc16_fast(body) != crc:
        raise CrcMismatch(f"crc 0x{crc:04X} != computed 0x{_crc16_fast(body):04X}")
    seq, sys_id, msg_id = buf[2], buf[3], buf[4]
    if msg_id not in _CODECS:
        raise UnknownMsg(f"msg_id {msg_id}")
    payload = buf[HEADER_LEN:HEADER_LEN + length]
    try:
        message = _CODECS[msg_id][2](payload)
    except (struct.error, ValueError) as e:
        raise MalformedPayload(str(e)) from None
    return DecodedFrame(seq, sys_id, message)


class FrameDecoder:
    """Incremental stream decoder with resynchronization.

    Feed arbitrary byte chunks; complete valid frames come out in order.
    Garbage (bad magic, failed CRC) is skipped one byte at a time until the
    next plausible frame boundary, so a corrupted frame never poisons the
    rest of the stream.
    """

    def __init__(self) -> None:
        self._buf = bytearray()
        self.bad_bytes = 0

    def feed(self, data: bytes) -> list[DecodedFrame]:
        self._buf.extend(data)
        out: list[DecodedFrame] = []
        buf = self._buf
        n = len(buf)
        pos = 0
        while True:
            i = buf.find(MAGIC, pos)
            if i < 0:
                self.bad_bytes += n - pos
                pos = n
                break
            self.bad_bytes += i - pos
            pos = i
            if n - pos < FRAME_OVERHEAD:
                break
            total = buf[pos + 1] + FRAME_OVERHEAD
            if n - pos < total:
                break
            try:
                out.append(decode(bytes(buf[pos : pos + total])))
                pos += total
            except ProtocolError:
                self.bad_bytes += 1
                pos += 1
        del buf[:pos]
        return out
