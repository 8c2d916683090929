// Binary telemetry frame codec — browser-side twin of the server's wire
// format (see docs/FORMATS.md in the repo root). Layouts are frozen; the
// fixture test decodes frames produced by the Python encoder byte for byte.

export const MAGIC = 0xa5;
export const FRAME_OVERHEAD = 7;

export enum Mode {
  MANUAL_ONBOARD = 0,
  MANUAL_RC = 1,
  AUTO_WP_OFFBOARD = 2,
  AUTO_WP_ONBOARD = 3,
  VELOCITY_CONTROL = 4,
}

export enum EngineStatus {
  RUNNING = 0,
  KILLED = 1,
  FUEL_EXHAUSTED = 2,
}

export enum SensorKind {
  DEPTH = 0,
  WIND = 1,
  CURRENT = 2,
}

export enum AckStatus {
  ACCEPTED = 0,
  FAILED = 1,
}

export interface Heartbeat {
  kind: "heartbeat";
  mode: Mode;
  engine: EngineStatus;
  armed: boolean;
}

export interface Telemetry {
  kind: "telemetry";
  lat: number;
  lon: number;
  psi: number;
  vWater: number;
  vGroundEast: number;
  vGroundNorth: number;
  fuel: number;
  t: number;
}

export interface SetMode {
  kind: "set_mode";
  mode: Mode;
}

export interface KillMsg {
  kind: "kill";
}

export interface MissionCount {
  kind: "mission_count";
  n: number;
  missionId: number;
}

export interface MissionItem {
  kind: "mission_item";
  index: number;
  lat: number;
  lon: number;
  speed: number;
}

export interface MissionAck {
  kind: "mission_ack";
  missionId: number;
  status: AckStatus;
}

export interface MissionRequest {
  kind: "mission_request";
  index: number;
}

export interface VelocitySetpoint {
  kind: "velocity_setpoint";
  steering: number;
  speed: number;
}

export interface SensorReport {
  kind: "sensor_report";
  sensor: SensorKind;
  values: number[];
}

export type Message =
  | Heartbeat
  | Telemetry
  | SetMode
  | KillMsg
  | MissionCount
  | MissionItem
  | MissionAck
  | MissionRequest
  | VelocitySetpoint
  | SensorReport;

export interface DecodedFrame {
  seq: number;
  sysId: number;
  message: Message;
}

export class ProtocolError extends Error {
  constructor(public code: string, message: string) {
    super(message);
  }
}

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection.
const CRC_TABLE = new Uint16Array(256);
for (let byte = 0; byte < 256; byte++) {
  let c = byte << 8;
  for (let i = 0; i < 8; i++) {
    c = c & 0x8000 ? ((c << 1) ^ 0x1021) & 0xffff : (c << 1) & 0xffff;
  }
  CRC_TABLE[byte] = c;
}

export function crc16(bytes: Uint8Array, start = 0, end = bytes.length): number {
  let crc = 0xffff;
  for (let i = start; i < end; i++) {
    crc = ((crc << 8) & 0xffff) ^ CRC_TABLE[((crc >> 8) ^ bytes[i]) & 0xff];
  }
  return crc;
}

function enumValue<T extends Record<string, unknown>>(
  table: T,
  raw: number,
  what: string,
): number {
  if (!(raw in table)) {
    throw new ProtocolError("malformed", `bad ${what} value ${raw}`);
  }
  return raw;
}

export function decodeFrame(buf: Uint8Array): DecodedFrame {
  if (buf.length < 1 || buf[0] !== MAGIC) {
    throw new ProtocolError("bad_magic", "frame does not start with 0xA5");
  }
  if (buf.length < FRAME_OVERHEAD) {
    throw new ProtocolError("truncated", `frame of ${buf.length} bytes`);
  }
  const length = buf[1];
  const total = length + FRAME_OVERHEAD;
  if (buf.length !== total) {
    throw new ProtocolError("truncated", `declared ${total}, got ${buf.length}`);
  }
  const view = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  const wireCrc = view.getUint16(5 + length, true);
  const computed = crc16(buf, 1, 5 + length);
  if (wireCrc !== computed) {
    throw new ProtocolError("crc", `crc ${wireCrc} != ${computed}`);
  }
  const seq = buf[2];
  const sysId = buf[3];
  const msgId = buf[4];
  const p = new DataView(buf.buffer, buf.byteOffset + 5, length);

  const need = (n: number) => {
    if (length !== n) throw new ProtocolError("malformed", `payload ${length} != ${n}`);
  };

  let message: Message;
  switch (msgId) {
    case 0:
      need(3);
      message = {
        kind: "heartbeat",
        mode: enumValue(Mode, p.getUint8(0), "mode"),
        engine: enumValue(EngineStatus, p.getUint8(1), "engine"),
        armed: p.getUint8(2) !== 0,
      };
      break;
    case 1:
      need(44);
      message = {
        kind: "telemetry",
        lat: p.getFloat64(0, true),
        lon: p.getFloat64(8, true),
        psi: p.getFloat32(16, true),
        vWater: p.getFloat32(20, true),
        vGroundEast: p.getFloat32(24, true),
        vGroundNorth: p.getFloat32(28, true),
        fuel: p.getFloat32(32, true),
        t: p.getFloat64(36, true),
      };
      break;
    case 2:
      need(1);
      message = { kind: "set_mode", mode: enumValue(Mode, p.getUint8(0), "mode") };
      break;
    case 3:
      need(0);
      message = { kind: "kill" };
      break;
    case 4:
      need(6);
      message = {
        kind: "mission_count",
        n: p.getUint16(0, true),
        missionId: p.getUint32(2, true),
      };
      break;
    case 5:
      need(22);
      message = {
        kind: "mission_item",
        index: p.getUint16(0, true),
        lat: p.getFloat64(2, true),
        lon: p.getFloat64(10, true),
        speed: p.getFloat32(18, true),
      };
      break;
    case 6:
      need(5);
      message = {
        kind: "mission_ack",
        missionId: p.getUint32(0, true),
        status: enumValue(AckStatus, p.getUint8(4), "ack status"),
      };
      break;
    case 7:
      need(2);
      message = { kind: "mission_request", index: p.getUint16(0, true) };
      break;
    case 8:
      need(8);
      message = {
        kind: "velocity_setpoint",
        steering: p.getFloat32(0, true),
        speed: p.getFloat32(4, true),
      };
      break;
    case 9: {
      if (length < 2) throw new ProtocolError("malformed", "sensor report too short");
      const sensor = enumValue(SensorKind, p.getUint8(0), "sensor kind");
      const count = p.getUint8(1);
      if (length !== 2 + 4 * count) {
        throw new ProtocolError("malformed", `sensor report count ${count} vs length ${length}`);
      }
      const values: number[] = [];
      for (let i = 0; i < count; i++) values.push(p.getFloat32(2 + 4 * i, true));
      message = { kind: "sensor_report", sensor, values };
      break;
    }
    default:
      throw new ProtocolError("unknown_msg", `msg_id ${msgId}`);
  }
  return { seq, sysId, message };
}

/**
 * Splits the GCS stream — [u32 LE length][frame bytes] records — back into
 * frame payloads across arbitrary chunk boundaries.
 */
export class StreamChunker {
  private buf = new Uint8Array(0);

  push(chunk: Uint8Array): Uint8Array[] {
    const merged = new Uint8Array(this.buf.length + chunk.length);
    merged.set(this.buf, 0);
    merged.set(chunk, this.buf.length);
    const out: Uint8Array[] = [];
    let pos = 0;
    const view = new DataView(merged.buffer);
    while (merged.length - pos >= 4) {
      const n = view.getUint32(pos, true);
      if (merged.length - pos - 4 < n) break;
      out.push(merged.slice(pos + 4, pos + 4 + n));
      pos += 4 + n;
    }
    this.buf = merged.slice(pos);
    return out;
  }
}

/** Chunker + decoder; malformed frames are counted, never thrown. */
export class FrameStream {
  private chunker = new StreamChunker();
  badFrames = 0;

  push(chunk: Uint8Array): DecodedFrame[] {
    const frames: DecodedFrame[] = [];
    for (const raw of this.chunker.push(chunk)) {
      try {
        frames.push(decodeFrame(raw));
      } catch {
        this.badFrames += 1;
      }
    }
    return frames;
  }
}
