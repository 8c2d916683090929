// Single-writer UI state fed by the binary stream. Nothing here is
// authoritative: dropping the whole store and reconnecting rebuilds the
// identical picture from the server, which is what makes refresh safe.

import {
  DecodedFrame,
  EngineStatus,
  Mode,
  SensorKind,
} from "./protocol.js";

export interface TrackPoint {
  lat: number;
  lon: number;
  psi: number;
  t: number;
}

export interface FieldVector {
  east: number;   // sample position, scenario-local meters
  north: number;
  vEast: number;  // world-frame vector
  vNorth: number;
}

export class RingBuffer<T> {
  private items: T[] = [];
  constructor(public limit: number) {}

  push(item: T): void {
    this.items.push(item);
    if (this.items.length > this.limit) {
      this.items.splice(0, this.items.length - this.limit);
    }
  }

  get length(): number {
    return this.items.length;
  }

  toArray(): readonly T[] {
    return this.items;
  }

  last(): T | undefined {
    return this.items[this.items.length - 1];
  }
}

export interface UiVehicle {
  sysId: number;
  mode: Mode | null;
  engine: EngineStatus | null;
  armed: boolean | null;
  lastHeartbeatWall: number | null;  // wall-clock ms of last heartbeat frame
  lastTelemetry: {
    lat: number;
    lon: number;
    psi: number;
    vWater: number;
    fuel: number;
    t: number;
  } | null;
  track: RingBuffer<TrackPoint>;
  depths: RingBuffer<FieldVector & { depth: number }>;
}

export type LinkBadge = "connected" | "degraded" | "lost";

export class FleetStore {
  vehicles = new Map<number, UiVehicle>();
  wind = new RingBuffer<FieldVector>(400);
  current = new RingBuffer<FieldVector>(400);
  heartbeatPeriodMs = 1000;
  framesSeen = 0;
  private listeners: (() => void)[] = [];

  constructor(public trackLimit = 10_000) {}

  onChange(fn: () => void): void {
    this.listeners.push(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  private vehicle(sysId: number): UiVehicle {
    let v = this.vehicles.get(sysId);
    if (!v) {
      v = {
        sysId,
        mode: null,
        engine: null,
        armed: null,
        lastHeartbeatWall: null,
        lastTelemetry: null,
        track: new RingBuffer<TrackPoint>(this.trackLimit),
        depths: new RingBuffer(2000),
      };
      this.vehicles.set(sysId, v);
    }
    return v;
  }

  applyFrame(frame: DecodedFrame, nowMs: number = Date.now()): void {
    this.framesSeen += 1;
    const v = this.vehicle(frame.sysId);
    const m = frame.message;
    switch (m.kind) {
      case "heartbeat":
        v.mode = m.mode;
        v.engine = m.engine;
        v.armed = m.armed;
        v.lastHeartbeatWall = nowMs;
        break;
      case "telemetry":
        v.lastTelemetry = {
          lat: m.lat,
          lon: m.lon,
          psi: m.psi,
          vWater: m.vWater,
          fuel: m.fuel,
          t: m.t,
        };
        v.track.push({ lat: m.lat, lon: m.lon, psi: m.psi, t: m.t });
        break;
      case "sensor_report":
        if (m.sensor === SensorKind.DEPTH && m.values.length >= 3) {
          v.depths.push({
            depth: m.values[0],
            east: m.values[1],
            north: m.values[2],
            vEast: 0,
            vNorth: 0,
          });
        } else if (m.values.length >= 4) {
          const vec: FieldVector = {
            vEast: m.values[0],
            vNorth: m.values[1],
            east: m.values[2],
            north: m.values[3],
          };
          (m.sensor === SensorKind.WIND ? this.wind : this.current).push(vec);
        }
        break;
      default:
        break; // command traffic is server->vehicle; nothing to display
    }
    this.notify();
  }

  linkBadge(sysId: number, nowMs: number = Date.now()): LinkBadge {
    const v = this.vehicles.get(sysId);
    if (!v || v.lastHeartbeatWall === null) return "lost";
    const age = nowMs - v.lastHeartbeatWall;
    if (age >= 3 * this.heartbeatPeriodMs) return "lost";
    if (age > 1.5 * this.heartbeatPeriodMs) return "degraded";
    return "connected";
  }

  liveTrackCount(minPoints = 2): number {
    let n = 0;
    for (const v of this.vehicles.values()) {
      if (v.track.length >= minPoints) n += 1;
    }
    return n;
  }
}
