import { describe, expect, it } from "vitest";
import { DecodedFrame, EngineStatus, Mode, SensorKind } from "../src/protocol.js";
import { FleetStore, RingBuffer } from "../src/store.js";

function telemetry(sysId: number, lat: number, lon: number, t: number): DecodedFrame {
  return {
    seq: 0,
    sysId,
    message: {
      kind: "telemetry",
      lat,
      lon,
      psi: 0.1,
      vWater: 3,
      vGroundEast: 0,
      vGroundNorth: 3,
      fuel: 9,
      t,
    },
  };
}

function heartbeat(sysId: number): DecodedFrame {
  return {
    seq: 0,
    sysId,
    message: { kind: "heartbeat", mode: Mode.AUTO_WP_ONBOARD, engine: EngineStatus.RUNNING, armed: true },
  };
}

describe("RingBuffer", () => {
  it("caps at the limit, keeping the newest", () => {
    const rb = new RingBuffer<number>(5);
    for (let i = 0; i < 12; i++) rb.push(i);
    expect(rb.length).toBe(5);
    expect(rb.toArray()).toEqual([7, 8, 9, 10, 11]);
    expect(rb.last()).toBe(11);
  });
});

describe("FleetStore", () => {
  it("builds four live tracks from a four-vehicle stream", () => {
    const store = new FleetStore();
    for (let step = 0; step < 10; step++) {
      for (let sysId = 1; sysId <= 4; sysId++) {
        store.applyFrame(telemetry(sysId, 34 + step * 1e-5, -81 + sysId * 1e-4, step * 0.5));
      }
    }
    expect(store.vehicles.size).toBe(4);
    expect(store.liveTrackCount()).toBe(4);
    for (const v of store.vehicles.values()) {
      expect(v.track.length).toBe(10);
      expect(v.lastTelemetry).not.toBeNull();
    }
  });

  it("bounds the track history at the configured limit", () => {
    const store = new FleetStore(100);
    for (let i = 0; i < 350; i++) store.applyFrame(telemetry(1, 34, -81, i));
    expect(store.vehicles.get(1)!.track.length).toBe(100);
    expect(store.vehicles.get(1)!.track.last()!.t).toBe(349);
  });

  it("default track limit is ten thousand points", () => {
    expect(new FleetStore().trackLimit).toBe(10_000);
  });

  it("derives link badge from heartbeat age", () => {
    const store = new FleetStore();
    const t0 = 1_000_000;
    store.applyFrame(heartbeat(1), t0);
    expect(store.linkBadge(1, t0 + 500)).toBe("connected");
    expect(store.linkBadge(1, t0 + 2000)).toBe("degraded");
    expect(store.linkBadge(1, t0 + 3500)).toBe("lost");
    expect(store.linkBadge(99, t0)).toBe("lost");
  });

  it("routes wind and current reports into overlay buffers", () => {
    const store = new FleetStore();
    store.applyFrame({
      seq: 0,
      sysId: 1,
      message: { kind: "sensor_report", sensor: SensorKind.WIND, values: [2, 0.5, 10, 20] },
    });
    store.applyFrame({
      seq: 0,
      sysId: 1,
      message: { kind: "sensor_report", sensor: SensorKind.CURRENT, values: [-1, 0, 11, 21] },
    });
    store.applyFrame({
      seq: 0,
      sysId: 1,
      message: { kind: "sensor_report", sensor: SensorKind.DEPTH, values: [5.5, 12, 22] },
    });
    expect(store.wind.length).toBe(1);
    expect(store.wind.last()).toEqual({ vEast: 2, vNorth: 0.5, east: 10, north: 20 });
    expect(store.current.length).toBe(1);
    expect(store.vehicles.get(1)!.depths.last()!.depth).toBe(5.5);
  });

  it("heartbeats update mode and engine", () => {
    const store = new FleetStore();
    store.applyFrame(heartbeat(2));
    const v = store.vehicles.get(2)!;
    expect(v.mode).toBe(Mode.AUTO_WP_ONBOARD);
    expect(v.engine).toBe(EngineStatus.RUNNING);
    expect(v.armed).toBe(true);
  });

  it("rebuilds identically from a replayed frame sequence (refresh-safe)", () => {
    const frames: DecodedFrame[] = [];
    for (let i = 0; i < 25; i++) frames.push(telemetry(1 + (i % 3), 34 + i * 1e-5, -81, i));
    const a = new FleetStore();
    const b = new FleetStore();
    for (const f of frames) a.applyFrame(f, 0);
    for (const f of frames) b.applyFrame(f, 0);
    expect(a.vehicles.size).toBe(b.vehicles.size);
    for (const [sysId, va] of a.vehicles) {
      const vb = b.vehicles.get(sysId)!;
      expect(va.track.toArray()).toEqual(vb.track.toArray());
      expect(va.lastTelemetry).toEqual(vb.lastTelemetry);
    }
  });
});
