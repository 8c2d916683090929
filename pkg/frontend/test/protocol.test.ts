import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { crc16, decodeFrame, FrameStream, ProtocolError, StreamChunker } from "../src/protocol.js";

const fixtures = JSON.parse(
  readFileSync(fileURLToPath(new URL("./fixtures.json", import.meta.url)), "utf8"),
) as {
  frames: { name: string; hex: string; seq: number; sysId: number; expected: Record<string, unknown> }[];
};

function fromHex(hex: string): Uint8Array {
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) out[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  return out;
}

describe("crc16", () => {
  it("matches the CCITT-FALSE check value", () => {
    const bytes = new TextEncoder().encode("123456789");
    expect(crc16(bytes)).toBe(0x29b1);
  });
});

describe("decodeFrame against python-encoded fixtures", () => {
  for (const fx of fixtures.frames) {
    it(`decodes ${fx.name} (${fx.hex.slice(0, 16)}…)`, () => {
      const frame = decodeFrame(fromHex(fx.hex));
      expect(frame.seq).toBe(fx.seq);
      expect(frame.sysId).toBe(fx.sysId);
      for (const [key, value] of Object.entries(fx.expected)) {
        const got = (frame.message as unknown as Record<string, unknown>)[key];
        if (typeof value === "number" && !Number.isInteger(value)) {
          expect(got as number).toBeCloseTo(value, 9);
        } else if (Array.isArray(value)) {
          expect(got as number[]).toHaveLength(value.length);
          (value as number[]).forEach((v, i) => expect((got as number[])[i]).toBeCloseTo(v, 4));
        } else {
          expect(got).toBe(value);
        }
      }
    });
  }

  it("rejects bad magic", () => {
    const frame = fromHex(fixtures.frames[0].hex);
    frame[0] = 0x00;
    expect(() => decodeFrame(frame)).toThrow(ProtocolError);
  });

  it("rejects every single-bit flip", () => {
    const base = fromHex(fixtures.frames[2].hex); // telemetry
    for (let i = 0; i < base.length; i++) {
      for (let bit = 0; bit < 8; bit++) {
        const mutated = base.slice();
        mutated[i] ^= 1 << bit;
        expect(() => decodeFrame(mutated)).toThrow(ProtocolError);
      }
    }
  });

  it("rejects truncation and trailing bytes", () => {
    const base = fromHex(fixtures.frames[0].hex);
    expect(() => decodeFrame(base.slice(0, base.length - 1))).toThrow(ProtocolError);
    const extended = new Uint8Array(base.length + 1);
    extended.set(base);
    expect(() => decodeFrame(extended)).toThrow(ProtocolError);
  });
});

describe("StreamChunker", () => {
  function record(payload: Uint8Array): Uint8Array {
    const out = new Uint8Array(4 + payload.length);
    new DataView(out.buffer).setUint32(0, payload.length, true);
    out.set(payload, 4);
    return out;
  }

  it("reassembles records across ragged chunk boundaries", () => {
    const frames = fixtures.frames.map((f) => fromHex(f.hex));
    const stream = new Uint8Array(
      frames.reduce((n, f) => n + 4 + f.length, 0),
    );
    let pos = 0;
    for (const f of frames) {
      stream.set(record(f), pos);
      pos += 4 + f.length;
    }
    for (const chunkSize of [1, 3, 7, 16, 1000]) {
      const chunker = new StreamChunker();
      const out: Uint8Array[] = [];
      for (let i = 0; i < stream.length; i += chunkSize) {
        out.push(...chunker.push(stream.slice(i, i + chunkSize)));
      }
      expect(out).toHaveLength(frames.length);
      out.forEach((payload, i) => expect(Array.from(payload)).toEqual(Array.from(frames[i])));
    }
  });

  it("FrameStream decodes and counts corrupt frames without throwing", () => {
    const good = fromHex(fixtures.frames[0].hex);
    const bad = good.slice();
    bad[6] ^= 0xff;
    const fs = new FrameStream();
    const frames = [
      ...fs.push(record(good)),
      ...fs.push(record(bad)),
      ...fs.push(record(good)),
    ];
    expect(frames).toHaveLength(2);
    expect(fs.badFrames).toBe(1);
  });
});
