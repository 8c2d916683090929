import { describe, expect, it } from "vitest";
import { GcsApi } from "../src/api.js";
import { MissionEditor } from "../src/mission.js";

function apiReturning(status: number, body: unknown): GcsApi {
  const fetchFn = async () =>
    new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  return new GcsApi("", fetchFn);
}

function apiCapturing(calls: { url: string; body: unknown }[], body: unknown): GcsApi {
  const fetchFn = async (url: string, init?: RequestInit) => {
    calls.push({ url, body: init?.body ? JSON.parse(init.body as string) : null });
    return new Response(JSON.stringify(body), { status: 200 });
  };
  return new GcsApi("", fetchFn);
}

describe("MissionEditor editing", () => {
  it("places, drags, re-speeds, and deletes waypoints", () => {
    const ed = new MissionEditor();
    ed.addWaypoint(34.001, -81.001);
    ed.addWaypoint(34.002, -81.001);
    expect(ed.waypoints).toHaveLength(2);
    expect(ed.selected).toBe(1);

    ed.moveWaypoint(0, 34.0015, -81.0005);
    expect(ed.waypoints[0].lat).toBeCloseTo(34.0015);

    ed.setSpeed(1, 4.5);
    expect(ed.waypoints[1].speed).toBe(4.5);
    ed.setSpeed(1, -2); // ignored
    expect(ed.waypoints[1].speed).toBe(4.5);

    ed.removeWaypoint(0);
    expect(ed.waypoints).toHaveLength(1);
  });
});

describe("MissionEditor upload flow", () => {
  it("sends the full list and reports acceptance", async () => {
    const calls: { url: string; body: unknown }[] = [];
    const api = apiCapturing(calls, { mission_id: 9, status: "accepted", activated: true });
    const ed = new MissionEditor();
    ed.addWaypoint(34.001, -81.001);
    ed.addWaypoint(34.002, -81.002);
    const state = await ed.uploadTo(api, 3);
    expect(state.phase).toBe("accepted");
    expect(state.missionId).toBe(9);
    expect(calls[0].url).toBe("/vehicle/3/mission");
    const sent = calls[0].body as { waypoints: unknown[]; activate: boolean };
    expect(sent.waypoints).toHaveLength(2);
    expect(sent.activate).toBe(true);
  });

  it("renders failure visibly distinct from success", async () => {
    const ed = new MissionEditor();
    ed.addWaypoint(34.001, -81.001);

    const ok = apiReturning(200, { mission_id: 1, status: "accepted", activated: true });
    await ed.uploadTo(ok, 1);
    const acceptedBadge = ed.badge();

    ed.addWaypoint(34.002, -81.002);
    const failed = apiReturning(200, { mission_id: 2, status: "failed", activated: false });
    await ed.uploadTo(failed, 1);
    const failedBadge = ed.badge();

    expect(acceptedBadge.cssClass).toBe("badge-accepted");
    expect(failedBadge.cssClass).toBe("badge-failed");
    expect(failedBadge.cssClass).not.toBe(acceptedBadge.cssClass);
    expect(failedBadge.label).toContain("FAILED");
  });

  it("surfaces server rejection (lost link) as failure with the reason", async () => {
    const api = apiReturning(409, { error: { code: "rejected", message: "link lost" } });
    const ed = new MissionEditor();
    ed.addWaypoint(34.001, -81.001);
    const state = await ed.uploadTo(api, 2);
    expect(state.phase).toBe("failed");
    expect(state.detail).toContain("link lost");
  });

  it("refuses to upload an empty mission", async () => {
    const ed = new MissionEditor();
    const state = await ed.uploadTo(apiReturning(200, {}), 1);
    expect(state.phase).toBe("failed");
    expect(state.detail).toContain("no waypoints");
  });

  it("editing after an ack drops back to the editing state (atomic replace)", async () => {
    const ed = new MissionEditor();
    ed.addWaypoint(34.001, -81.001);
    await ed.uploadTo(apiReturning(200, { mission_id: 5, status: "accepted", activated: true }), 1);
    expect(ed.upload.phase).toBe("accepted");
    ed.moveWaypoint(0, 34.005, -81.002);
    expect(ed.upload.phase).toBe("editing");   // drawn mission != onboard mission now
    const calls: { url: string; body: unknown }[] = [];
    await ed.uploadTo(apiCapturing(calls, { mission_id: 6, status: "accepted", activated: true }), 1);
    // Re-upload always retransmits the complete edited list.
    expect((calls[0].body as { waypoints: { lat: number }[] }).waypoints[0].lat).toBeCloseTo(34.005);
    expect(ed.upload.missionId).toBe(6);
  });
});
