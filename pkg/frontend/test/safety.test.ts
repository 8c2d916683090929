import { describe, expect, it } from "vitest";
import { GcsApi } from "../src/api.js";
import { SafetyPanel } from "../src/safety.js";

function api(status: number, body: unknown, calls?: string[]): GcsApi {
  return new GcsApi("", async (url: string) => {
    calls?.push(url);
    return new Response(JSON.stringify(body), { status });
  });
}

describe("kill flow", () => {
  it("takes exactly two interactions: arm then confirm", async () => {
    const calls: string[] = [];
    const panel = new SafetyPanel();
    const gcs = api(200, { status: "accepted", detail: "ok" }, calls);

    panel.requestKill(2);                    // interaction 1
    expect(panel.pendingKill).toEqual({ sysId: 2 });
    expect(calls).toHaveLength(0);            // nothing sent yet

    const sent = await panel.confirmKill(gcs); // interaction 2
    expect(sent).toBe(true);
    expect(calls).toEqual(["/vehicle/2/kill"]);
    expect(panel.pendingKill).toBeNull();
  });

  it("cancel disarms without sending", async () => {
    const calls: string[] = [];
    const panel = new SafetyPanel();
    panel.requestKill(1);
    panel.cancelKill();
    expect(panel.pendingKill).toBeNull();
    expect(await panel.confirmKill(api(200, {}, calls))).toBe(false);
    expect(calls).toHaveLength(0);
  });

  it("kill is still attempted on a lost vehicle and the detail surfaces", async () => {
    const panel = new SafetyPanel();
    panel.requestKill(3);
    const ok = await panel.confirmKill(api(200, { status: "accepted", detail: "kill attempted" }));
    expect(ok).toBe(true);
    expect(panel.lastAction).toContain("kill attempted");
  });
});

describe("mode changes", () => {
  it("reports success", async () => {
    const panel = new SafetyPanel();
    const ok = await panel.setMode(api(200, { status: "accepted" }), 1, "AUTO_WP_ONBOARD");
    expect(ok).toBe(true);
    expect(panel.lastError).toBe("");
  });

  it("surfaces a rejection for a lost vehicle", async () => {
    const panel = new SafetyPanel();
    const ok = await panel.setMode(
      api(409, { error: { code: "rejected", message: "link lost" } }),
      1,
      "AUTO_WP_ONBOARD",
    );
    expect(ok).toBe(false);
    expect(panel.lastError).toContain("link lost");
  });
});

describe("preflight", () => {
  it("stores the checklist report", async () => {
    const report = {
      passed: false,
      items: [
        { name: "kill circuit", stage: "engine_off", passed: false, detail: "override engaged" },
        { name: "steering sweep", stage: "engine_off", passed: true, detail: "" },
      ],
    };
    const panel = new SafetyPanel();
    const got = await panel.runPreflight(api(200, report), 1);
    expect(got).toEqual(report);
    expect(panel.checklist!.items[0].passed).toBe(false);
    expect(panel.checklistRunning).toBe(false);
  });
});
