// App wiring: stream -> store -> map, fleet sidebar, mission bar, safety
// panel. The kill button for every vehicle is always on screen; killing is
// exactly two clicks (arm, confirm) from anywhere.

import { FleetEntryJson, GcsApi } from "./api.js";
import { MapView } from "./map.js";
import { MissionEditor } from "./mission.js";
import { SafetyPanel, MODE_NAMES } from "./safety.js";
import { FleetStore } from "./store.js";
import { consumeStream } from "./stream.js";

const api = new GcsApi("");
const store = new FleetStore();
const editor = new MissionEditor();
const safety = new SafetyPanel();

const canvas = document.getElementById("map") as HTMLCanvasElement;
const map = new MapView(canvas, store, editor);
const fleetEl = document.getElementById("fleet")!;
const statusEl = document.getElementById("status")!;
const badgeEl = document.getElementById("mission-badge")!;
const checklistEl = document.getElementById("checklist")!;
const targetSel = document.getElementById("mission-target") as HTMLSelectElement;

let fleetSnapshot: FleetEntryJson[] = [];
let streamUp = false;
let centered = false;

function resize(): void {
  const rect = canvas.parentElement!.getBoundingClientRect();
  canvas.width = rect.width;
  canvas.height = rect.height;
  map.draw();
}
window.addEventListener("resize", resize);

consumeStream(
  "/stream",
  (frame) => store.applyFrame(frame),
  (up) => {
    streamUp = up;
    renderStatus();
  },
);

let drawQueued = false;
store.onChange(() => {
  if (!drawQueued) {
    drawQueued = true;
    requestAnimationFrame(() => {
      drawQueued = false;
      if (!centered && store.liveTrackCount(1) > 0) {
        centered = true;
        map.centerOnFleet();
      }
      map.draw();
      renderStatus();
    });
  }
});

function renderStatus(): void {
  statusEl.textContent =
    `${streamUp ? "stream live" : "stream down"} · ${store.framesSeen} frames · ` +
    `${store.liveTrackCount()} live tracks`;
  statusEl.className = streamUp ? "ok" : "bad";
}

function renderBadge(): void {
  const badge = editor.badge();
  badgeEl.className = badge.cssClass;
  badgeEl.textContent = badge.label;
}

function option(value: string, label: string): HTMLOptionElement {
  const el = document.createElement("option");
  el.value = value;
  el.textContent = label;
  return el;
}

function renderFleet(): void {
  fleetEl.textContent = "";
  const killPending = safety.pendingKill?.sysId ?? null;
  for (const entry of fleetSnapshot) {
    const row = document.createElement("div");
    row.className = `vehicle link-${entry.link_state}`;
    const tm = entry.telemetry;
    row.innerHTML =
      `<div class="vid">boat ${entry.sys_id}</div>` +
      `<div class="vinfo">${entry.link_state} · ${entry.mode ?? "?"} · ` +
      `<span class="engine-${(entry.engine ?? "?").toLowerCase()}">${entry.engine ?? "?"}</span>` +
      (tm ? ` · ${tm.v_water.toFixed(1)} m/s · ${tm.fuel.toFixed(1)} L` : "") +
      `</div>`;

    const controls = document.createElement("div");
    controls.className = "vcontrols";

    const modeSel = document.createElement("select");
    for (const name of MODE_NAMES) modeSel.appendChild(option(name, name));
    if (entry.mode) modeSel.value = entry.mode;
    modeSel.addEventListener("change", async () => {
      await safety.setMode(api, entry.sys_id, modeSel.value);
      renderSafetyLine();
      void refreshFleet();
    });
    controls.appendChild(modeSel);

    const pre = document.createElement("button");
    pre.textContent = "preflight";
    pre.addEventListener("click", async () => {
      checklistEl.textContent = "running checklist…";
      const report = await safety.runPreflight(api, entry.sys_id);
      renderChecklist(report ? `boat ${entry.sys_id}` : "");
      renderSafetyLine();
    });
    controls.appendChild(pre);

    const kill = document.createElement("button");
    if (killPending === entry.sys_id) {
      kill.textContent = "CONFIRM KILL";
      kill.className = "kill-confirm";
      kill.addEventListener("click", async () => {
        await safety.confirmKill(api);
        renderFleet();
        renderSafetyLine();
        void refreshFleet();
      });
      const cancel = document.createElement("button");
      cancel.textContent = "cancel";
      cancel.addEventListener("click", () => {
        safety.cancelKill();
        renderFleet();
      });
      controls.appendChild(kill);
      controls.appendChild(cancel);
    } else {
      kill.textContent = "kill";
      kill.className = "kill-arm";
      kill.addEventListener("click", () => {
        safety.requestKill(entry.sys_id);
        renderFleet();
      });
      controls.appendChild(kill);
    }

    row.appendChild(controls);
    fleetEl.appendChild(row);
  }
}

function renderSafetyLine(): void {
  const line = document.getElementById("safety-line")!;
  if (safety.lastError) {
    line.textContent = `rejected: ${safety.lastError}`;
    line.className = "bad";
  } else {
    line.textContent = safety.lastAction;
    line.className = "ok";
  }
}

function renderChecklist(title: string): void {
  const report = safety.checklist;
  checklistEl.textContent = "";
  if (!report) return;
  const head = document.createElement("div");
  head.className = report.passed ? "check-pass" : "check-fail";
  head.textContent = `${title} preflight: ${report.passed ? "PASS" : "FAIL"}`;
  checklistEl.appendChild(head);
  for (const item of report.items) {
    const row = document.createElement("div");
    row.className = item.passed ? "check-item-pass" : "check-item-fail";
    row.textContent = `[${item.stage}] ${item.name}${item.detail ? " — " + item.detail : ""}`;
    checklistEl.appendChild(row);
  }
}

async function refreshFleet(): Promise<void> {
  try {
    const snap = await api.fleet();
    fleetSnapshot = snap.vehicles;
    for (const v of fleetSnapshot) {
      if (!targetSel.querySelector(`option[value="${v.sys_id}"]`)) {
        targetSel.appendChild(option(String(v.sys_id), `boat ${v.sys_id}`));
      }
    }
    renderFleet();
  } catch {
    // server away; the stream status line already says so
  }
}

document.getElementById("mission-upload")!.addEventListener("click", async () => {
  const sysId = parseInt(targetSel.value, 10);
  if (!Number.isFinite(sysId)) return;
  renderBadge();
  await editor.uploadTo(api, sysId, true);
  renderBadge();
  void refreshFleet();
});
document.getElementById("mission-clear")!.addEventListener("click", () => {
  editor.clear();
  renderBadge();
  map.draw();
});
(document.getElementById("mission-speed") as HTMLInputElement).addEventListener("change", (e) => {
  const v = parseFloat((e.target as HTMLInputElement).value);
  if (v > 0) {
    editor.defaultSpeed = v;
    if (editor.selected !== null) editor.setSpeed(editor.selected, v);
    renderBadge();
  }
});

for (const [id, setter] of [
  ["toggle-wind", (on: boolean) => (map.showWind = on)],
  ["toggle-current", (on: boolean) => (map.showCurrent = on)],
  ["toggle-depth", (on: boolean) => (map.showDepth = on)],
] as const) {
  document.getElementById(id)!.addEventListener("change", async (e) => {
    setter((e.target as HTMLInputElement).checked);
    if (id === "toggle-depth" && map.showDepth) {
      try {
        map.depthGrid = await api.depthGrid(10);
      } catch {
        map.depthGrid = null;
      }
    }
    map.draw();
  });
}

setInterval(refreshFleet, 2000);
setInterval(async () => {
  if (map.showDepth) {
    try {
      map.depthGrid = await api.depthGrid(10);
      map.draw();
    } catch {
      /* keep the stale grid */
    }
  }
}, 10_000);

resize();
renderBadge();
void refreshFleet();
