// Mission editor state machine. Click-to-place, drag, per-waypoint speed;
// uploads replace the whole onboard mission atomically (the server
// protocol guarantees a partial transfer never activates), and the ack
// state is tracked so success and failure render unmistakably differently.

import { ApiError, GcsApi, WaypointJson } from "./api.js";

export type UploadPhase = "idle" | "editing" | "uploading" | "accepted" | "failed";

export interface UploadState {
  phase: UploadPhase;
  missionId: number | null;
  detail: string;
}

export class MissionEditor {
  waypoints: WaypointJson[] = [];
  selected: number | null = null;
  defaultSpeed = 3.0;
  upload: UploadState = { phase: "idle", missionId: null, detail: "" };

  addWaypoint(lat: number, lon: number): number {
    this.waypoints.push({ lat, lon, speed: this.defaultSpeed });
    this.selected = this.waypoints.length - 1;
    this.markEdited();
    return this.selected;
  }

  moveWaypoint(index: number, lat: number, lon: number): void {
    const wp = this.waypoints[index];
    if (!wp) return;
    wp.lat = lat;
    wp.lon = lon;
    this.markEdited();
  }

  setSpeed(index: number, speed: number): void {
    const wp = this.waypoints[index];
    if (!wp || !(speed > 0)) return;
    wp.speed = speed;
    this.markEdited();
  }

  removeWaypoint(index: number): void {
    if (index < 0 || index >= this.waypoints.length) return;
    this.waypoints.splice(index, 1);
    this.selected = null;
    this.markEdited();
  }

  clear(): void {
    this.waypoints = [];
    this.selected = null;
    this.upload = { phase: "idle", missionId: null, detail: "" };
  }

  loadMission(waypoints: WaypointJson[]): void {
    this.waypoints = waypoints.map((w) => ({ ...w }));
    this.selected = null;
    this.markEdited();
  }

  private markEdited(): void {
    // Any edit invalidates a previous ack: what is drawn is no longer what
    // is onboard until the next upload round-trips.
    if (this.upload.phase === "accepted" || this.upload.phase === "failed") {
      this.upload = { phase: "editing", missionId: this.upload.missionId, detail: "edited" };
    } else if (this.upload.phase === "idle") {
      this.upload = { phase: "editing", missionId: null, detail: "" };
    }
  }

  async uploadTo(api: GcsApi, sysId: number, activate = true): Promise<UploadState> {
    if (this.waypoints.length === 0) {
      this.upload = { phase: "failed", missionId: null, detail: "no waypoints placed" };
      return this.upload;
    }
    this.upload = { phase: "uploading", missionId: null, detail: `vehicle ${sysId}` };
    try {
      const result = await api.uploadMission(sysId, this.waypoints, activate);
      this.upload =
        result.status === "accepted"
          ? {
              phase: "accepted",
              missionId: result.mission_id,
              detail: result.activated ? "acknowledged and activated" : "acknowledged",
            }
          : {
              phase: "failed",
              missionId: result.mission_id,
              detail: "transfer timed out; vehicle kept its previous mission",
            };
    } catch (e) {
      const detail =
        e instanceof ApiError ? `${e.code}: ${e.message}` : `upload error: ${String(e)}`;
      this.upload = { phase: "failed", missionId: null, detail };
    }
    return this.upload;
  }

  /** What the status badge renders; success and failure are distinct at
   * the class level, not just text. */
  badge(): { cssClass: string; label: string } {
    switch (this.upload.phase) {
      case "idle":
        return { cssClass: "badge-idle", label: "no mission" };
      case "editing":
        return { cssClass: "badge-editing", label: `editing (${this.waypoints.length} wp)` };
      case "uploading":
        return { cssClass: "badge-uploading", label: "uploading…" };
      case "accepted":
        return {
          cssClass: "badge-accepted",
          label: `mission ${this.upload.missionId} onboard — ${this.upload.detail}`,
        };
      case "failed":
        return { cssClass: "badge-failed", label: `UPLOAD FAILED — ${this.upload.detail}` };
    }
  }
}
