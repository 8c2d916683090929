// Safety panel logic: mode switching, the two-step kill, and the
// preflight runner. Safety state is never rendered optimistically — every
// displayed engine/mode fact comes back from the server.

import { ApiError, ChecklistJson, GcsApi } from "./api.js";

export const MODE_NAMES = [
  "MANUAL_ONBOARD",
  "MANUAL_RC",
  "AUTO_WP_OFFBOARD",
  "AUTO_WP_ONBOARD",
  "VELOCITY_CONTROL",
] as const;

export type KillStage = { sysId: number } | null;

export class SafetyPanel {
  /** Vehicle with an armed (awaiting confirmation) kill, if any. */
  pendingKill: KillStage = null;
  lastError = "";
  lastAction = "";
  checklist: ChecklistJson | null = null;
  checklistRunning = false;

  /** First interaction: arm the kill for one vehicle. */
  requestKill(sysId: number): void {
    this.pendingKill = { sysId };
  }

  cancelKill(): void {
    this.pendingKill = null;
  }

  /** Second interaction: actually send it. */
  async confirmKill(api: GcsApi): Promise<boolean> {
    if (!this.pendingKill) return false;
    const sysId = this.pendingKill.sysId;
    this.pendingKill = null;
    try {
      const result = await api.kill(sysId);
      this.lastAction = `kill sent to ${sysId}: ${result.detail}`;
      this.lastError = "";
      return true;
    } catch (e) {
      this.lastError = e instanceof ApiError ? `${e.code}: ${e.message}` : String(e);
      return false;
    }
  }

  async setMode(api: GcsApi, sysId: number, mode: string): Promise<boolean> {
    try {
      await api.setMode(sysId, mode);
      this.lastAction = `mode ${mode} sent to ${sysId}`;
      this.lastError = "";
      return true;
    } catch (e) {
      // Rejections (lost link, bad mode) surface verbatim.
      this.lastError = e instanceof ApiError ? `${e.code}: ${e.message}` : String(e);
      return false;
    }
  }

  async runPreflight(api: GcsApi, sysId: number): Promise<ChecklistJson | null> {
    this.checklistRunning = true;
    this.checklist = null;
    try {
      this.checklist = await api.preflight(sysId);
      this.lastError = "";
    } catch (e) {
      this.lastError = e instanceof ApiError ? `${e.code}: ${e.message}` : String(e);
    } finally {
      this.checklistRunning = false;
    }
    return this.checklist;
  }
}
