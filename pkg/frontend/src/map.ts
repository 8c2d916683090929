// Canvas map: tracks, vehicle markers, mission editing, and the
// wind/current/depth overlays. Geometry is drawn in scenario-local meters
// on an equirectangular tangent plane anchored at the first telemetry fix.

import { DepthGridJson } from "./api.js";
import { MissionEditor } from "./mission.js";
import { FleetStore } from "./store.js";

const EARTH_RADIUS_M = 6371000;
const VEHICLE_COLORS = ["#4fc3f7", "#aed581", "#ffb74d", "#f06292", "#ba68c8", "#4db6ac"];

interface Anchor {
  lat: number;
  lon: number;
  cosLat: number;
}

export class MapView {
  private ctx: CanvasRenderingContext2D;
  private anchor: Anchor | null = null;
  private scale = 4;            // px per meter
  private centerE = 0;          // meters at canvas center
  private centerN = 0;
  private dragging: { kind: "pan"; x: number; y: number } | { kind: "wp"; index: number } | null =
    null;
  showWind = true;
  showCurrent = true;
  showDepth = false;
  depthGrid: DepthGridJson | null = null;
  editTarget: number | null = null;   // sys_id missions are edited for

  constructor(
    private canvas: HTMLCanvasElement,
    private store: FleetStore,
    private editor: MissionEditor,
  ) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("no 2d context");
    this.ctx = ctx;
    canvas.addEventListener("mousedown", (e) => this.onDown(e));
    canvas.addEventListener("mousemove", (e) => this.onMove(e));
    window.addEventListener("mouseup", () => (this.dragging = null));
    canvas.addEventListener("wheel", (e) => this.onWheel(e), { passive: false });
    canvas.addEventListener("dblclick", (e) => this.onDouble(e));
  }

  private ensureAnchor(): Anchor | null {
    if (this.anchor) return this.anchor;
    for (const v of this.store.vehicles.values()) {
      if (v.lastTelemetry) {
        const { lat, lon } = v.lastTelemetry;
        this.anchor = { lat, lon, cosLat: Math.cos((lat * Math.PI) / 180) };
        return this.anchor;
      }
    }
    return null;
  }

  private geoToLocal(lat: number, lon: number): { e: number; n: number } {
    const a = this.anchor!;
    return {
      e: ((lon - a.lon) * Math.PI / 180) * EARTH_RADIUS_M * a.cosLat,
      n: ((lat - a.lat) * Math.PI / 180) * EARTH_RADIUS_M,
    };
  }

  private localToGeo(e: number, n: number): { lat: number; lon: number } {
    const a = this.anchor!;
    return {
      lat: a.lat + ((n / EARTH_RADIUS_M) * 180) / Math.PI,
      lon: a.lon + ((e / (EARTH_RADIUS_M * a.cosLat)) * 180) / Math.PI,
    };
  }

  private toPx(e: number, n: number): { x: number; y: number } {
    return {
      x: this.canvas.width / 2 + (e - this.centerE) * this.scale,
      y: this.canvas.height / 2 - (n - this.centerN) * this.scale,
    };
  }

  private toLocal(x: number, y: number): { e: number; n: number } {
    return {
      e: this.centerE + (x - this.canvas.width / 2) / this.scale,
      n: this.centerN - (y - this.canvas.height / 2) / this.scale,
    };
  }

  private canvasXY(ev: MouseEvent): { x: number; y: number } {
    const rect = this.canvas.getBoundingClientRect();
    return { x: ev.clientX - rect.left, y: ev.clientY - rect.top };
  }

  private hitWaypoint(x: number, y: number): number | null {
    if (!this.anchor) return null;
    for (let i = this.editor.waypoints.length - 1; i >= 0; i--) {
      const wp = this.editor.waypoints[i];
      const { e, n } = this.geoToLocal(wp.lat, wp.lon);
      const p = this.toPx(e, n);
      if (Math.hypot(p.x - x, p.y - y) < 10) return i;
    }
    return null;
  }

  private onDown(ev: MouseEvent): void {
    const { x, y } = this.canvasXY(ev);
    const hit = this.hitWaypoint(x, y);
    if (hit !== null) {
      this.dragging = { kind: "wp", index: hit };
      this.editor.selected = hit;
    } else if (ev.shiftKey || ev.button === 1) {
      this.dragging = { kind: "pan", x, y };
    } else if (this.anchor) {
      // Plain click places a waypoint.
      const { e, n } = this.toLocal(x, y);
      const geo = this.localToGeo(e, n);
      this.editor.addWaypoint(geo.lat, geo.lon);
    }
    this.draw();
  }

  private onMove(ev: MouseEvent): void {
    if (!this.dragging) return;
    const { x, y } = this.canvasXY(ev);
    if (this.dragging.kind === "pan") {
      this.centerE -= (x - this.dragging.x) / this.scale;
      this.centerN += (y - this.dragging.y) / this.scale;
      this.dragging = { kind: "pan", x, y };
    } else {
      const { e, n } = this.toLocal(x, y);
      const geo = this.localToGeo(e, n);
      this.editor.moveWaypoint(this.dragging.index, geo.lat, geo.lon);
    }
    this.draw();
  }

  private onWheel(ev: WheelEvent): void {
    ev.preventDefault();
    const factor = ev.deltaY < 0 ? 1.2 : 1 / 1.2;
    this.scale = Math.min(80, Math.max(0.3, this.scale * factor));
    this.draw();
  }

  private onDouble(ev: MouseEvent): void {
    const { x, y } = this.canvasXY(ev);
    const hit = this.hitWaypoint(x, y);
    if (hit !== null) this.editor.removeWaypoint(hit);
    this.draw();
  }

  centerOnFleet(): void {
    if (!this.ensureAnchor()) return;
    let count = 0;
    let se = 0;
    let sn = 0;
    for (const v of this.store.vehicles.values()) {
      if (!v.lastTelemetry) continue;
      const { e, n } = this.geoToLocal(v.lastTelemetry.lat, v.lastTelemetry.lon);
      se += e;
      sn += n;
      count += 1;
    }
    if (count) {
      this.centerE = se / count;
      this.centerN = sn / count;
    }
  }

  draw(): void {
    const { ctx, canvas } = this;
    ctx.fillStyle = "#0b1620";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    if (!this.ensureAnchor()) {
      ctx.fillStyle = "#5f7a8a";
      ctx.font = "14px sans-serif";
      ctx.fillText("waiting for telemetry…", 20, 30);
      return;
    }
    this.drawGridLines();
    if (this.showDepth && this.depthGrid) this.drawDepth(this.depthGrid);
    if (this.showCurrent) this.drawVectors(this.store.current.toArray(), "#3d85c6");
    if (this.showWind) this.drawVectors(this.store.wind.toArray(), "#999999");
    this.drawMission();
    this.drawTracksAndMarkers();
  }

  private drawGridLines(): void {
    const { ctx, canvas } = this;
    const spacing = this.scale > 8 ? 10 : this.scale > 2 ? 50 : 200;
    ctx.strokeStyle = "#13242f";
    ctx.lineWidth = 1;
    const tl = this.toLocal(0, 0);
    const br = this.toLocal(canvas.width, canvas.height);
    for (let e = Math.floor(tl.e / spacing) * spacing; e < br.e; e += spacing) {
      const p = this.toPx(e, 0);
      ctx.beginPath();
      ctx.moveTo(p.x, 0);
      ctx.lineTo(p.x, canvas.height);
      ctx.stroke();
    }
    for (let n = Math.floor(br.n / spacing) * spacing; n < tl.n; n += spacing) {
      const p = this.toPx(0, n);
      ctx.beginPath();
      ctx.moveTo(0, p.y);
      ctx.lineTo(canvas.width, p.y);
      ctx.stroke();
    }
  }

  private drawDepth(grid: DepthGridJson): void {
    const { ctx } = this;
    const originLocal = this.geoToLocal(grid.origin.lat, grid.origin.lon);
    let min = Infinity;
    let max = -Infinity;
    for (const row of grid.cells) {
      for (const v of row) {
        if (v !== null) {
          min = Math.min(min, v);
          max = Math.max(max, v);
        }
      }
    }
    const span = Math.max(max - min, 0.1);
    for (let r = 0; r < grid.rows; r++) {
      for (let c = 0; c < grid.cols; c++) {
        const v = grid.cells[r][c];
        if (v === null) continue;
        const frac = (v - min) / span;
        const p = this.toPx(
          originLocal.e + c * grid.cell_size,
          originLocal.n + (r + 1) * grid.cell_size,
        );
        const size = grid.cell_size * this.scale;
        ctx.fillStyle = `rgba(${30 + 80 * (1 - frac)}, ${120 - 60 * frac}, ${200 - 120 * frac}, 0.55)`;
        ctx.fillRect(p.x, p.y, size + 0.5, size + 0.5);
      }
    }
  }

  private drawVectors(vectors: readonly { east: number; north: number; vEast: number; vNorth: number }[], color: string): void {
    const { ctx } = this;
    ctx.strokeStyle = color;
    ctx.lineWidth = 1;
    const arrowScale = 4; // px per m/s
    for (const v of vectors) {
      const p = this.toPx(v.east, v.north);
      const dx = v.vEast * arrowScale;
      const dy = -v.vNorth * arrowScale;
      ctx.beginPath();
      ctx.moveTo(p.x, p.y);
      ctx.lineTo(p.x + dx, p.y + dy);
      ctx.stroke();
      const mag = Math.hypot(dx, dy);
      if (mag > 2) {
        const ux = dx / mag;
        const uy = dy / mag;
        ctx.beginPath();
        ctx.moveTo(p.x + dx, p.y + dy);
        ctx.lineTo(p.x + dx - 4 * ux + 2 * uy, p.y + dy - 4 * uy - 2 * ux);
        ctx.moveTo(p.x + dx, p.y + dy);
        ctx.lineTo(p.x + dx - 4 * ux - 2 * uy, p.y + dy - 4 * uy + 2 * ux);
        ctx.stroke();
      }
    }
  }

  private drawMission(): void {
    const { ctx } = this;
    const wps = this.editor.waypoints;
    if (!wps.length) return;
    ctx.strokeStyle = "#e0c060";
    ctx.lineWidth = 1.5;
    ctx.setLineDash([6, 4]);
    ctx.beginPath();
    wps.forEach((wp, i) => {
      const { e, n } = this.geoToLocal(wp.lat, wp.lon);
      const p = this.toPx(e, n);
      if (i === 0) ctx.moveTo(p.x, p.y);
      else ctx.lineTo(p.x, p.y);
    });
    ctx.stroke();
    ctx.setLineDash([]);
    wps.forEach((wp, i) => {
      const { e, n } = this.geoToLocal(wp.lat, wp.lon);
      const p = this.toPx(e, n);
      ctx.beginPath();
      ctx.arc(p.x, p.y, i === this.editor.selected ? 7 : 5, 0, 2 * Math.PI);
      ctx.fillStyle = i === this.editor.selected ? "#ffd54f" : "#e0c060";
      ctx.fill();
      ctx.fillStyle = "#0b1620";
      ctx.font = "9px sans-serif";
      ctx.textAlign = "center";
      ctx.fillText(String(i + 1), p.x, p.y + 3);
    });
    ctx.textAlign = "left";
  }

  private drawTracksAndMarkers(): void {
    const { ctx } = this;
    let colorIdx = 0;
    const ids = [...this.store.vehicles.keys()].sort((a, b) => a - b);
    for (const sysId of ids) {
      const v = this.store.vehicles.get(sysId)!;
      const color = VEHICLE_COLORS[colorIdx++ % VEHICLE_COLORS.length];
      const track = v.track.toArray();
      if (track.length > 1) {
        ctx.strokeStyle = color;
        ctx.lineWidth = 1.2;
        ctx.beginPath();
        track.forEach((pt, i) => {
          const { e, n } = this.geoToLocal(pt.lat, pt.lon);
          const p = this.toPx(e, n);
          if (i === 0) ctx.moveTo(p.x, p.y);
          else ctx.lineTo(p.x, p.y);
        });
        ctx.stroke();
      }
      const tm = v.lastTelemetry;
      if (tm) {
        const { e, n } = this.geoToLocal(tm.lat, tm.lon);
        const p = this.toPx(e, n);
        ctx.save();
        ctx.translate(p.x, p.y);
        ctx.rotate(tm.psi);   // heading clockwise from north == clockwise from screen-up
        ctx.beginPath();
        ctx.moveTo(0, -9);
        ctx.lineTo(5, 7);
        ctx.lineTo(-5, 7);
        ctx.closePath();
        ctx.fillStyle = color;
        ctx.fill();
        ctx.restore();
        ctx.fillStyle = color;
        ctx.font = "11px sans-serif";
        ctx.fillText(String(sysId), p.x + 9, p.y - 7);
      }
    }
  }
}
