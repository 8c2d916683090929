// Typed client for the GCS control-plane API. Thin on purpose: all state
// lives server-side; the UI only displays what these calls return.

export interface TelemetryJson {
  lat: number;
  lon: number;
  psi: number;
  v_water: number;
  v_ground_east: number;
  v_ground_north: number;
  fuel: number;
  t: number;
}

export interface FleetEntryJson {
  sys_id: number;
  link_state: "connected" | "degraded" | "lost";
  heartbeat_age: number | null;
  active_mission_id: number | null;
  mode?: string;
  engine?: string;
  armed?: boolean;
  telemetry?: TelemetryJson;
}

export interface FleetSnapshot {
  t: number;
  vehicles: FleetEntryJson[];
}

export interface WaypointJson {
  lat: number;
  lon: number;
  speed: number;
}

export interface UploadResult {
  mission_id: number;
  status: "accepted" | "failed";
  activated: boolean;
}

export interface ChecklistItemJson {
  name: string;
  stage: string;
  passed: boolean;
  detail: string;
}

export interface ChecklistJson {
  passed: boolean;
  items: ChecklistItemJson[];
}

export interface PlanResult {
  coverage_ratio: number;
  missions: { id: number; home: WaypointJson; waypoints: WaypointJson[] }[];
}

export interface DepthGridJson {
  origin: { lat: number; lon: number };
  cell_size: number;
  rows: number;
  cols: number;
  cells: (number | null)[][];
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class GcsApi {
  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const err = (body as { error?: { code?: string; message?: string } }).error ?? {};
      throw new ApiError(resp.status, err.code ?? "http_error", err.message ?? resp.statusText);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload ?? {}),
    });
  }

  fleet(): Promise<FleetSnapshot> {
    return this.request("/fleet");
  }

  vehicle(sysId: number): Promise<FleetEntryJson> {
    return this.request(`/vehicle/${sysId}`);
  }

  setMode(sysId: number, mode: string): Promise<{ status: string }> {
    return this.post(`/vehicle/${sysId}/mode`, { mode });
  }

  kill(sysId: number): Promise<{ status: string; detail: string }> {
    return this.post(`/vehicle/${sysId}/kill`, {});
  }

  velocity(sysId: number, steering: number, speed: number): Promise<{ status: string }> {
    return this.post(`/vehicle/${sysId}/velocity`, { steering, speed });
  }

  uploadMission(
    sysId: number,
    waypoints: WaypointJson[],
    activate = true,
  ): Promise<UploadResult> {
    return this.post(`/vehicle/${sysId}/mission`, { waypoints, activate });
  }

  preflight(sysId: number): Promise<ChecklistJson> {
    return this.post(`/vehicle/${sysId}/preflight`, {});
  }

  plan(polygon: { lat: number; lon: number }[], k: number, rMin: number, swath: number): Promise<PlanResult> {
    const ring = [...polygon, polygon[0]];
    const poly = ring.map((p) => `${p.lat},${p.lon}`).join(";");
    return this.request(
      `/plan?polygon=${encodeURIComponent(poly)}&k=${k}&r_min=${rMin}&swath=${swath}`,
    );
  }

  depthGrid(cell = 10): Promise<DepthGridJson> {
    return this.request(`/grids/depth?cell=${cell}`);
  }
}
