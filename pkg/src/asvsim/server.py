"""HTTP JSON control-plane plus a binary telemetry stream for the GCS.

Control plane (JSON over HTTP):

    GET  /fleet                      fleet registry snapshot
    GET  /vehicle/{id}               one vehicle's entry
    POST /vehicle/{id}/mode          {"mode": "AUTO_WP_ONBOARD"}
    POST /vehicle/{id}/kill          {}
    POST /vehicle/{id}/mission       mission JSON; blocks until ack/timeout
    POST /vehicle/{id}/preflight     runs the startup checklist
    GET  /plan?polygon=...&k=&r_min=&swath=   coverage planning
    GET  /grids/depth?cell=          gridded depth from received samples

Data plane: GET /stream returns an unbounded octet stream of
[4-byte little-endian length][TelemetryFrame bytes] records — the same
frame bytes the radio carried, re-framed for the browser.

Errors are JSON: {"error": {"code": "...", "message": "..."}} with stable
codes.
"""

from __future__ import annotations

import json
import queue
import struct
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .autopilot import Mission, Waypoint
from .coverage import SurveyArea, plan as plan_coverage
from .gcs import preflight
from .geo import GeoPoint, geo_to_local
from .protocol import Kill, Mode, SetMode, VelocitySetpoint
from .simulation import SimWorld

STREAM_LENGTH_PREFIX = struct.Struct("<I")


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


class SimRunner:
    """Advances the world in a background thread, pacing sim time at
    ``time_scale`` times wall clock (0 = free-running)."""

    def __init__(self, world: SimWorld, time_scale: float = 1.0):
        self.world = world
        self.time_scale = time_scale
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._loop, daemon=True)

    def start(self) -> None:
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        self._thread.join(timeout=5.0)

    def _loop(self) -> None:
        wall0 = time.monotonic()
        sim0 = self.world.t
        while not self._stop.is_set():
            if self.time_scale <= 0:
                self.world.step()
                continue
            target = sim0 + (time.monotonic() - wall0) * self.time_scale
            if self.world.t < target:
                self.world.step()
            else:
                time.sleep(min(self.world.dt / self.time_scale, 0.02))


class GcsHttpServer:
    """Wraps a SimWorld in the HTTP API. Command handling serializes on the
    world lock; stream fan-out runs on per-subscriber queues so a slow
    client never stalls the simulation."""

    def __init__(self, world: SimWorld, host: str = "127.0.0.1", port: int = 0,
                 static_dir: str | Path | None = None):
        self.world = world
        self.static_dir = Path(static_dir) if static_dir else None
        handler = _make_handler(self)
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self.port = self.httpd.server_address[1]
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._stream_queues: list[queue.Queue] = []
        world.gcs.subscribe(self._fan_out)

    def _fan_out(self, frame: bytes) -> None:
        for q in list(self._stream_queues):
            try:
                q.put_nowait(frame)
            except queue.Full:
                pass

    def add_stream_queue(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=4096)
        self._stream_queues.append(q)
        return q

    def drop_stream_queue(self, q: queue.Queue) -> None:
        if q in self._stream_queues:
            self._stream_queues.remove(q)

    def start(self) -> None:
        self._thread.start()

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()

    # -- request handlers ----------------------------------------------------

    def fleet_snapshot(self) -> dict:
        with self.world.lock:
            t = self.world.t
            entries = [self._entry_json(e, t) for e in self.world.gcs.fleet.values()]
        return {"t": t, "vehicles": sorted(entries, key=lambda e: e["sys_id"])}

    def _entry_json(self, entry, t: float) -> dict:
        out = {
            "sys_id": entry.sys_id,
            "link_state": entry.link_state.value,
            "heartbeat_age": (t - entry.last_heartbeat_t) if entry.heartbeat else None,
            "active_mission_id": entry.active_mission_id,
        }
        if entry.heartbeat:
            out["mode"] = Mode(entry.heartbeat.mode).name
            out["engine"] = entry.heartbeat.engine.name
            out["armed"] = entry.heartbeat.armed
        if entry.telemetry:
            tm = entry.telemetry
            out["telemetry"] = {
                "lat": tm.geo.lat, "lon": tm.geo.lon, "psi": tm.psi,
                "v_water": tm.v_water, "v_ground_east": tm.v_ground_east,
                "v_ground_north": tm.v_ground_north, "fuel": tm.fuel, "t": tm.t,
            }
        return out

    def vehicle_snapshot(self, sys_id: int) -> dict:
        with self.world.lock:
            entry = self.world.gcs.fleet.get(sys_id)
            if entry is None:
                raise ApiError(404, "unknown_vehicle", f"no vehicle {sys_id}")
            return self._entry_json(entry, self.world.t)

    def set_mode(self, sys_id: int, body: dict) -> dict:
        name = body.get("mode")
        try:
            mode = Mode[name]
        except (KeyError, TypeError):
            raise ApiError(400, "bad_mode", f"unknown mode {name!r}") from None
        with self.world.lock:
            ok, reason = self.world.gcs.command(sys_id, SetMode(mode), self.world.t)
        if not ok:
            raise ApiError(409, "rejected", reason)
        return {"status": "accepted"}

    def kill(self, sys_id: int) -> dict:
        with self.world.lock:
            if sys_id not in self.world.gcs.fleet:
                raise ApiError(404, "unknown_vehicle", f"no vehicle {sys_id}")
            ok, reason = self.world.gcs.command(sys_id, Kill(), self.world.t)
        return {"status": "accepted" if ok else "rejected", "detail": reason}

    def velocity_setpoint(self, sys_id: int, body: dict) -> dict:
        try:
            sp = VelocitySetpoint(float(body["steering"]), float(body["speed"]))
        except (KeyError, TypeError, ValueError):
            raise ApiError(400, "bad_setpoint", "need numeric steering and speed") from None
        with self.world.lock:
            ok, reason = self.world.gcs.command(sys_id, sp, self.world.t)
        if not ok:
            raise ApiError(409, "rejected", reason)
        return {"status": "accepted"}

    def upload_mission(self, sys_id: int, body: dict) -> dict:
        wps_raw = body.get("waypoints")
        if not isinstance(wps_raw, list) or not wps_raw:
            raise ApiError(400, "bad_mission", "waypoints must be a non-empty list")
        try:
            wps = tuple(
                Waypoint(GeoPoint(float(w["lat"]), float(w["lon"])), float(w.get("speed", 3.0)))
                for w in wps_raw
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ApiError(400, "bad_mission", f"bad waypoint: {e}") from None
        activate = bool(body.get("activate", True))
        with self.world.lock:
            gcs = self.world.gcs
            mission = Mission(gcs.next_mission_id(), wps, wps[0].target)
            handle, reason = gcs.upload_mission(sys_id, mission, self.world.t, activate=activate)
        if handle is None:
            raise ApiError(409, "rejected", reason)
        deadline = time.monotonic() + 30.0
        while handle.status is None and time.monotonic() < deadline:
            self._pump_if_paused()
            time.sleep(0.005)
        status = handle.status
        return {
            "mission_id": mission.id,
            "status": "accepted" if status is not None and status.name == "ACCEPTED" else "failed",
            "activated": handle.activated,
        }

    def _pump_if_paused(self) -> None:
        # When nothing is stepping the world (tests without a SimRunner),
        # blocking calls advance it themselves.
        if getattr(self.world, "_external_runner", False):
            return
        with self.world.lock:
            self.world.step()

    def run_preflight(self, sys_id: int) -> dict:
        with self.world.lock:
            report = preflight(self.world, sys_id)
        return {
            "passed": report.passed,
            "items": [
                {"name": i.name, "stage": i.stage, "passed": i.passed, "detail": i.detail}
                for i in report.items
            ],
        }

    def plan(self, params: dict) -> dict:
        try:
            poly_raw = params["polygon"][0]
            k = int(params.get("k", ["1"])[0])
            r_min = float(params.get("r_min", ["5.0"])[0])
            swath = float(params.get("swath", ["10.0"])[0])
            speed = float(params.get("speed", ["3.0"])[0])
        except (KeyError, ValueError, IndexError):
            raise ApiError(400, "bad_request", "need polygon plus numeric k/r_min/swath") from None
        pts = []
        try:
            for pair in poly_raw.split(";"):
                lat, lon = pair.split(",")
                pts.append(GeoPoint(float(lat), float(lon)))
        except ValueError as e:
            raise ApiError(400, "bad_polygon", f"polygon must be lat,lon;lat,lon;...: {e}") from None
        if len(pts) < 4:
            raise ApiError(400, "bad_polygon", "polygon needs at least 3 vertices plus closure")
        first, last = pts[0], pts[-1]
        if abs(first.lat - last.lat) > 1e-12 or abs(first.lon - last.lon) > 1e-12:
            raise ApiError(400, "unclosed_polygon", "polygon ring must repeat its first vertex")
        origin = self.world.origin
        local = [geo_to_local(origin, p) for p in pts[:-1]]
        try:
            area = SurveyArea(tuple(local), swath=swath)
            result = plan_coverage(area, k=k, r_min=r_min)
        except ValueError as e:
            raise ApiError(400, "bad_polygon", str(e)) from None
        missions = result.to_missions(origin, speed)
        return {
            "coverage_ratio": result.coverage_ratio,
            "missions": [
                {
                    "id": m.id,
                    "home": {"lat": m.home.lat, "lon": m.home.lon},
                    "waypoints": [
                        {"lat": w.target.lat, "lon": w.target.lon, "speed": w.speed}
                        for w in m.waypoints
                    ],
                }
                for m in missions
            ],
        }

    def depth_grid(self, params: dict) -> dict:
        cell = float(params.get("cell", ["10.0"])[0])
        with self.world.lock:
            grid = self.world.gcs.depth_grid(cell)
        cells = [
            [None if v != v else round(float(v), 3) for v in row]  # NaN -> null
            for row in grid.cells.tolist()
        ]
        return {
            "origin": {"lat": grid.origin.lat, "lon": grid.origin.lon},
            "cell_size": grid.cell_size,
            "rows": grid.rows,
            "cols": grid.cols,
            "cells": cells,
        }


def _make_handler(server: GcsHttpServer):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            pass

        def _send_json(self, payload: dict, status: int = 200) -> None:
            body = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _send_error(self, e: ApiError) -> None:
            self._send_json({"error": {"code": e.code, "message": e.message}}, e.status)

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            if length == 0:
                return {}
            try:
                return json.loads(self.rfile.read(length) or b"{}")
            except json.JSONDecodeError:
                raise ApiError(400, "bad_json", "request body is not valid JSON") from None

        def _vehicle_id(self, part: str) -> int:
            try:
                return int(part)
            except ValueError:
                raise ApiError(400, "bad_vehicle_id", f"vehicle id must be an integer, got {part!r}") from None

        def do_GET(self):
            try:
                url = urlparse(self.path)
                parts = [p for p in url.path.split("/") if p]
                params = parse_qs(url.query)
                if url.path == "/stream":
                    return self._stream()
                if url.path == "/fleet":
                    return self._send_json(server.fleet_snapshot())
                if len(parts) == 2 and parts[0] == "vehicle":
                    return self._send_json(server.vehicle_snapshot(self._vehicle_id(parts[1])))
                if url.path == "/plan":
                    return self._send_json(server.plan(params))
                if url.path == "/grids/depth":
                    return self._send_json(server.depth_grid(params))
                if server.static_dir is not None:
                    return self._static(url.path)
                raise ApiError(404, "not_found", f"no route {url.path}")
            except ApiError as e:
                self._send_error(e)
            except (BrokenPipeError, ConnectionResetError):
                pass

        def do_POST(self):
            try:
                parts = [p for p in urlparse(self.path).path.split("/") if p]
                if len(parts) == 3 and parts[0] == "vehicle":
                    sys_id = self._vehicle_id(parts[1])
                    body = self._body()
                    if parts[2] == "mode":
                        return self._send_json(server.set_mode(sys_id, body))
                    if parts[2] == "kill":
                        return self._send_json(server.kill(sys_id))
                    if parts[2] == "mission":
                        return self._send_json(server.upload_mission(sys_id, body))
                    if parts[2] == "velocity":
                        return self._send_json(server.velocity_setpoint(sys_id, body))
                    if parts[2] == "preflight":
                        return self._send_json(server.run_preflight(sys_id))
                raise ApiError(404, "not_found", f"no route {self.path}")
            except ApiError as e:
                self._send_error(e)
            except (BrokenPipeError, ConnectionResetError):
                pass

        def _stream(self):
            self.send_response(200)
            self.send_header("Content-Type", "application/octet-stream")
            self.send_header("Cache-Control", "no-store")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            q = server.add_stream_queue()
            try:
                while True:
                    try:
                        frame = q.get(timeout=1.0)
                    except queue.Empty:
                        continue
                    self.wfile.write(STREAM_LENGTH_PREFIX.pack(len(frame)) + frame)
                    self.wfile.flush()
            except (BrokenPipeError, ConnectionResetError, OSError):
                pass
            finally:
                server.drop_stream_queue(q)

        def _static(self, path: str):
            rel = "index.html" if path == "/" else path.lstrip("/")
            target = (server.static_dir / rel).resolve()
            if not str(target).startswith(str(server.static_dir.resolve())) or not target.is_file():
                raise ApiError(404, "not_found", f"no route {path}")
            body = target.read_bytes()
            ctype = {
                ".html": "text/html", ".js": "application/javascript",
                ".css": "text/css", ".map": "application/json",
            }.get(target.suffix, "application/octet-stream")
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


def serve(world: SimWorld, host: str = "127.0.0.1", port: int = 8400,
          time_scale: float = 1.0, static_dir=None) -> tuple[GcsHttpServer, SimRunner]:
    """Start the API server plus the stepping thread; returns both so the
    caller owns shutdown."""
    world._external_runner = True
    http = GcsHttpServer(world, host, port, static_dir=static_dir)
    runner = SimRunner(world, time_scale)
    http.start()
    runner.start()
    return http, runner
