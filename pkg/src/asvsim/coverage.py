"""Boustrophedon coverage planning for curvature-limited vehicles.

A survey polygon is swept by parallel transects one sensor swath apart;
adjacent transects are joined with shortest Dubins turns so the plan never
demands a tighter radius than the hull can fly. Multi-vehicle surveys
split the polygon into equal-area slabs, one per vehicle, cut
perpendicular to the transect direction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .autopilot import Mission, Waypoint
from .dubins import DubinsPath, dubins_connect, sample_compass
from .geo import GeoPoint, Heading, LocalPoint, bearing, local_to_geo, normalize_heading


def polygon_area(points: list[LocalPoint]) -> float:
    """Signed shoelace area (positive when counterclockwise)."""
    a = 0.0
    n = len(points)
    for i in range(n):
        p, q = points[i], points[(i + 1) % n]
        a += p.east * q.north - q.east * p.north
    return a / 2.0


@dataclass(frozen=True)
class SurveyArea:
    boundary: tuple[LocalPoint, ...]
    swath: float = 10.0
    transect_heading: Heading = 0.0

    def __post_init__(self) -> None:
        if len(self.boundary) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if self.swath <= 0:
            raise ValueError("swath must be positive")
        a = polygon_area(list(self.boundary))
        if abs(a) < 1e-9:
            raise ValueError("polygon is degenerate (zero area)")
        if a < 0:
            object.__setattr__(self, "boundary", tuple(reversed(self.boundary)))

    @property
    def area(self) -> float:
        return polygon_area(list(self.boundary))

    def axes(self) -> tuple[tuple[float, float], tuple[float, float]]:
        """(sweep, along) unit vectors: transects run along ``along``,
        successive transects step along ``sweep``."""
        psi = normalize_heading(self.transect_heading)
        along = (math.sin(psi), math.cos(psi))
        sweep = (math.cos(psi), -math.sin(psi))
        return sweep, along


def _project(p: LocalPoint, axis: tuple[float, float]) -> float:
    return p.east * axis[0] + p.north * axis[1]


def _unproject(u: float, v: float, sweep, along) -> LocalPoint:
    return LocalPoint(u * sweep[0] + v * along[0], u * sweep[1] + v * along[1])


def _line_polygon_span(boundary, sweep, along, u: float) -> tuple[float, float] | None:
    """Extent [v_min, v_max] of the polygon along the transect line at
    sweep-coordinate ``u`` (extreme intersections; exact for convex)."""
    vs = []
    n = len(boundary)
    for i in range(n):
        p, q = boundary[i], boundary[(i + 1) % n]
        up, uq = _project(p, sweep), _project(q, sweep)
        if (up - u) * (uq - u) > 0 or abs(up - uq) < 1e-12:
            continue
        t = (u - up) / (uq - up)
        vs.append(_project(p, along) + t * (_project(q, along) - _project(p, along)))
    if len(vs) < 2:
        return None
    return (min(vs), max(vs))


def transects(area: SurveyArea) -> list[tuple[LocalPoint, LocalPoint]]:
    """Parallel transects one swath apart, clipped to the polygon, ordered
    and oriented for alternating traversal. A polygon narrower than the
    swath collapses to a single centerline transect."""
    sweep, along = area.axes()
    us = [_project(p, sweep) for p in area.boundary]
    umin, umax = min(us), max(us)
    width = umax - umin
    if width <= area.swath:
        n = 1
    else:
        n = int(math.ceil(width / area.swath - 1e-9))
    inset = (width - (n - 1) * area.swath) / 2.0

    out = []
    for i in range(n):
        u = umin + inset + i * area.swath
        span = _line_polygon_span(area.boundary, sweep, along, u)
        if span is None:
            continue
        v0, v1 = span
        a = _unproject(u, v0, sweep, along)
        b = _unproject(u, v1, sweep, along)
        if i % 2 == 0:
            out.append((a, b))
        else:
            out.append((b, a))
    return out


def _clip_halfplane(points: list[LocalPoint], axis, c: float, keep_below: bool) -> list[LocalPoint]:
    """Sutherland-Hodgman clip against axis-projection <= c (or >= c)."""
    def inside(p):
        v = _project(p, axis)
        return v <= c + 1e-12 if keep_below else v >= c - 1e-12

    def intersect(p, q):
        vp, vq = _project(p, axis), _project(q, axis)
        t = (c - vp) / (vq - vp)
        return LocalPoint(p.east + t * (q.east - p.east), p.north + t * (q.north - p.north))

    out: list[LocalPoint] = []
    n = len(points)
    for i in range(n):
        p, q = points[i], points[(i + 1) % n]
        pin, qin = inside(p), inside(q)
        if pin:
            out.append(p)
            if not qin:
                out.append(intersect(p, q))
        elif qin:
            out.append(intersect(p, q))
    # Drop duplicate vertices the clip can produce.
    dedup = [p for i, p in enumerate(out) if i == 0 or p.distance_to(out[i - 1]) > 1e-9]
    if len(dedup) > 1 and dedup[0].distance_to(dedup[-1]) < 1e-9:
        dedup.pop()
    return dedup


def partition(area: SurveyArea, k: int) -> list[SurveyArea]:
    """Split into ``k`` equal-area slabs (within 1%) by cuts perpendicular
    to the transect direction, positioned by bisection."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n_transects = len(transects(area))
    if k > n_transects:
        warnings.warn(f"k={k} exceeds transect count {n_transects}; reducing")
        k = max(1, n_transects)
    if k == 1:
        return [area]

    _, along = area.axes()
    vs = [_project(p, along) for p in area.boundary]
    vmin, vmax = min(vs), max(vs)
    total = area.area

    def area_below(c: float) -> float:
        piece = _clip_halfplane(list(area.boundary), along, c, keep_below=True)
        return abs(polygon_area(piece)) if len(piece) >= 3 else 0.0

    cuts = []
    for j in range(1, k):
        target = total * j / k
        lo, hi = vmin, vmax
        for _ in range(80):
            mid = (lo + hi) / 2.0
            if area_below(mid) < target:
                lo = mid
            else:
                hi = mid
        cuts.append((lo + hi) / 2.0)

    pieces: list[SurveyArea] = []
    bounds = [vmin - 1.0] + cuts + [vmax + 1.0]
    for j in range(k):
        poly = _clip_halfplane(list(area.boundary), along, bounds[j], keep_below=False)
        poly = _clip_halfplane(poly, along, bounds[j + 1], keep_below=True)
        pieces.append(SurveyArea(tuple(poly), area.swath, area.transect_heading))
    return pieces


@dataclass(frozen=True)
class PlanLeg:
    kind: str                       # 'approach', 'transect', 'turn', 'return'
    points: tuple[LocalPoint, ...]

    @property
    def length(self) -> float:
        return sum(self.points[i].distance_to(self.points[i + 1]) for i in range(len(self.points) - 1))


@dataclass
class CoveragePlan:
    vehicles: list[list[PlanLeg]]
    r_min: float
    swath: float
    coverage_ratio: float
    area: SurveyArea

    def waypoints(self, vehicle: int) -> list[tuple[LocalPoint, str]]:
        """Flattened waypoint list with the leg kind each point belongs to;
        consecutive duplicates across leg boundaries are merged."""
        out: list[tuple[LocalPoint, str]] = []
        for leg in self.vehicles[vehicle]:
            for p in leg.points:
                if out and out[-1][0].distance_to(p) < 1e-6:
                    continue
                out.append((p, leg.kind))
        return out

    def total_length(self, vehicle: int) -> float:
        return sum(leg.length for leg in self.vehicles[vehicle])

    def to_missions(self, origin: GeoPoint, speed: float, first_id: int = 1) -> list[Mission]:
        missions = []
        for vi in range(len(self.vehicles)):
            pts = [p for p, _ in self.waypoints(vi)]
            wps = tuple(Waypoint(local_to_geo(origin, p), speed) for p in pts)
            home = local_to_geo(origin, pts[0])
            missions.append(Mission(first_id + vi, wps, home))
        return missions

    def description(self) -> str:
        lines = [
            f"coverage plan: {len(self.vehicles)} vehicle(s), swath {self.swath} m, "
            f"turn radius {self.r_min} m",
            f"polygon area: {abs(self.area.area):.1f} m^2",
            f"estimated coverage ratio: {self.coverage_ratio:.4f}",
        ]
        for vi in range(len(self.vehicles)):
            n_wp = len(self.waypoints(vi))
            lines.append(
                f"vehicle {vi}: {n_wp} waypoints, track length {self.total_length(vi):.1f} m"
            )
        return "\n".join(lines)


def _turn_leg(path: DubinsPath, min_points: int = 6) -> tuple[LocalPoint, ...]:
    step = max(path.length / (min_points - 1), 1e-6)
    pts = [p for p, _ in sample_compass(path, step)]
    return tuple(pts)


def coverage_ratio(area: SurveyArea, tracks: list[list[LocalPoint]], cell: float | None = None) -> float:
    """Fraction of polygon interior cells within half a swath of a track."""
    cell = cell or area.swath / 5.0
    es = [p.east for p in area.boundary]
    ns = [p.north for p in area.boundary]
    xs = np.arange(min(es) + cell / 2, max(es), cell)
    ys = np.arange(min(ns) + cell / 2, max(ns), cell)
    gx, gy = np.meshgrid(xs, ys)
    centers = np.column_stack([gx.ravel(), gy.ravel()])
    inside = _points_in_polygon(centers, area.boundary)
    if not inside.any():
        return 1.0
    pts = centers[inside]
    covered = np.zeros(len(pts), dtype=bool)
    for track in tracks:
        for i in range(len(track) - 1):
            covered |= _dist_to_segment(pts, track[i], track[i + 1]) <= area.swath / 2.0
    return float(covered.mean())


def _points_in_polygon(pts: np.ndarray, boundary) -> np.ndarray:
    inside = np.zeros(len(pts), dtype=bool)
    n = len(boundary)
    x, y = pts[:, 0], pts[:, 1]
    for i in range(n):
        p, q = boundary[i], boundary[(i + 1) % n]
        cond = (p.north <= y) != (q.north <= y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = p.east + (y - p.north) * (q.east - p.east) / (q.north - p.north)
        inside ^= cond & (x < xint)
    return inside


def _dist_to_segment(pts: np.ndarray, a: LocalPoint, b: LocalPoint) -> np.ndarray:
    ab = np.array([b.east - a.east, b.north - a.north])
    ap = pts - np.array([a.east, a.north])
    denom = float(ab @ ab)
    if denom < 1e-12:
        return np.hypot(ap[:, 0], ap[:, 1])
    t = np.clip((ap @ ab) / denom, 0.0, 1.0)
    closest = np.outer(t, ab)
    d = ap - closest
    return np.hypot(d[:, 0], d[:, 1])


def plan(
    area: SurveyArea,
    k: int = 1,
    r_min: float = 5.0,
    entries: list[LocalPoint] | None = None,
) -> CoveragePlan:
    """Full multi-vehicle coverage plan: equal-area partition, alternating
    transects joined by Dubins turns (densified so the autopilot gets at
    least five waypoints per turn), an approach leg from each vehicle's
    entry point, and a return leg home."""
    pieces = partition(area, k)
    k = len(pieces)
    if entries is not None and len(entries) < k:
        raise ValueError(f"need {k} entry points, got {len(entries)}")

    fleet: list[list[PlanLeg]] = []
    tracks: list[list[LocalPoint]] = []
    for vi, piece in enumerate(pieces):
        ts = transects(piece)
        if not ts:
            fleet.append([])
            tracks.append([])
            continue
        entry = entries[vi] if entries is not None else ts[0][0]
        legs: list[PlanLeg] = []

        first_hdg = bearing(ts[0][0], ts[0][1])
        if entry.distance_to(ts[0][0]) > 1e-6:
            approach = dubins_connect(entry, bearing(entry, ts[0][0]), ts[0][0], first_hdg, r_min)
            legs.append(PlanLeg("approach", _turn_leg(approach)))
        for i, (a, b) in enumerate(ts):
            legs.append(PlanLeg("transect", (a, b)))
            if i + 1 < len(ts):
                na, nb = ts[i + 1]
                turn = dubins_connect(b, bearing(a, b), na, bearing(na, nb), r_min)
                legs.append(PlanLeg("turn", _turn_leg(turn)))
        last_a, last_b = ts[-1]
        if last_b.distance_to(entry) > 1e-6:
            ret = dubins_connect(last_b, bearing(last_a, last_b), entry, bearing(last_b, entry), r_min)
            legs.append(PlanLeg("return", _turn_leg(ret)))
        fleet.append(legs)
        track: list[LocalPoint] = []
        for leg in legs:
            for p in leg.points:
                if not track or track[-1].distance_to(p) > 1e-9:
                    track.append(p)
        tracks.append(track)

    ratio = coverage_ratio(area, [t for t in tracks if t])
    return CoveragePlan(fleet, r_min, area.swath, ratio, area)
