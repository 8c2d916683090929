"""Coordinate frames and angle arithmetic shared by every other module.

Conventions (used everywhere in this package, documented only here):

- Headings are radians, clockwise from true north, normalized to [0, 2*pi).
- Local coordinates are meters east/north on a tangent plane anchored at a
  per-scenario origin (equirectangular projection; error is well under
  0.1 m for areas a few km across).
- Boat-frame vectors are (forward, starboard); world-frame vectors are
  (east, north).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0
TAU = 2.0 * math.pi

# Headings and angles are plain floats (radians); the alias is documentation.
Heading = float


@dataclass(frozen=True)
class GeoPoint:
    """WGS84 latitude/longitude in degrees."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise ValueError("geo coordinates must be finite")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class LocalPoint:
    """Meters east/north of the scenario origin."""

    east: float
    north: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.east) and math.isfinite(self.north)):
            raise ValueError("local coordinates must be finite")

    def offset(self, de: float, dn: float) -> "LocalPoint":
        return LocalPoint(self.east + de, self.north + dn)

    def distance_to(self, other: "LocalPoint") -> float:
        return math.hypot(other.east - self.east, other.north - self.north)


@dataclass(frozen=True)
class Vector2:
    """2D vector; (east, north) in the world frame, (forward, starboard)
    in the boat frame — stated at each use site."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("vector components must be finite")

    def __add__(self, other: "Vector2") -> "Vector2":
        return Vector2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vector2") -> "Vector2":
        return Vector2(self.x - other.x, self.y - other.y)

    def scaled(self, k: float) -> "Vector2":
        return Vector2(k * self.x, k * self.y)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]; the result is congruent to ``a`` mod 2*pi."""
    if not math.isfinite(a):
        raise ValueError("angle must be finite")
    r = a - TAU * math.ceil((a - math.pi) / TAU)
    # Guard float edge cases near the boundary.
    if r <= -math.pi:
        r += TAU
    elif r > math.pi:
        r -= TAU
    return r


def normalize_heading(psi: float) -> Heading:
    """Normalize a heading to [0, 2*pi)."""
    if not math.isfinite(psi):
        raise ValueError("heading must be finite")
    r = math.fmod(psi, TAU)
    if r < 0.0:
        r += TAU
    if r >= TAU:
        r = 0.0
    return r


def geo_to_local(origin: GeoPoint, p: GeoPoint) -> LocalPoint:
    """Project ``p`` onto the tangent plane anchored at ``origin``.

    Valid only for deltas under one degree (desk-scale survey areas);
    larger deltas are rejected because the flat-plane approximation breaks.
    """
    dlat = p.lat - origin.lat
    dlon = p.lon - origin.lon
    if abs(dlat) >= 1.0 or abs(dlon) >= 1.0:
        raise ValueError(
            f"point ({p.lat}, {p.lon}) too far from origin for tangent-plane projection"
        )
    east = math.radians(dlon) * EARTH_RADIUS_M * math.cos(math.radians(origin.lat))
    north = math.radians(dlat) * EARTH_RADIUS_M
    return LocalPoint(east, north)


def local_to_geo(origin: GeoPoint, p: LocalPoint) -> GeoPoint:
    """Inverse of :func:`geo_to_local` for the same origin."""
    dlat = math.degrees(p.north / EARTH_RADIUS_M)
    dlon = math.degrees(p.east / (EARTH_RADIUS_M * math.cos(math.radians(origin.lat))))
    return GeoPoint(origin.lat + dlat, origin.lon + dlon)


def boat_to_world(rel: Vector2, psi: Heading, v_ground: Vector2) -> Vector2:
    """Rotate a boat-frame vector (forward, starboard) into the world frame
    and add the carrier's ground velocity.

    Used to turn boat-relative measurements (wind/current sensors) into
    world-frame field vectors.
    """
    s, c = math.sin(psi), math.cos(psi)
    east = rel.x * s + rel.y * c
    north = rel.x * c - rel.y * s
    return Vector2(v_ground.x + east, v_ground.y + north)


def world_to_boat(field_world: Vector2, psi: Heading, v_ground: Vector2) -> Vector2:
    """Express a world-frame field vector relative to a moving boat, in
    (forward, starboard) components. Exact inverse of :func:`boat_to_world`."""
    dx = field_world.x - v_ground.x
    dy = field_world.y - v_ground.y
    s, c = math.sin(psi), math.cos(psi)
    fwd = dx * s + dy * c
    stbd = dx * c - dy * s
    return Vector2(fwd, stbd)


def bearing(frm: LocalPoint, to: LocalPoint) -> Heading:
    """Compass bearing of ``to`` as seen from ``frm``."""
    return normalize_heading(math.atan2(to.east - frm.east, to.north - frm.north))
