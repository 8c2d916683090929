"""Environment fields: water current, wind, and bathymetry.

Fields are pure functions of position (same input, same output) so that a
simulation run is reproducible. Presets cover the shapes needed at desk
scale (uniform, shear channel, vortex); arbitrary measured fields load
from a gridded text file with bilinear interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geo import GeoPoint, LocalPoint, Vector2, normalize_heading

GRID_MAGIC = "# asvsim environment grid v1"
GRID_LAYERS = ("depth", "current_east", "current_north", "wind_east", "wind_north")


class EnvironmentField:
    """Base interface: world-frame current/wind in m/s, depth in meters
    (positive down). Subclasses must keep sampling pure."""

    max_current: float = 4.0

    def current_at(self, p: LocalPoint) -> Vector2:
        raise NotImplementedError

    def wind_at(self, p: LocalPoint) -> Vector2:
        raise NotImplementedError

    def depth_at(self, p: LocalPoint) -> float:
        raise NotImplementedError

    def _clamp_current(self, v: Vector2) -> Vector2:
        m = v.norm()
        if m > self.max_current > 0.0:
            return v.scaled(self.max_current / m)
        return v


@dataclass(frozen=True)
class DepthPlane:
    """Linear bathymetry: base depth plus east/north slope, floored at zero."""

    base: float = 5.0
    slope_east: float = 0.0
    slope_north: float = 0.0

    def at(self, p: LocalPoint) -> float:
        return max(0.0, self.base + self.slope_east * p.east + self.slope_north * p.north)


@dataclass(frozen=True)
class UniformField(EnvironmentField):
    """Spatially constant current and wind over a planar bathymetry."""

    current: Vector2 = field(default_factory=lambda: Vector2(0.0, 0.0))
    wind: Vector2 = field(default_factory=lambda: Vector2(0.0, 0.0))
    depth: DepthPlane = field(default_factory=DepthPlane)
    max_current: float = 4.0

    def current_at(self, p: LocalPoint) -> Vector2:
        return self._clamp_current(self.current)

    def wind_at(self, p: LocalPoint) -> Vector2:
        return self.wind

    def depth_at(self, p: LocalPoint) -> float:
        return self.depth.at(p)


@dataclass(frozen=True)
class ShearChannelField(EnvironmentField):
    """River-like channel: current flows along ``axis_heading`` with a
    parabolic cross-channel profile, strongest on the centerline.

    ``center`` and ``half_width`` locate the channel; outside it the water
    is still. Wind is uniform.
    """

    axis_heading: float = 0.0
    peak_speed: float = 3.0
    center: LocalPoint = field(default_factory=lambda: LocalPoint(0.0, 0.0))
    half_width: float = 100.0
    wind: Vector2 = field(default_factory=lambda: Vector2(0.0, 0.0))
    depth: DepthPlane = field(default_factory=DepthPlane)
    max_current: float = 4.0

    def current_at(self, p: LocalPoint) -> Vector2:
        psi = normalize_heading(self.axis_heading)
        ax_e, ax_n = math.sin(psi), math.cos(psi)
        # Signed cross-channel offset (positive starboard of the axis).
        dx, dy = p.east - self.center.east, p.north - self.center.north
        cross = dx * ax_n - dy * ax_e
        frac = 1.0 - (cross / self.half_width) ** 2
        if frac <= 0.0:
            return Vector2(0.0, 0.0)
        speed = self.peak_speed * frac
        return self._clamp_current(Vector2(speed * ax_e, speed * ax_n))

    def wind_at(self, p: LocalPoint) -> Vector2:
        return self.wind

    def depth_at(self, p: LocalPoint) -> float:
        return self.depth.at(p)


@dataclass(frozen=True)
class VortexField(EnvironmentField):
    """Rankine vortex: solid-body rotation inside ``core_radius``, decaying
    circulation outside. Positive ``peak_speed`` circulates counterclockwise."""

    center: LocalPoint = field(default_factory=lambda: LocalPoint(0.0, 0.0))
    peak_speed: float = 1.5
    core_radius: float = 50.0
    wind: Vector2 = field(default_factory=lambda: Vector2(0.0, 0.0))
    depth: DepthPlane = field(default_factory=DepthPlane)
    max_current: float = 4.0

    def current_at(self, p: LocalPoint) -> Vector2:
        dx, dy = p.east - self.center.east, p.north - self.center.north
        r = math.hypot(dx, dy)
        if r < 1e-9:
            return Vector2(0.0, 0.0)
        if r <= self.core_radius:
            speed = self.peak_speed * r / self.core_radius
        else:
            speed = self.peak_speed * self.core_radius / r
        # Tangential direction, counterclockwise.
        return self._clamp_current(Vector2(-dy / r * speed, dx / r * speed))

    def wind_at(self, p: LocalPoint) -> Vector2:
        return self.wind

    def depth_at(self, p: LocalPoint) -> float:
        return self.depth.at(p)


class GridField(EnvironmentField):
    """Bilinear interpolation over a regular grid of field samples.

    Grid values sit at cell centers: cell (row, col) is centered at
    ``(col + 0.5) * cell_size`` east, ``(row + 0.5) * cell_size`` north of
    the grid origin. Queries are clamped to the grid hull. NaN cells (gaps
    in a measured grid) are treated as zero.
    """

    def __init__(
        self,
        origin: GeoPoint,
        cell_size: float,
        layers: dict[str, np.ndarray],
        max_current: float = 4.0,
    ):
        if cell_size <= 0:
            raise ValueError("cell_size must be positive")
        shapes = {a.shape for a in layers.values()}
        if len(shapes) != 1:
            raise ValueError("all grid layers must share one shape")
        missing = [name for name in GRID_LAYERS if name not in layers]
        if missing:
            raise ValueError(f"grid layers missing: {missing}")
        self.origin = origin
        self.cell_size = float(cell_size)
        self.layers = {k: np.nan_to_num(np.asarray(v, dtype=float)) for k, v in layers.items()}
        self.rows, self.cols = next(iter(shapes))
        self.max_current = max_current

    def _interp(self, layer: str, p: LocalPoint) -> float:
        a = self.layers[layer]
        # Fractional cell-center coordinates, clamped to the hull.
        fc = min(max(p.east / self.cell_size - 0.5, 0.0), self.cols - 1.0)
        fr = min(max(p.north / self.cell_size - 0.5, 0.0), self.rows - 1.0)
        c0, r0 = int(fc), int(fr)
        c1, r1 = min(c0 + 1, self.cols - 1), min(r0 + 1, self.rows - 1)
        tc, tr = fc - c0, fr - r0
        top = a[r0, c0] * (1 - tc) + a[r0, c1] * tc
        bot = a[r1, c0] * (1 - tc) + a[r1, c1] * tc
        return float(top * (1 - tr) + bot * tr)

    def current_at(self, p: LocalPoint) -> Vector2:
        return self._clamp_current(
            Vector2(self._interp("current_east", p), self._interp("current_north", p))
        )

    def wind_at(self, p: LocalPoint) -> Vector2:
        return Vector2(self._interp("wind_east", p), self._interp("wind_north", p))

    def depth_at(self, p: LocalPoint) -> float:
        return max(0.0, self._interp("depth", p))

    @classmethod
    def load(cls, path: str | Path) -> "GridField":
        return read_grid_file(path)

    def save(self, path: str | Path) -> None:
        write_grid_file(path, self.origin, self.cell_size, self.layers)


def write_grid_file(
    path: str | Path, origin: GeoPoint, cell_size: float, layers: dict[str, np.ndarray]
) -> None:
    """Write the self-describing text grid format (see docs/FORMATS.md)."""
    first = np.asarray(layers[GRID_LAYERS[0]])
    rows, cols = first.shape
    lines = [
        GRID_MAGIC,
        f"origin_lat {origin.lat!r}",
        f"origin_lon {origin.lon!r}",
        f"cell_size {float(cell_size)!r}",
        f"rows {rows}",
        f"cols {cols}",
    ]
    for name in GRID_LAYERS:
        a = np.asarray(layers[name], dtype=float)
        lines.append(f"layer {name}")
        for r in range(rows):
            lines.append(" ".join(repr(float(v)) for v in a[r]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid_file(path: str | Path) -> GridField:
    text = Path(path).read_text().splitlines()
    if not text or text[0].strip() != GRID_MAGIC:
        raise ValueError(f"{path}: not an environment grid file")
    header: dict[str, str] = {}
    i = 1
    while i < len(text) and not text[i].startswith("layer "):
        key, _, value = text[i].partition(" ")
        header[key] = value.strip()
        i += 1
    try:
        origin = GeoPoint(float(header["origin_lat"]), float(header["origin_lon"]))
        cell_size = float(header["cell_size"])
        rows, cols = int(header["rows"]), int(header["cols"])
    except KeyError as e:
        raise ValueError(f"{path}: missing header field {e}") from None
    layers: dict[str, np.ndarray] = {}
    while i < len(text):
        name = text[i].split(" ", 1)[1].strip()
        block = text[i + 1 : i + 1 + rows]
        if len(block) < rows:
            raise ValueError(f"{path}: layer {name} truncated")
        layers[name] = np.array([[float(v) for v in line.split()] for line in block])
        if layers[name].shape != (rows, cols):
            raise ValueError(f"{path}: layer {name} has wrong shape")
        i += 1 + rows
    return GridField(origin, cell_size, layers)
