"""Simulated depth sonar, anemometer, and surface-current sensing.

Raw vector measurements are boat-relative (the instruments ride the hull);
transforming them into the world frame needs the vehicle's heading and
ground velocity at sample time, so samples are always logged alongside
vehicle state. Sonar picks up speed-dependent aeration artifacts: at
planing speed a slice of readings comes back undefined or erratically
high, and the erratic-high ones arrive flagged Ok — the downstream filter
has to catch them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .environment import EnvironmentField, write_grid_file
from .geo import GeoPoint, Heading, LocalPoint, Vector2, boat_to_world, geo_to_local, world_to_boat
from .protocol import SensorKind
from .vehicle import VehicleState


class SampleQuality(enum.IntEnum):
    OK = 0
    SUSPECT = 1
    UNDEFINED = 2


@dataclass(frozen=True)
class SensorSample:
    t: float
    pos: GeoPoint
    psi: Heading
    kind: SensorKind
    values: tuple[float, ...]      # depth: (m,). wind/current: (forward, starboard) m/s
    quality: SampleQuality = SampleQuality.OK

    def __post_init__(self) -> None:
        if (
            self.kind is SensorKind.DEPTH
            and self.quality is not SampleQuality.UNDEFINED
            and self.values
            and self.values[0] < 0
        ):
            raise ValueError("depth readings are non-negative unless undefined")


@dataclass(frozen=True)
class AerationModel:
    """Probability of a corrupted sonar return as a function of speed
    through the water: zero up to ``onset_speed``, rising linearly to
    ``max_rate`` at ``v_max``."""

    onset_speed: float = 2.0
    max_rate: float = 0.15
    v_max: float = 6.03

    def rate(self, v_water: float) -> float:
        if v_water <= self.onset_speed or self.v_max <= self.onset_speed:
            return 0.0
        frac = (v_water - self.onset_speed) / (self.v_max - self.onset_speed)
        return self.max_rate * min(frac, 1.0)


def sample_depth(
    env: EnvironmentField,
    state: VehicleState,
    origin: GeoPoint,
    rng: np.random.Generator,
    noise_sd: float = 0.05,
    aeration: AerationModel | None = None,
) -> SensorSample:
    """One sonar ping at the vehicle's position.

    Corrupted pings are either Undefined (no return) or erratically high
    (2-10x the true depth) — and the erratic-high ones are NOT marked, by
    design: the real instrument cannot tell either.
    """
    aeration = aeration or AerationModel()
    geo = _to_geo(origin, state.pos)
    true_depth = env.depth_at(state.pos)
    if rng.random() < aeration.rate(state.v_water):
        if rng.random() < 0.5:
            return SensorSample(state.t, geo, state.psi, SensorKind.DEPTH, (), SampleQuality.UNDEFINED)
        bogus = true_depth * rng.uniform(2.0, 10.0)
        return SensorSample(state.t, geo, state.psi, SensorKind.DEPTH, (float(bogus),))
    reading = max(0.0, true_depth + rng.normal(0.0, noise_sd) if noise_sd > 0 else true_depth)
    return SensorSample(state.t, geo, state.psi, SensorKind.DEPTH, (float(reading),))


def measure_relative(
    env: EnvironmentField, state: VehicleState, kind: SensorKind, v_ground: Vector2
) -> Vector2:
    """Raw (forward, starboard) reading: the field as seen from the moving
    boat. Inverse of the boat-to-world transform, so round-tripping a
    noiseless sample recovers the true field vector."""
    if kind is SensorKind.WIND:
        field_world = env.wind_at(state.pos)
    elif kind is SensorKind.CURRENT:
        field_world = env.current_at(state.pos)
    else:
        raise ValueError("relative measurement applies to wind and current only")
    return world_to_boat(field_world, state.psi, v_ground)


def sample_field(
    env: EnvironmentField,
    state: VehicleState,
    origin: GeoPoint,
    kind: SensorKind,
    v_ground: Vector2,
    rng: np.random.Generator,
    noise_sd: float = 0.1,
) -> SensorSample:
    """Wind or current sample: boat-frame (forward, starboard) plus noise."""
    rel = measure_relative(env, state, kind, v_ground)
    fwd = rel.x + (rng.normal(0.0, noise_sd) if noise_sd > 0 else 0.0)
    stbd = rel.y + (rng.normal(0.0, noise_sd) if noise_sd > 0 else 0.0)
    return SensorSample(state.t, _to_geo(origin, state.pos), state.psi, kind, (float(fwd), float(stbd)))


def to_world(sample: SensorSample, v_ground: Vector2) -> Vector2:
    """World-frame field vector for a wind/current sample, using the
    heading logged with the sample and the vehicle ground velocity at
    sample time. Raises if the caller lost the ground-velocity record."""
    if sample.kind is SensorKind.DEPTH:
        raise ValueError("depth samples have no frame transform")
    if v_ground is None:
        raise ValueError("samples must be paired with the logged ground velocity")
    rel = Vector2(sample.values[0], sample.values[1])
    return boat_to_world(rel, sample.psi, v_ground)


def _to_geo(origin: GeoPoint, pos: LocalPoint) -> GeoPoint:
    from .geo import local_to_geo

    return local_to_geo(origin, pos)


MAD_SIGMA = 1.4826   # consistency factor: sigma estimate = 1.4826 * MAD


def filter_outliers(window: list[SensorSample], mad_k: float = 4.0, span: int = 9) -> list[SensorSample]:
    """Flag erratic readings in a time-ordered sample series.

    Each sample is judged against the trailing ``span`` usable readings
    (itself included): deviation from the window median beyond ``mad_k``
    sigma-equivalents (1.4826 * MAD) marks it Suspect. The scale estimate
    pools the last 5 windows' worth of accepted deviations — a bare
    9-sample MAD scatters enough to blow the false-positive budget.
    Undefined samples are passed through (they are always excluded
    downstream anyway). Series shorter than 3 usable samples pass through
    untouched.
    """
    out: list[SensorSample] = []
    trail: list[float] = []
    dev_pool: list[float] = []
    for s in window:
        if s.quality is SampleQuality.UNDEFINED or not s.values:
            out.append(s)
            continue
        x = s.values[0]
        trail.append(x)
        if len(trail) > span:
            trail.pop(0)
        if len(trail) < 3:
            out.append(s)
            continue
        med = float(np.median(trail))
        dev = abs(x - med)
        if len(dev_pool) >= span:
            scale = float(np.median(dev_pool))
        else:
            scale = float(np.median(np.abs(np.asarray(trail) - med)))
        if dev > mad_k * MAD_SIGMA * scale:
            out.append(
                SensorSample(s.t, s.pos, s.psi, s.kind, s.values, SampleQuality.SUSPECT)
            )
            # Keep the outlier out of the trailing stats so a burst of
            # corruption cannot drag the window with it.
            trail.pop()
        else:
            out.append(s)
            dev_pool.append(dev)
            if len(dev_pool) > 5 * span:
                dev_pool.pop(0)
    return out


@dataclass
class DepthGrid:
    """Gridded mean depth. ``cells`` is row-major (north up); NaN = empty.
    ``counts`` gives contributing samples per cell; interpolated cells
    keep count 0."""

    origin: GeoPoint               # geo position of the (0, 0) cell corner
    cell_size: float
    cells: np.ndarray
    counts: np.ndarray
    local_anchor: LocalPoint = field(default_factory=lambda: LocalPoint(0.0, 0.0))

    @property
    def rows(self) -> int:
        return self.cells.shape[0]

    @property
    def cols(self) -> int:
        return self.cells.shape[1]

    def cell_center(self, row: int, col: int) -> LocalPoint:
        return LocalPoint(
            self.local_anchor.east + (col + 0.5) * self.cell_size,
            self.local_anchor.north + (row + 0.5) * self.cell_size,
        )

    def save(self, path) -> None:
        """Export in the environment grid text format (depth layer only;
        flow/wind layers zeroed) so it can be loaded back as a field."""
        zero = np.zeros_like(self.cells)
        write_grid_file(
            path,
            self.origin,
            self.cell_size,
            {
                "depth": self.cells,
                "current_east": zero,
                "current_north": zero,
                "wind_east": zero,
                "wind_north": zero,
            },
        )


def grid_depth(
    samples: list[SensorSample],
    cell_size: float,
    origin: GeoPoint,
    idw_neighbors: int = 8,
    idw_radius_cells: float = 5.0,
) -> DepthGrid:
    """Bin Ok depth samples into cell means; fill holes by inverse-distance
    weighting from nearby populated cells (within ``idw_radius_cells``),
    leaving far cells empty."""
    usable = [
        s
        for s in samples
        if s.kind is SensorKind.DEPTH and s.quality is SampleQuality.OK and s.values
    ]
    if not usable:
        return DepthGrid(origin, cell_size, np.full((0, 0), np.nan), np.zeros((0, 0), dtype=int))

    pts = np.array([_local(origin, s) for s in usable])
    depths = np.array([s.values[0] for s in usable])
    anchor_e = math.floor(pts[:, 0].min() / cell_size) * cell_size
    anchor_n = math.floor(pts[:, 1].min() / cell_size) * cell_size
    cols = int(np.floor((pts[:, 0].max() - anchor_e) / cell_size)) + 1
    rows = int(np.floor((pts[:, 1].max() - anchor_n) / cell_size)) + 1

    sums = np.zeros((rows, cols))
    counts = np.zeros((rows, cols), dtype=int)
    ci = np.floor((pts[:, 0] - anchor_e) / cell_size).astype(int).clip(0, cols - 1)
    ri = np.floor((pts[:, 1] - anchor_n) / cell_size).astype(int).clip(0, rows - 1)
    np.add.at(sums, (ri, ci), depths)
    np.add.at(counts, (ri, ci), 1)
    cells = np.full((rows, cols), np.nan)
    populated = counts > 0
    cells[populated] = sums[populated] / counts[populated]

    # IDW fill for holes near data.
    pr, pc = np.nonzero(populated)
    if len(pr):
        pvals = cells[pr, pc]
        for r, c in zip(*np.nonzero(~populated)):
            d2 = (pr - r) ** 2 + (pc - c) ** 2
            near = d2 <= idw_radius_cells**2
            if not near.any():
                continue
            idx = np.argsort(d2[near])[:idw_neighbors]
            d2n = d2[near][idx].astype(float)
            w = 1.0 / np.maximum(d2n, 0.25)
            cells[r, c] = float(np.sum(w * pvals[near][idx]) / np.sum(w))

    from .geo import local_to_geo

    grid_origin = local_to_geo(origin, LocalPoint(anchor_e, anchor_n))
    return DepthGrid(grid_origin, cell_size, cells, counts, LocalPoint(anchor_e, anchor_n))


def _local(origin: GeoPoint, s: SensorSample) -> tuple[float, float]:
    p = geo_to_local(origin, s.pos)
    return (p.east, p.north)


_KIND_NAMES = {SensorKind.DEPTH: "depth", SensorKind.WIND: "wind", SensorKind.CURRENT: "current"}
_KIND_BY_NAME = {v: k for k, v in _KIND_NAMES.items()}
_QUALITY_NAMES = {SampleQuality.OK: "ok", SampleQuality.SUSPECT: "suspect", SampleQuality.UNDEFINED: "undefined"}
_QUALITY_BY_NAME = {v: k for k, v in _QUALITY_NAMES.items()}


def format_sample(sample: SensorSample, sys_id: int) -> str:
    """One sample-log line: t sys_id lat lon psi kind values quality
    (values comma-separated, '-' when undefined)."""
    values = ",".join(repr(v) for v in sample.values) if sample.values else "-"
    return (
        f"{sample.t!r} {sys_id} {sample.pos.lat!r} {sample.pos.lon!r} "
        f"{sample.psi!r} {_KIND_NAMES[sample.kind]} {values} {_QUALITY_NAMES[sample.quality]}"
    )


def parse_sample(line: str) -> tuple[SensorSample, int]:
    parts = line.split()
    if len(parts) != 8:
        raise ValueError(f"bad sample line: {line!r}")
    t, sys_id, lat, lon, psi, kind, values, quality = parts
    vals = () if values == "-" else tuple(float(v) for v in values.split(","))
    return (
        SensorSample(
            float(t),
            GeoPoint(float(lat), float(lon)),
            float(psi),
            _KIND_BY_NAME[kind],
            vals,
            _QUALITY_BY_NAME[quality],
        ),
        int(sys_id),
    )
