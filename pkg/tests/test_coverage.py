import math

import numpy as np
import pytest

from asvsim.coverage import (
    SurveyArea,
    partition,
    plan,
    polygon_area,
    transects,
)
from asvsim.geo import LocalPoint
from oracles import polygon_area_reference


def square(side=100.0):
    return SurveyArea(
        (LocalPoint(0, 0), LocalPoint(side, 0), LocalPoint(side, side), LocalPoint(0, side)),
        swath=10.0,
    )


def l_shape():
    # 100x100 square minus its 50x50 north-east quadrant.
    return SurveyArea(
        (
            LocalPoint(0, 0),
            LocalPoint(100, 0),
            LocalPoint(100, 50),
            LocalPoint(50, 50),
            LocalPoint(50, 100),
            LocalPoint(0, 100),
        ),
        swath=10.0,
    )


def raster_coverage_oracle(area: SurveyArea, tracks, cell=2.0) -> float:
    """Independent rasterization: mark every interior cell center within
    half a swath of any track segment (matplotlib-free, brute force)."""
    poly = [(p.east, p.north) for p in area.boundary]
    xs = np.arange(min(x for x, _ in poly) + cell / 2, max(x for x, _ in poly), cell)
    ys = np.arange(min(y for _, y in poly) + cell / 2, max(y for _, y in poly), cell)
    covered = total = 0
    segs = []
    for track in tracks:
        segs.extend(
            (track[i].east, track[i].north, track[i + 1].east, track[i + 1].north)
            for i in range(len(track) - 1)
        )

    def inside(x, y):
        c = False
        n = len(poly)
        for i in range(n):
            x1, y1 = poly[i]
            x2, y2 = poly[(i + 1) % n]
            if (y1 <= y) != (y2 <= y) and x < x1 + (y - y1) * (x2 - x1) / (y2 - y1):
                c = not c
        return c

    def seg_dist(x, y, x1, y1, x2, y2):
        dx, dy = x2 - x1, y2 - y1
        denom = dx * dx + dy * dy
        if denom < 1e-12:
            return math.hypot(x - x1, y - y1)
        t = max(0.0, min(1.0, ((x - x1) * dx + (y - y1) * dy) / denom))
        return math.hypot(x - x1 - t * dx, y - y1 - t * dy)

    half = area.swath / 2
    for x in xs:
        for y in ys:
            if not inside(x, y):
                continue
            total += 1
            if any(seg_dist(x, y, *s) <= half for s in segs):
                covered += 1
    return covered / total if total else 1.0


class TestTransects:
    def test_square_count_and_length(self):
        # Geometry oracle: width / spacing = 100 / 10 -> 10 transects,
        # each clipped to the full 100 m height.
        ts = transects(square())
        assert len(ts) == 10
        for a, b in ts:
            assert a.distance_to(b) == pytest.approx(100.0)
        firsts = sorted(min(a.east, b.east) for a, b in ts)
        assert firsts[0] == pytest.approx(5.0)       # inset swath/2
        assert firsts[-1] == pytest.approx(95.0)
        spacings = np.diff(firsts)
        np.testing.assert_allclose(spacings, 10.0)

    def test_alternating_orientation(self):
        ts = transects(square())
        assert ts[0][0].north < ts[0][1].north       # first runs south -> north
        assert ts[1][0].north > ts[1][1].north       # second runs north -> south

    def test_sliver_collapses_to_centerline(self):
        sliver = SurveyArea(
            (LocalPoint(0, 0), LocalPoint(5, 0), LocalPoint(5, 80), LocalPoint(0, 80)),
            swath=10.0,
        )
        ts = transects(sliver)
        assert len(ts) == 1
        a, b = ts[0]
        assert a.east == pytest.approx(2.5)
        assert b.east == pytest.approx(2.5)

    def test_rotated_square_same_count_east_west(self):
        area = SurveyArea(square().boundary, swath=10.0, transect_heading=math.pi / 2)
        ts = transects(area)
        assert len(ts) == 10
        for a, b in ts:
            assert abs(a.north - b.north) < 1e-9     # segments run east-west
            assert a.distance_to(b) == pytest.approx(100.0)

    def test_clockwise_polygon_normalized(self):
        cw = SurveyArea(tuple(reversed(square().boundary)), swath=10.0)
        assert polygon_area(list(cw.boundary)) > 0


class TestPartition:
    def test_identity_for_k1(self):
        area = square()
        assert partition(area, 1) == [area]

    def test_unit_square_thirds(self):
        pieces = partition(square(), 3)
        total = abs(polygon_area(list(square().boundary)))
        for piece in pieces:
            got = abs(polygon_area(list(piece.boundary)))
            assert got == pytest.approx(total / 3, rel=0.01)

    def test_l_shape_halves_by_area_oracle(self):
        area = l_shape()
        pieces = partition(area, 2)
        total = polygon_area_reference([(p.east, p.north) for p in area.boundary])
        for piece in pieces:
            got = polygon_area_reference([(p.east, p.north) for p in piece.boundary])
            assert got == pytest.approx(total / 2, rel=0.01)

    def test_conservation(self):
        area = square()
        pieces = partition(area, 4)
        total = sum(abs(polygon_area(list(p.boundary))) for p in pieces)
        assert total == pytest.approx(abs(polygon_area(list(area.boundary))), rel=1e-6)

    def test_pieces_disjoint_slabs(self):
        pieces = partition(square(), 2)
        norths0 = [p.north for p in pieces[0].boundary]
        norths1 = [p.north for p in pieces[1].boundary]
        assert max(norths0) <= min(norths1) + 1e-6 or max(norths1) <= min(norths0) + 1e-6

    def test_k_reduced_to_transect_count(self):
        sliver = SurveyArea(
            (LocalPoint(0, 0), LocalPoint(5, 0), LocalPoint(5, 80), LocalPoint(0, 80)),
            swath=10.0,
        )
        with pytest.warns(UserWarning):
            pieces = partition(sliver, 4)
        assert len(pieces) == 1

    def test_k_validation(self):
        with pytest.raises(ValueError):
            partition(square(), 0)


class TestPlan:
    def test_square_single_vehicle_coverage(self):
        result = plan(square(), k=1, r_min=5.0)
        track = [p for p, _ in result.waypoints(0)]
        ratio = raster_coverage_oracle(square(), [track])
        assert ratio >= 0.99

    def test_turn_densification(self):
        result = plan(square(), k=1, r_min=5.0)
        legs = result.vehicles[0]
        turns = [leg for leg in legs if leg.kind == "turn"]
        assert len(turns) == 9
        for turn in turns:
            assert len(turn.points) >= 5

    def test_curvature_feasibility_on_turns(self):
        from test_dubins import circumradius

        result = plan(square(), k=1, r_min=5.0)
        for leg in result.vehicles[0]:
            if leg.kind not in ("turn", "approach", "return"):
                continue
            pts = [(p.east, p.north) for p in leg.points]
            for i in range(len(pts) - 2):
                assert circumradius(pts[i], pts[i + 1], pts[i + 2]) >= 5.0 * 0.98

    def test_three_vehicles_disjoint_transects(self):
        entries = [LocalPoint(-10, -10), LocalPoint(-10, 40), LocalPoint(-10, 80)]
        result = plan(square(), k=3, r_min=5.0, entries=entries)
        assert len(result.vehicles) == 3
        spans = []
        for vi in range(3):
            transect_pts = [p for leg in result.vehicles[vi] if leg.kind == "transect"
                            for p in leg.points]
            norths = [p.north for p in transect_pts]
            spans.append((min(norths), max(norths)))
        spans.sort()
        for (lo1, hi1), (lo2, hi2) in zip(spans, spans[1:]):
            assert hi1 <= lo2 + 1e-6

    def test_plan_length_sanity_bound(self):
        # Loose regression guard for convex polygons.
        area = square()
        result = plan(area, k=1, r_min=5.0)
        a = abs(polygon_area(list(area.boundary)))
        perimeter = sum(
            area.boundary[i].distance_to(area.boundary[(i + 1) % 4]) for i in range(4)
        )
        assert result.total_length(0) <= 1.5 * (a / area.swath + perimeter)

    def test_missions_exported_in_order(self):
        from asvsim.geo import GeoPoint, geo_to_local

        origin = GeoPoint(34.0, -81.0)
        result = plan(square(), k=1, r_min=5.0)
        missions = result.to_missions(origin, speed=4.0)
        assert len(missions) == 1
        assert len(missions[0].waypoints) == len(result.waypoints(0))
        back = geo_to_local(origin, missions[0].waypoints[0].target)
        first = result.waypoints(0)[0][0]
        assert back.distance_to(first) < 1e-6

    def test_internal_ratio_close_to_oracle(self):
        result = plan(square(), k=1, r_min=5.0)
        track = [p for p, _ in result.waypoints(0)]
        oracle = raster_coverage_oracle(square(), [track])
        assert result.coverage_ratio == pytest.approx(oracle, abs=0.02)


class TestValidation:
    def test_degenerate_polygon_rejected(self):
        with pytest.raises(ValueError):
            SurveyArea((LocalPoint(0, 0), LocalPoint(1, 0), LocalPoint(2, 0)), swath=5.0)

    def test_bad_swath_rejected(self):
        with pytest.raises(ValueError):
            SurveyArea(square().boundary, swath=0.0)
