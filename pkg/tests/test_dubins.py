import math

import numpy as np
import pytest

from asvsim.dubins import dubins_connect, sample_compass, shortest_path_math
from asvsim.geo import LocalPoint
from oracles import dubins_shortest_reference


def circumradius(a, b, c) -> float:
    ab = math.dist(a, b)
    bc = math.dist(b, c)
    ca = math.dist(c, a)
    area2 = abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    if area2 < 1e-12:
        return math.inf
    return ab * bc * ca / (2 * area2)


class TestGeometry:
    def test_adjacent_antiparallel_transects_semicircle(self):
        # Transect ends 2*r apart, headings opposed: one semicircle.
        path = dubins_connect(LocalPoint(0, 100), 0.0, LocalPoint(10, 100), math.pi, 5.0)
        assert path.length == pytest.approx(math.pi * 5.0, abs=1e-9)

    def test_turn_length_for_ten_meter_swath(self):
        # Swath 10 m with 5 m turn radius: the inter-transect turn is
        # exactly 5*pi ~ 15.708 m.
        path = dubins_connect(LocalPoint(20, 0), 0.0, LocalPoint(30, 0), math.pi, 5.0)
        assert path.length == pytest.approx(15.707963267948966, abs=1e-9)

    def test_straight_line_degenerate(self):
        path = dubins_connect(LocalPoint(0, 0), 0.0, LocalPoint(0, 50), 0.0, 5.0)
        assert path.length == pytest.approx(50.0, abs=1e-9)

    def test_end_pose_reproduced(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            a = LocalPoint(rng.uniform(0, 100), rng.uniform(0, 100))
            b = LocalPoint(rng.uniform(0, 100), rng.uniform(0, 100))
            ha, hb = rng.uniform(0, 2 * math.pi, 2)
            path = dubins_connect(a, ha, b, hb, 5.0)
            ex, ey, eth = path.end()
            assert math.hypot(ex - b.east, ey - b.north) < 1e-6
            assert abs((eth - (math.pi / 2 - hb) + math.pi) % (2 * math.pi) - math.pi) < 1e-6

    def test_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            p1 = (rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(0, 2 * math.pi))
            p2 = (rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(0, 2 * math.pi))
            a = shortest_path_math(p1, p2, 5.0).length
            o = dubins_shortest_reference(p1, p2, 5.0)
            assert a == pytest.approx(o, abs=1e-6)

    def test_rejects_nonpositive_radius(self):
        with pytest.raises(ValueError):
            dubins_connect(LocalPoint(0, 0), 0.0, LocalPoint(1, 1), 0.0, 0.0)


class TestSampling:
    def test_samples_respect_curvature_limit(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            a = LocalPoint(rng.uniform(0, 80), rng.uniform(0, 80))
            b = LocalPoint(rng.uniform(0, 80), rng.uniform(0, 80))
            path = dubins_connect(a, rng.uniform(0, 2 * math.pi), b, rng.uniform(0, 2 * math.pi), 5.0)
            pts = [(p.east, p.north) for p, _ in sample_compass(path, 1.0)]
            for i in range(len(pts) - 2):
                r = circumradius(pts[i], pts[i + 1], pts[i + 2])
                assert r >= 5.0 * 0.98

    def test_sample_endpoints(self):
        a, b = LocalPoint(0, 0), LocalPoint(30, 40)
        path = dubins_connect(a, 0.3, b, 2.0, 5.0)
        pts = sample_compass(path, 2.0)
        assert pts[0][0].distance_to(a) < 1e-9
        assert pts[-1][0].distance_to(b) < 1e-6

    def test_sample_spacing_bounded(self):
        path = dubins_connect(LocalPoint(0, 0), 0.0, LocalPoint(40, 40), math.pi, 5.0)
        pts = [p for p, _ in sample_compass(path, 1.5)]
        for i in range(len(pts) - 1):
            assert pts[i].distance_to(pts[i + 1]) <= 1.5 + 1e-6
