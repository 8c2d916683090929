"""Shortest bounded-curvature (Dubins) paths between poses.

All six canonical words are constructed (LSL, RSR, LSR, RSL, RLR, LRL) and
the shortest feasible one wins. Internally the math runs in the standard
counterclockwise-positive convention; the public API speaks the package's
compass convention (heading clockwise from north).

Every candidate is verified by walking its segments and checking that the
end pose is reproduced; a candidate that does not close is discarded, so a
returned path is always geometrically consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geo import Heading, LocalPoint, normalize_heading

TAU = 2.0 * math.pi
_EPS = 1e-9


@dataclass(frozen=True)
class Segment:
    kind: str      # 'L', 'R', or 'S'
    length: float  # arc length in meters (r * angle for turns)


@dataclass(frozen=True)
class DubinsPath:
    word: str
    segments: tuple[Segment, ...]
    r: float
    start: tuple[float, float, float]   # x, y, theta (math convention)

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments)

    def sample(self, step: float) -> list[tuple[float, float, float]]:
        """Poses along the path every ``step`` meters (start and end
        included), math convention."""
        poses = [self.start]
        x, y, th = self.start
        for seg in self.segments:
            n = max(1, int(math.ceil(seg.length / step))) if seg.length > _EPS else 0
            for i in range(1, n + 1):
                poses.append(_advance(x, y, th, seg.kind, seg.length * i / n, self.r))
            x, y, th = _advance(x, y, th, seg.kind, seg.length, self.r)
        return poses

    def end(self) -> tuple[float, float, float]:
        x, y, th = self.start
        for seg in self.segments:
            x, y, th = _advance(x, y, th, seg.kind, seg.length, self.r)
        return (x, y, th)


def _advance(x: float, y: float, th: float, kind: str, length: float, r: float):
    if kind == "S":
        return (x + length * math.cos(th), y + length * math.sin(th), th)
    a = length / r
    if kind == "L":
        th2 = th + a
        return (x + r * (math.sin(th2) - math.sin(th)), y - r * (math.cos(th2) - math.cos(th)), th2)
    th2 = th - a
    return (x - r * (math.sin(th2) - math.sin(th)), y + r * (math.cos(th2) - math.cos(th)), th2)


def _mod2pi(a: float) -> float:
    r = math.fmod(a, TAU)
    if r < 0:
        r += TAU
    # Angles numerically indistinguishable from a full turn mean "no turn".
    if TAU - r < 1e-12:
        r = 0.0
    return r


def _left_center(x, y, th, r):
    return (x - r * math.sin(th), y + r * math.cos(th))


def _right_center(x, y, th, r):
    return (x + r * math.sin(th), y - r * math.cos(th))


def _csc_candidates(p1, p2, r):
    x1, y1, th1 = p1
    x2, y2, th2 = p2
    out = []

    # Same-direction words: straight runs parallel to the center line.
    for word, cfn, arc_in, arc_out in (
        ("LSL", _left_center, lambda a, b: _mod2pi(b - a), lambda a, b: _mod2pi(b - a)),
        ("RSR", _right_center, lambda a, b: _mod2pi(a - b), lambda a, b: _mod2pi(a - b)),
    ):
        c1 = cfn(x1, y1, th1, r)
        c2 = cfn(x2, y2, th2, r)
        dx, dy = c2[0] - c1[0], c2[1] - c1[1]
        d = math.hypot(dx, dy)
        if d < _EPS:
            t = _mod2pi(th2 - th1) if word == "LSL" else _mod2pi(th1 - th2)
            out.append((word, (r * t, 0.0, 0.0)))
            continue
        phi = math.atan2(dy, dx)
        t = arc_in(th1, phi)
        q = arc_out(phi, th2)
        out.append((word, (r * t, d, r * q)))

    # Opposite-direction words: inner tangent needs d >= 2r.
    c1l = _left_center(x1, y1, th1, r)
    c2r = _right_center(x2, y2, th2, r)
    dx, dy = c2r[0] - c1l[0], c2r[1] - c1l[1]
    d = math.hypot(dx, dy)
    if d >= 2.0 * r - 1e-12:
        phi = math.atan2(dy, dx)
        h = phi + math.asin(min(1.0, 2.0 * r / d))
        s = math.sqrt(max(0.0, d * d - 4.0 * r * r))
        out.append(("LSR", (r * _mod2pi(h - th1), s, r * _mod2pi(h - th2))))
    c1r = _right_center(x1, y1, th1, r)
    c2l = _left_center(x2, y2, th2, r)
    dx, dy = c2l[0] - c1r[0], c2l[1] - c1r[1]
    d = math.hypot(dx, dy)
    if d >= 2.0 * r - 1e-12:
        phi = math.atan2(dy, dx)
        h = phi - math.asin(min(1.0, 2.0 * r / d))
        s = math.sqrt(max(0.0, d * d - 4.0 * r * r))
        out.append(("RSL", (r * _mod2pi(th1 - h), s, r * _mod2pi(th2 - h))))
    return out


def _ccc_candidates(p1, p2, r):
    x1, y1, th1 = p1
    x2, y2, th2 = p2
    out = []
    for word, cfn in (("LRL", _left_center), ("RLR", _right_center)):
        c1 = cfn(x1, y1, th1, r)
        c3 = cfn(x2, y2, th2, r)
        dx, dy = c3[0] - c1[0], c3[1] - c1[1]
        d = math.hypot(dx, dy)
        if d < _EPS or d > 4.0 * r + 1e-12:
            continue
        phi = math.atan2(dy, dx)
        gamma = math.acos(min(1.0, d / (4.0 * r)))
        for side in (gamma, -gamma):
            cm = (c1[0] + 2.0 * r * math.cos(phi + side), c1[1] + 2.0 * r * math.sin(phi + side))
            t1 = ((c1[0] + cm[0]) / 2.0, (c1[1] + cm[1]) / 2.0)   # tangency C1/Cm
            t2 = ((cm[0] + c3[0]) / 2.0, (cm[1] + c3[1]) / 2.0)   # tangency Cm/C3
            a_p1 = math.atan2(y1 - c1[1], x1 - c1[0])
            a_t1 = math.atan2(t1[1] - c1[1], t1[0] - c1[0])
            a_t1m = math.atan2(t1[1] - cm[1], t1[0] - cm[0])
            a_t2m = math.atan2(t2[1] - cm[1], t2[0] - cm[0])
            a_t2 = math.atan2(t2[1] - c3[1], t2[0] - c3[0])
            a_p2 = math.atan2(y2 - c3[1], x2 - c3[0])
            if word == "LRL":
                t = _mod2pi(a_t1 - a_p1)
                b = _mod2pi(a_t1m - a_t2m)
                q = _mod2pi(a_p2 - a_t2)
            else:
                t = _mod2pi(a_p1 - a_t1)
                b = _mod2pi(a_t2m - a_t1m)
                q = _mod2pi(a_t2 - a_p2)
            out.append((word, (r * t, r * b, r * q)))
    return out


def _build(word: str, lengths, start, r) -> DubinsPath:
    kinds = {"LSL": "LSL", "RSR": "RSR", "LSR": "LSR", "RSL": "RSL", "LRL": "LRL", "RLR": "RLR"}[word]
    segs = tuple(Segment(k, max(0.0, l)) for k, l in zip(kinds, lengths))
    return DubinsPath(word, segs, r, start)


def shortest_path_math(
    start: tuple[float, float, float], goal: tuple[float, float, float], r: float
) -> DubinsPath:
    """Shortest Dubins path in math convention (theta CCW from +x)."""
    if r <= 0:
        raise ValueError("turn radius must be positive")
    candidates = _csc_candidates(start, goal, r) + _ccc_candidates(start, goal, r)
    best: DubinsPath | None = None
    tol = max(1e-6, 1e-9 * r)
    for word, lengths in candidates:
        path = _build(word, lengths, start, r)
        ex, ey, eth = path.end()
        if math.hypot(ex - goal[0], ey - goal[1]) > tol * 10 + 1e-7:
            continue
        if abs(_mod2pi(eth - goal[2] + math.pi) - math.pi) > 1e-6:
            continue
        if best is None or path.length < best.length:
            best = path
    if best is None:
        raise RuntimeError("no dubins candidate closed on the goal pose")
    return best


def _to_math(p: LocalPoint, psi: Heading) -> tuple[float, float, float]:
    return (p.east, p.north, math.pi / 2.0 - psi)


def dubins_connect(
    end_a: LocalPoint,
    heading_a: Heading,
    start_b: LocalPoint,
    heading_b: Heading,
    r_min: float,
) -> DubinsPath:
    """Shortest bounded-curvature connection from pose A to pose B;
    headings use the compass convention."""
    return shortest_path_math(_to_math(end_a, heading_a), _to_math(start_b, heading_b), r_min)


def sample_compass(path: DubinsPath, step: float) -> list[tuple[LocalPoint, Heading]]:
    """Sample a path back into package conventions."""
    return [
        (LocalPoint(x, y), normalize_heading(math.pi / 2.0 - th))
        for x, y, th in path.sample(step)
    ]
