"""Characteristic numbers on lines and conics.

Points are homogeneous triples (x, y, w).  The public functions accept
:class:`HomogeneousPoint` instances or plain 2-/3-sequences; the ``*_xy``
variants are the scalar hot paths used by the detector and take affine
``(x, y)`` tuples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateDecomposition, IdenticalLines, NotOnSide, ParallelChords

# collinearity tolerance for side points, relative to the point magnitudes
SIDE_TOL = 1e-6
# a / |q| below this means q sits on p_next
DEGENERATE_A = 1e-12
# near-parallel chord guard
MIN_W = 1e-8
MAX_REACH = 64.0


@dataclass(frozen=True, slots=True)
class HomogeneousPoint:
    x: float
    y: float
    w: float = 1.0

    def __post_init__(self):
        if self.x == 0 and self.y == 0 and self.w == 0:
            raise ValueError("(0, 0, 0) is not a projective point")

    @classmethod
    def from_xy(cls, x, y):
        return cls(float(x), float(y), 1.0)

    def __iter__(self):
        yield self.x
        yield self.y
        yield self.w

    def __mul__(self, k):
        return HomogeneousPoint(self.x * k, self.y * k, self.w * k)

    __rmul__ = __mul__

    @property
    def is_finite(self):
        return self.w != 0

    def to_xy(self):
        return self.x / self.w, self.y / self.w

    def norm(self):
        return math.sqrt(self.x * self.x + self.y * self.y + self.w * self.w)

    def projectively_equal(self, other, tol=1e-9):
        a = np.array(tuple(self))
        b = np.array(tuple(other))
        c = np.cross(a, b)
        return float(np.linalg.norm(c)) <= tol * float(np.linalg.norm(a) * np.linalg.norm(b))

    def transformed(self, H):
        v = np.asarray(H, dtype=float) @ np.array(tuple(self))
        return HomogeneousPoint(float(v[0]), float(v[1]), float(v[2]))


@dataclass(frozen=True, slots=True)
class SidePointDecomposition:
    """Coefficients with ``q ~ a * p_i + b * p_next``."""

    a: float
    b: float

    @property
    def ratio(self):
        return self.b / self.a


@dataclass(frozen=True)
class ClosedLoop:
    """Polygon ``vertices`` (closed implicitly) with ``n`` points per side.

    ``side_points[i]`` lies on the side from ``vertices[i]`` to
    ``vertices[(i + 1) % r]``.
    """

    vertices: tuple
    side_points: tuple

    def __post_init__(self):
        verts = tuple(as_hpoint(v) for v in self.vertices)
        sides = tuple(tuple(as_hpoint(q) for q in side) for side in self.side_points)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "side_points", sides)
        r = len(verts)
        if r < 2:
            raise ValueError("a closed loop needs at least two vertices")
        if len(sides) != r:
            raise ValueError(f"expected {r} sides of side points, got {len(sides)}")
        counts = {len(s) for s in sides}
        if len(counts) != 1 or 0 in counts:
            raise ValueError("every side must carry the same, nonzero number of points")
        for i, side in enumerate(sides):
            p, nxt = verts[i], verts[(i + 1) % r]
            for q in side:
                if not _on_line(q, p, nxt):
                    raise NotOnSide(f"side point {tuple(q)} is not on side {i}")

    @property
    def r(self):
        return len(self.vertices)

    @property
    def n(self):
        return len(self.side_points[0])


def as_hpoint(p) -> HomogeneousPoint:
    if isinstance(p, HomogeneousPoint):
        return p
    vals = tuple(float(v) for v in p)
    if len(vals) == 2:
        return HomogeneousPoint(vals[0], vals[1], 1.0)
    if len(vals) == 3:
        return HomogeneousPoint(*vals)
    raise ValueError(f"cannot interpret {p!r} as a planar point")


# ---------------------------------------------------------------------------
# scalar primitives on 3-tuples


def _cross(u, v):
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def _det(p, q, r):
    # columns p, q, r
    return (
        p[0] * (q[1] * r[2] - r[1] * q[2])
        - q[0] * (p[1] * r[2] - r[1] * p[2])
        + r[0] * (p[1] * q[2] - q[1] * p[2])
    )


def _norm(u):
    return math.sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2])


def _on_line(q, p, n):
    q, p, n = tuple(q), tuple(p), tuple(n)
    return abs(_det(q, p, n)) <= SIDE_TOL * _norm(q) * _norm(p) * _norm(n)


def _solve_side(q, p, n):
    """Pivoted 2x2 sub-solve of ``a * p + b * n = q``; returns ``(a, b)``."""
    d01 = p[0] * n[1] - p[1] * n[0]
    d02 = p[0] * n[2] - p[2] * n[0]
    d12 = p[1] * n[2] - p[2] * n[1]
    ad01, ad02, ad12 = abs(d01), abs(d02), abs(d12)
    if ad01 >= ad02 and ad01 >= ad12:
        r, s, d = 0, 1, d01
    elif ad02 >= ad12:
        r, s, d = 0, 2, d02
    else:
        r, s, d = 1, 2, d12
    if d == 0.0:
        raise DegenerateDecomposition("side endpoints coincide")
    a = (q[r] * n[s] - q[s] * n[r]) / d
    b = (p[r] * q[s] - p[s] * q[r]) / d
    return a, b


def _ratio(q, p, n):
    a, b = _solve_side(q, p, n)
    if abs(a) * _norm(p) <= DEGENERATE_A * _norm(q):
        raise DegenerateDecomposition("side point coincides with the next vertex")
    return b / a


# ---------------------------------------------------------------------------
# public operations


def det3(p, q, r) -> float:
    """Determinant of the column-stacked homogeneous coordinates."""
    return _det(tuple(as_hpoint(p)), tuple(as_hpoint(q)), tuple(as_hpoint(r)))


def intersect_lines(a1, a2, b1, b2) -> HomogeneousPoint:
    """Meet of line(a1, a2) and line(b1, b2); parallel lines give ``w == 0``."""
    a1, a2, b1, b2 = (tuple(as_hpoint(p)) for p in (a1, a2, b1, b2))
    la = _cross(a1, a2)
    lb = _cross(b1, b2)
    if _norm(la) == 0.0 or _norm(lb) == 0.0:
        raise ValueError("a line needs two distinct points")
    p = _cross(la, lb)
    if _norm(p) <= 1e-12 * _norm(la) * _norm(lb):
        raise IdenticalLines("the two lines coincide")
    return HomogeneousPoint(*p)


def decompose_on_side(q, p_i, p_next) -> SidePointDecomposition:
    q, p_i, p_next = (tuple(as_hpoint(v)) for v in (q, p_i, p_next))
    if not _on_line(q, p_i, p_next):
        raise NotOnSide("point is not collinear with the side")
    a, b = _solve_side(q, p_i, p_next)
    if abs(a) * _norm(p_i) <= DEGENERATE_A * _norm(q):
        raise DegenerateDecomposition("side point coincides with the next vertex")
    return SidePointDecomposition(a, b)


def characteristic_number(loop: ClosedLoop) -> float:
    verts = [tuple(v) for v in loop.vertices]
    r = len(verts)
    cn = 1.0
    for i, side in enumerate(loop.side_points):
        p, nxt = verts[i], verts[(i + 1) % r]
        for q in side:
            cn *= _ratio(tuple(q), p, nxt)
    return cn


def cnl(p1, p2, p3, q1, q2, q3) -> float:
    """Characteristic number of a triangle with one point per side.

    ``q1`` lies on p1p2, ``q2`` on p2p3 and ``q3`` on p3p1.  The value is -1
    exactly when the three side points are collinear.
    """
    return characteristic_number(ClosedLoop((p1, p2, p3), ((q1,), (q2,), (q3,))))


def cross_ratio_cn(a, b, c, d) -> float:
    """Cross ratio (a, b; c, d) of four collinear points as a two-sided loop."""
    return characteristic_number(ClosedLoop((a, b), ((c,), (d,))))


def _flatten_six(points):
    pts = list(points)
    if len(pts) == 3 and all(len(side) == 2 and not isinstance(side, HomogeneousPoint) for side in pts):
        pts = [q for side in pts for q in side]
    if len(pts) != 6:
        raise ValueError("expected six points")
    return [tuple(as_hpoint(q)) for q in pts]


def _cnc(q11, q12, q21, q22, q31, q32, reach):
    c1 = _cross(q11, q12)
    c2 = _cross(q21, q22)
    c3 = _cross(q31, q32)
    p1 = _cross(c3, c1)
    p2 = _cross(c1, c2)
    p3 = _cross(c2, c3)
    for p, la, lb in ((p1, c3, c1), (p2, c1, c2), (p3, c2, c3)):
        np_ = _norm(p)
        if np_ <= 1e-12 * _norm(la) * _norm(lb):
            raise IdenticalLines("two chords coincide")
        if abs(p[2]) < MIN_W * np_:
            raise ParallelChords("chord intersection at infinity")
    if reach is not None:
        cx, cy, limit = reach
        lim2 = limit * limit
        for p in (p1, p2, p3):
            dx = p[0] / p[2] - cx
            dy = p[1] / p[2] - cy
            if dx * dx + dy * dy > lim2:
                raise ParallelChords("chord intersection too far from the points")
    return (
        _ratio(q11, p1, p2)
        * _ratio(q12, p1, p2)
        * _ratio(q21, p2, p3)
        * _ratio(q22, p2, p3)
        * _ratio(q31, p3, p1)
        * _ratio(q32, p3, p1)
    )


def _reach(pts):
    xs = [p[0] / p[2] for p in pts]
    ys = [p[1] / p[2] for p in pts]
    diag = math.hypot(max(xs) - min(xs), max(ys) - min(ys))
    return (0.5 * (max(xs) + min(xs)), 0.5 * (max(ys) + min(ys)), MAX_REACH * diag)


def cnc_from_six(points, guard_far: bool = True) -> float:
    """CNC of six points given as Q1(1), Q1(2), Q2(1), Q2(2), Q3(1), Q3(2).

    Chord i joins Qi(1) and Qi(2); the triangle vertices are the chord
    intersections P1 = <chord3, chord1>, P2 = <chord1, chord2>,
    P3 = <chord2, chord3>.  Returns +1 (up to rounding) when the six points
    lie on one conic.
    """
    pts = _flatten_six(points)
    if guard_far and all(p[2] != 0 for p in pts):
        reach = _reach(pts)
    else:
        reach = None
    return _cnc(*pts, reach)


def cnc_xy(q11, q12, q21, q22, q31, q32) -> float:
    """Hot-path CNC on affine (x, y) tuples, with the far-intersection guard."""
    pts = [(q[0], q[1], 1.0) for q in (q11, q12, q21, q22, q31, q32)]
    xs = [q[0] for q in pts]
    ys = [q[1] for q in pts]
    diag = math.hypot(max(xs) - min(xs), max(ys) - min(ys))
    reach = (0.5 * (max(xs) + min(xs)), 0.5 * (max(ys) + min(ys)), MAX_REACH * diag)
    return _cnc(*pts, reach)


def _conditioned(pts):
    """Affine points moved to zero centroid and mean distance sqrt(2).

    Points at infinity are left as they are (unit-normalized).
    """
    fin = [(p[0] / p[2], p[1] / p[2]) for p in pts if p[2] != 0]
    if len(fin) < 2:
        return [tuple(v / _norm(p) for v in p) for p in pts]
    mx = sum(x for x, _ in fin) / len(fin)
    my = sum(y for _, y in fin) / len(fin)
    spread = sum(math.hypot(x - mx, y - my) for x, y in fin) / len(fin)
    k = math.sqrt(2.0) / spread if spread > 0 else 1.0
    out = []
    for p in pts:
        if p[2] != 0:
            out.append(((p[0] / p[2] - mx) * k, (p[1] / p[2] - my) * k, 1.0))
        else:
            n = _norm(p)
            out.append((p[0] / n, p[1] / n, 0.0))
    return out


def _unit(v):
    n = _norm(v)
    return (v[0] / n, v[1] / n, v[2] / n) if n > 0 else v


def pascal_collinearity_residual(points) -> float:
    """Collinearity residual of the Pascal line of the hexagon.

    The points are first conditioned (centroid to the origin, mean distance
    sqrt(2)); the three meets of opposite sides are then normalized to unit
    length and the absolute determinant of the three is returned.  Near zero
    iff the six points are on one conic.  Built only from cross products, so
    it is independent of :func:`cnc_from_six`.
    """
    q11, q12, q21, q22, q31, q32 = _conditioned(_flatten_six(points))
    r1 = _unit(_cross(_unit(_cross(q22, q31)), _unit(_cross(q12, q11))))
    r2 = _unit(_cross(_unit(_cross(q32, q11)), _unit(_cross(q22, q21))))
    r3 = _unit(_cross(_unit(_cross(q12, q21)), _unit(_cross(q31, q32))))
    return abs(_det(r1, r2, r3))


def apply_homography(H, points: Sequence) -> list:
    return [as_hpoint(p).transformed(H) for p in points]
