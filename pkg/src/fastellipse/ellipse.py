"""Ellipse parameters and the geometric helpers shared by fitting, rendering and scoring."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EllipseParams:
    """Center, semi-axes (``a >= b > 0``) and orientation in ``[0, pi)``.

    ``theta`` is the angle of the major axis from +x toward +y in raster
    coordinates (y down).  Construction normalizes swapped axes and angles.
    """

    cx: float
    cy: float
    a: float
    b: float
    theta: float = 0.0

    def __post_init__(self):
        a, b, th = float(self.a), float(self.b), float(self.theta)
        if not (a > 0 and b > 0) or not all(map(math.isfinite, (a, b, th, self.cx, self.cy))):
            raise ValueError(f"invalid ellipse parameters {self!r}")
        if b > a:
            a, b = b, a
            th += math.pi / 2
        th = math.fmod(th, math.pi)
        if th < 0:
            th += math.pi
        if th >= math.pi:
            th = 0.0
        object.__setattr__(self, "cx", float(self.cx))
        object.__setattr__(self, "cy", float(self.cy))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "theta", th)

    @classmethod
    def from_degrees(cls, cx, cy, a, b, theta_deg):
        return cls(cx, cy, a, b, math.radians(theta_deg))

    @property
    def theta_deg(self):
        return math.degrees(self.theta)

    @property
    def center(self):
        return self.cx, self.cy

    def to_local(self, x, y):
        """Coordinates of points in the ellipse's own axis frame."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        dx = np.asarray(x, dtype=float) - self.cx
        dy = np.asarray(y, dtype=float) - self.cy
        return c * dx + s * dy, -s * dx + c * dy

    def implicit(self, x, y):
        """``u^2/a^2 + v^2/b^2 - 1``; negative inside."""
        u, v = self.to_local(x, y)
        return (u / self.a) ** 2 + (v / self.b) ** 2 - 1.0

    def approx_distance(self, x, y):
        """Signed first-order (Sampson) distance to the boundary."""
        u, v = self.to_local(x, y)
        f = (u / self.a) ** 2 + (v / self.b) ** 2 - 1.0
        g = 2.0 * np.hypot(u / self.a**2, v / self.b**2)
        return f / np.maximum(g, 1e-12)

    def points(self, n=360, start=0.0, stop=2 * math.pi, endpoint=False):
        phi = np.linspace(start, stop, n, endpoint=endpoint)
        c, s = math.cos(self.theta), math.sin(self.theta)
        u = self.a * np.cos(phi)
        v = self.b * np.sin(phi)
        return np.column_stack((self.cx + c * u - s * v, self.cy + s * u + c * v))

    def bbox(self):
        c, s = math.cos(self.theta), math.sin(self.theta)
        hx = math.hypot(self.a * c, self.b * s)
        hy = math.hypot(self.a * s, self.b * c)
        return self.cx - hx, self.cy - hy, self.cx + hx, self.cy + hy

    def perimeter(self):
        """Ramanujan's second approximation."""
        a, b = self.a, self.b
        h = ((a - b) / (a + b)) ** 2
        return math.pi * (a + b) * (1 + 3 * h / (10 + math.sqrt(4 - 3 * h)))

    def conic(self):
        """Coefficients (A, B, C, D, E, F) of A x^2 + B xy + C y^2 + D x + E y + F = 0."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        ia, ib = 1.0 / self.a**2, 1.0 / self.b**2
        A = c * c * ia + s * s * ib
        B = 2 * c * s * (ia - ib)
        C = s * s * ia + c * c * ib
        x0, y0 = self.cx, self.cy
        D = -2 * A * x0 - B * y0
        E = -B * x0 - 2 * C * y0
        F = A * x0 * x0 + B * x0 * y0 + C * y0 * y0 - 1.0
        return A, B, C, D, E, F


def angle_diff(t1, t2):
    """Distance between two orientations on [0, pi)."""
    d = abs(t1 - t2) % math.pi
    return min(d, math.pi - d)
