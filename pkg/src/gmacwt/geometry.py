"""Planar convex polygons for two-user rate regions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

Point = tuple[float, float]

HULL_TOL = 1e-12
MERGE_TOL = 1e-9


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _drop_flat(ring: list[Point], tol: float) -> list[Point]:
    """Repeatedly remove the vertex with the smallest turn while that turn is <= tol."""
    v = np.asarray(ring, dtype=float)
    while len(v) >= 3:
        a, b = np.roll(v, 1, axis=0), np.roll(v, -1, axis=0)
        cross = (v[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1]) - (v[:, 1] - a[:, 1]) * (b[:, 0] - a[:, 0])
        i = int(np.argmin(cross))
        if cross[i] > tol:
            break
        v = np.delete(v, i, axis=0)
    return [(float(x), float(y)) for x, y in v]


def convex_hull(points: Iterable[Sequence[float]], tol: float = HULL_TOL) -> list[Point]:
    """Andrew's monotone chain.

    Returns the hull counterclockwise starting from the lexicographically
    smallest point, with near-collinear vertices (turn cross product
    <= tol) dropped.  The chain itself pops on exact turns only; the
    tolerance is applied afterwards around the closed ring, because
    applying it inside the chain can pop an extreme point when nearly
    equal x coordinates put near-collinear points out of order.
    """
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) <= 2:
        return pts
    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0.0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0.0:
            upper.pop()
        upper.append(p)
    hull = _drop_flat(lower[:-1] + upper[:-1], tol)
    if len(hull) < 3:
        # (near-)collinear input: keep the two points farthest apart
        a = max(pts, key=lambda q: math.dist(q, pts[0]))
        b = max(pts, key=lambda q: math.dist(q, a))
        return sorted({a, b})
    k = hull.index(min(hull))
    return hull[k:] + hull[:k]


def merge_close(vertices: Sequence[Point], tol: float = MERGE_TOL) -> list[Point]:
    """Drop vertices within ``tol`` of their predecessor (cyclically)."""
    out: list[Point] = []
    for v in vertices:
        if not out or math.dist(v, out[-1]) > tol:
            out.append(v)
    while len(out) > 1 and math.dist(out[0], out[-1]) <= tol:
        out.pop()
    return out


@dataclass(frozen=True)
class Polygon2D:
    """Convex polygon in the (R1, R2) plane, counterclockwise from the origin.

    ``vertices`` is stored open (the first vertex is not repeated); use
    :meth:`closed` for the closed ring.  Degenerate regions are a single
    point or a segment.
    """

    vertices: tuple[Point, ...]

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]]) -> "Polygon2D":
        return cls(tuple(merge_close(convex_hull(points))))

    def closed(self) -> list[Point]:
        v = list(self.vertices)
        return v + v[:1]

    def area(self) -> float:
        v = self.vertices
        if len(v) < 3:
            return 0.0
        return 0.5 * math.fsum(
            v[i][0] * v[(i + 1) % len(v)][1] - v[(i + 1) % len(v)][0] * v[i][1]
            for i in range(len(v)))

    def contains(self, point: Sequence[float], tol: float = 1e-9) -> bool:
        return bool(self.signed_margin(np.asarray(point, dtype=float)[None, :])[0] >= -tol)

    def signed_margin(self, points: np.ndarray) -> np.ndarray:
        """Distance from each point to the polygon boundary; positive inside.

        For degenerate polygons (point or segment) this is minus the distance
        to the set, so it is never positive.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        v = np.asarray(self.vertices, dtype=float)
        if len(v) == 1:
            return -np.linalg.norm(pts - v[0], axis=1)
        if len(v) == 2:
            d = v[1] - v[0]
            t = np.clip((pts - v[0]) @ d / (d @ d), 0.0, 1.0)
            return -np.linalg.norm(pts - (v[0] + t[:, None] * d), axis=1)
        a = v
        b = np.roll(v, -1, axis=0)
        e = b - a
        length = np.linalg.norm(e, axis=1)
        rel = pts[:, None, :] - a[None, :, :]
        cross = e[None, :, 0] * rel[..., 1] - e[None, :, 1] * rel[..., 0]
        return (cross / length[None, :]).min(axis=1)
