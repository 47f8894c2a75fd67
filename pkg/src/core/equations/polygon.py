from __future__ import annotations

"""Newton-Puiseux polygon of a difference equation and its predicted growth orders.

Balancing a_k(z) (nu/z)^k between two terms with nu ~ r^chi gives
deg a_i + i(chi - 1) = deg a_j + j(chi - 1), so chi = 1 - s for the slope s
of an upper-hull edge of the points (k, deg a_k).
"""

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from core.equations.equation import DifferenceEquation, format_rational

Point = tuple[int, int]


@dataclass(frozen=True)
class HullSegment:
    slope: Fraction
    start: Point
    end: Point

    @property
    def span(self) -> int:
        return self.end[0] - self.start[0]

    def to_dict(self) -> dict[str, Any]:
        return {
            "slope": format_rational(self.slope),
            "from": list(self.start),
            "to": list(self.end),
        }


@dataclass(frozen=True)
class NewtonPolygon:
    points: tuple[Point, ...]
    vertices: tuple[Point, ...]
    segments: tuple[HullSegment, ...]
    predicted_orders: tuple[Fraction, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "points": [list(p) for p in self.points],
            "vertices": [list(p) for p in self.vertices],
            "segments": [s.to_dict() for s in self.segments],
            "predicted_orders": [format_rational(chi) for chi in self.predicted_orders],
        }


def _slope(a: Point, b: Point) -> Fraction:
    return Fraction(b[1] - a[1], b[0] - a[0])


def upper_hull(points: Sequence[Point]) -> list[Point]:
    """Upper convex hull by Andrew's monotone chain, left to right.

    Collinear middle points are dropped, so edge slopes strictly decrease.
    """
    # one point per abscissa: the highest
    best: dict[int, int] = {}
    for x, y in points:
        if x not in best or y > best[x]:
            best[x] = y
    ordered = sorted(best.items())
    if len(ordered) <= 2:
        return ordered

    vertices: list[Point] = []
    for p in ordered:
        while len(vertices) >= 2 and _slope(vertices[-1], p) >= _slope(vertices[-2], vertices[-1]):
            vertices.pop()
        vertices.append(p)
    return vertices


def hull_segments(points: Sequence[Point]) -> list[HullSegment]:
    vertices = upper_hull(points)
    return [HullSegment(_slope(a, b), a, b) for a, b in zip(vertices, vertices[1:])]


def newton_polygon(eq: DifferenceEquation) -> NewtonPolygon:
    """Points (k, deg a_k), their upper hull, and chi = 1 - s for slopes s in (0, 1)."""
    points = eq.points()
    segments = hull_segments(points)
    orders = tuple(1 - seg.slope for seg in segments if 0 < seg.slope < 1)
    return NewtonPolygon(
        points=tuple(points),
        vertices=tuple(upper_hull(points)),
        segments=tuple(segments),
        predicted_orders=orders,
    )
