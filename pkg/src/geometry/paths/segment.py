"""
Straight segments, parametrized by arclength.
"""
import numpy as np
from shapely.geometry import LineString, Point

from ...models import encode_complex
from .base import PathPiece


class LineSegment(PathPiece):
    """Segment from start to end"""

    def __init__(self, start: complex, end: complex):
        self._a = complex(start)
        self._b = complex(end)
        self._length = abs(self._b - self._a)
        self._direction = (self._b - self._a) / self._length if self._length > 0 else 0j

    @property
    def parameter_span(self) -> float:
        return self._length

    @property
    def length(self) -> float:
        return self._length

    def point(self, t):
        return self._a + np.asarray(t) * self._direction if np.ndim(t) else self._a + t * self._direction

    def velocity(self, t):
        if np.ndim(t):
            return np.full(np.shape(t), self._direction, dtype=complex)
        return self._direction

    def reversed(self) -> "LineSegment":
        return LineSegment(self._b, self._a)

    def subpiece(self, t0: float, t1: float) -> "LineSegment":
        return LineSegment(self.point(t0), self.point(t1))

    def distance_to(self, p: complex) -> float:
        if self._length == 0:
            return abs(p - self._a)
        line = LineString([(self._a.real, self._a.imag), (self._b.real, self._b.imag)])
        return float(line.distance(Point(p.real, p.imag)))

    @property
    def start(self) -> complex:
        return self._a

    @property
    def end(self) -> complex:
        return self._b

    def to_descriptor(self) -> dict:
        return {"kind": "segment", "start": encode_complex(self._a), "end": encode_complex(self._b)}

    def __repr__(self) -> str:
        return f"LineSegment({self._a!r}, {self._b!r})"
