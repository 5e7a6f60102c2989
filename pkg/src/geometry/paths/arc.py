"""
Circle arcs, parametrized by swept angle.
"""
import cmath
import math

import numpy as np

from ...models import encode_complex
from .base import PathPiece

TWO_PI = 2.0 * math.pi


class CircleArc(PathPiece):
    """
    Arc of the circle |z - center| = radius from start_angle, sweeping `sweep` radians.

    Positive sweep is counterclockwise. A sweep of +-2*pi is a full circle.
    """

    def __init__(self, center: complex, radius: float, start_angle: float, sweep: float):
        if radius <= 0:
            raise ValueError(f"Arc radius must be positive, got {radius}")
        self.center = complex(center)
        self.radius = float(radius)
        self.start_angle = float(start_angle)
        self.sweep = float(sweep)
        self._orientation = 1.0 if sweep >= 0 else -1.0

    @property
    def orientation(self) -> int:
        return int(self._orientation)

    @property
    def parameter_span(self) -> float:
        return abs(self.sweep)

    @property
    def length(self) -> float:
        return self.radius * abs(self.sweep)

    def _phase(self, t):
        return self.start_angle + self._orientation * t

    def point(self, t):
        if np.ndim(t):
            return self.center + self.radius * np.exp(1j * self._phase(np.asarray(t)))
        return self.center + self.radius * cmath.exp(1j * self._phase(t))

    def velocity(self, t):
        if np.ndim(t):
            return 1j * self._orientation * self.radius * np.exp(1j * self._phase(np.asarray(t)))
        return 1j * self._orientation * self.radius * cmath.exp(1j * self._phase(t))

    def reversed(self) -> "CircleArc":
        return CircleArc(self.center, self.radius, self.start_angle + self.sweep, -self.sweep)

    def subpiece(self, t0: float, t1: float) -> "CircleArc":
        return CircleArc(self.center, self.radius, self._phase(t0), self._orientation * (t1 - t0))

    def _covers_angle(self, angle: float) -> bool:
        if abs(self.sweep) >= TWO_PI:
            return True
        offset = (self._orientation * (angle - self.start_angle)) % TWO_PI
        return offset <= abs(self.sweep)

    def distance_to(self, p: complex) -> float:
        offset = p - self.center
        if offset == 0:
            return self.radius
        if self._covers_angle(cmath.phase(offset)):
            return abs(abs(offset) - self.radius)
        return min(abs(p - self.start), abs(p - self.end))

    def to_descriptor(self) -> dict:
        return {
            "kind": "arc",
            "center": encode_complex(self.center),
            "radius": self.radius,
            "start_angle": self.start_angle,
            "sweep": self.sweep,
        }

    def __repr__(self) -> str:
        return f"CircleArc(center={self.center!r}, radius={self.radius!r}, start_angle={self.start_angle!r}, sweep={self.sweep!r})"
