"""
Path factory for building pieces, paths and peripheral loops.
"""
import cmath
import math
from typing import Iterable, List, Optional, Sequence

from ..models import decode_complex
from .paths import CircleArc, LineSegment, LoopPath, Path, PathPiece

TWO_PI = 2.0 * math.pi


class PathFactory:
    """Factory for path pieces (from descriptors) and standard loop shapes"""

    def __init__(self):
        self.piece_types = {
            'segment': self._segment_from_descriptor,
            'arc': self._arc_from_descriptor,
        }

    def from_descriptor(self, descriptor: dict) -> PathPiece:
        """
        Build a single piece from its JSON description.

        Args:
            descriptor: {"kind": "segment", "start": [re, im], "end": [re, im]} or
                {"kind": "arc", "center": [re, im], "radius": r, "start_angle": a, "sweep": s}

        Returns:
            The path piece
        """
        kind = descriptor.get('kind')
        builder = self.piece_types.get(kind)
        if builder is None:
            raise ValueError(f"Unknown path piece kind {kind!r}")
        return builder(descriptor)

    def path_from_descriptors(self, descriptors: Iterable[dict]) -> Path:
        return Path([self.from_descriptor(d) for d in descriptors])

    def _segment_from_descriptor(self, descriptor: dict) -> LineSegment:
        return LineSegment(decode_complex(descriptor['start']), decode_complex(descriptor['end']))

    def _arc_from_descriptor(self, descriptor: dict) -> CircleArc:
        return CircleArc(
            decode_complex(descriptor['center']),
            float(descriptor['radius']),
            float(descriptor['start_angle']),
            float(descriptor['sweep']),
        )

    def segment(self, start: complex, end: complex) -> Path:
        return Path([LineSegment(start, end)])

    def polyline(self, points: Sequence[complex]) -> Path:
        """Path through the given points; a single point gives a constant path"""
        if len(points) == 1:
            return Path([], start=points[0])
        return Path([LineSegment(a, b) for a, b in zip(points, points[1:])])

    def circle(self, center: complex, radius: float, start_angle: float = 0.0, turns: float = 1.0) -> Path:
        """Circle (or part of one) starting at center + radius*e^{i*start_angle}; turns > 0 is counterclockwise"""
        return Path([CircleArc(center, radius, start_angle, TWO_PI * turns)])

    def lasso(self, base: complex, center: complex, radius: float, winds_around: Optional[int] = None) -> LoopPath:
        """
        Segment from base toward center, counterclockwise circle of `radius`, segment back.

        Args:
            base: Loop base point
            center: Point the loop winds around
            radius: Circle radius, smaller than |base - center|
            winds_around: Puncture index recorded on the loop

        Returns:
            Closed loop based at `base`
        """
        offset = base - center
        if abs(offset) <= radius:
            raise ValueError("Lasso base lies inside its own circle")
        angle = cmath.phase(offset)
        entry = center + radius * cmath.exp(1j * angle)
        pieces: List[PathPiece] = [
            LineSegment(base, entry),
            CircleArc(center, radius, angle, TWO_PI),
            LineSegment(entry, base),
        ]
        return LoopPath(pieces, base, winds_around)

    def big_circle(self, base: complex, radius: float, entry_angle: float, winds_around: Optional[int] = None) -> LoopPath:
        """
        Ray from base at `entry_angle` out to |z| = radius, clockwise full circle, ray back.

        Seen from infinity this winds once counterclockwise around infinity.
        """
        if abs(base) >= radius:
            raise ValueError("Base point must lie inside the big circle")
        direction = cmath.exp(1j * entry_angle)
        projection = (base.conjugate() * direction).real
        reach = -projection + math.sqrt(projection * projection + radius * radius - abs(base) ** 2)
        entry = base + reach * direction
        pieces: List[PathPiece] = [
            LineSegment(base, entry),
            CircleArc(0j, radius, cmath.phase(entry), -TWO_PI),
            LineSegment(entry, base),
        ]
        return LoopPath(pieces, base, winds_around)
