"""
Paths as ordered pieces, closed loops, and winding numbers.
"""
import math
from typing import Iterable, List, Optional, Sequence

import numpy as np

from ...models import INFINITY, is_infinite
from .base import PathPiece

CONTINUITY_TOL = 1e-9


class Path:
    """Ordered sequence of pieces, each starting where the previous one ends"""

    def __init__(self, pieces: Iterable[PathPiece], start: Optional[complex] = None):
        self.pieces: tuple = tuple(pieces)
        if not self.pieces and start is None:
            raise ValueError("An empty path needs an explicit start point")
        self._start = complex(start) if start is not None else self.pieces[0].start
        for prev, nxt in zip(self.pieces, self.pieces[1:]):
            gap = abs(prev.end - nxt.start)
            if gap > CONTINUITY_TOL * max(1.0, abs(prev.end)):
                raise ValueError(f"Path pieces do not join: gap {gap:.3e} at {prev.end}")

    @property
    def start(self) -> complex:
        return self._start

    @property
    def end(self) -> complex:
        return self.pieces[-1].end if self.pieces else self._start

    @property
    def length(self) -> float:
        return float(sum(piece.length for piece in self.pieces))

    def reversed(self) -> "Path":
        return Path([piece.reversed() for piece in reversed(self.pieces)], start=self.end)

    def __add__(self, other: "Path") -> "Path":
        """Concatenation: traverse self, then other"""
        return Path(self.pieces + other.pieces, start=self.start)

    def distance_to(self, p: complex) -> float:
        if not self.pieces:
            return abs(p - self._start)
        return min(piece.distance_to(p) for piece in self.pieces)

    def clearance(self, points: Sequence[complex]) -> float:
        """Smallest distance from the path to any finite point of `points`"""
        finite = [p for p in points if not is_infinite(p)]
        if not finite:
            return math.inf
        return min(self.distance_to(p) for p in finite)

    def sample(self, spacing: float) -> np.ndarray:
        """Points along the path, consecutive points at most `spacing` apart"""
        chunks: List[np.ndarray] = [np.array([self._start])]
        for piece in self.pieces:
            count = max(2, int(math.ceil(piece.length / spacing)) + 1)
            chunks.append(piece.sample(count)[1:])
        return np.concatenate(chunks)

    def to_descriptors(self) -> List[dict]:
        return [piece.to_descriptor() for piece in self.pieces]


class LoopPath(Path):
    """Closed path based at `base`, meant to wind once around puncture `winds_around`"""

    def __init__(self, pieces: Iterable[PathPiece], base: complex, winds_around: Optional[int] = None):
        super().__init__(pieces, start=base)
        self.base = complex(base)
        self.winds_around = winds_around
        if abs(self.end - self.base) > CONTINUITY_TOL * max(1.0, abs(self.base)):
            raise ValueError(f"Loop does not close: ends at {self.end}, base {self.base}")

    def reversed(self) -> "LoopPath":
        return LoopPath([piece.reversed() for piece in reversed(self.pieces)], self.base, self.winds_around)

    def __add__(self, other: Path) -> Path:
        joined = Path(self.pieces + other.pieces, start=self.start)
        if isinstance(other, LoopPath) and abs(other.base - self.base) < CONTINUITY_TOL:
            return LoopPath(joined.pieces, self.base)
        return joined


def _turning(points: np.ndarray, target: complex) -> float:
    """Total change of arg(z - target) along the polyline through `points`"""
    rel = points - target
    return float(np.sum(np.angle(rel[1:] / rel[:-1])))


def winding_number(path: Path, target: complex, reference: complex = INFINITY) -> float:
    """
    Winding number of a closed path around `target`, measured relative to `reference`.

    On the sphere a winding number needs a second point to be meaningful; with the
    reference at infinity this is the usual plane winding number. Sampling is dense
    enough that arg(z - q) turns by a small angle between samples.
    """
    total = 0.0
    for q, sign in ((target, 1.0), (reference, -1.0)):
        if is_infinite(q):
            continue
        distance = path.distance_to(q)
        if distance == 0:
            raise ValueError(f"Path passes through {q}")
        total += sign * _turning(path.sample(0.05 * distance), q)
    return total / (2.0 * math.pi)
