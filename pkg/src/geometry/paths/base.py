"""
Base class for the pieces a path in the punctured plane is made of.
"""
from abc import ABC, abstractmethod

import numpy as np


class PathPiece(ABC):
    """Base class for all path pieces"""

    @property
    @abstractmethod
    def parameter_span(self) -> float:
        """
        Length of the parameter interval [0, span].

        Segments are parametrized by arclength, arcs by angle.
        """
        pass

    @abstractmethod
    def point(self, t):
        """
        Position at parameter t.

        Args:
            t: Parameter in [0, parameter_span] (scalar or numpy array)

        Returns:
            Complex position (same shape as t)
        """
        pass

    @abstractmethod
    def velocity(self, t):
        """
        Derivative dz/dt at parameter t.

        Args:
            t: Parameter in [0, parameter_span] (scalar or numpy array)

        Returns:
            Complex derivative (same shape as t)
        """
        pass

    @property
    @abstractmethod
    def length(self) -> float:
        """Euclidean length"""
        pass

    @abstractmethod
    def reversed(self) -> "PathPiece":
        """Same trace, opposite direction"""
        pass

    @abstractmethod
    def subpiece(self, t0: float, t1: float) -> "PathPiece":
        """
        Restriction to the parameter interval [t0, t1].

        Args:
            t0: Start parameter
            t1: End parameter, t0 <= t1

        Returns:
            Piece of the same kind tracing the restricted part
        """
        pass

    @abstractmethod
    def distance_to(self, p: complex) -> float:
        """Euclidean distance from the piece to a finite point"""
        pass

    @abstractmethod
    def to_descriptor(self) -> dict:
        """JSON-friendly description that PathFactory can rebuild the piece from"""
        pass

    @property
    def start(self) -> complex:
        return complex(self.point(0.0))

    @property
    def end(self) -> complex:
        return complex(self.point(self.parameter_span))

    def sample(self, count: int) -> np.ndarray:
        """count >= 2 equally spaced points, both endpoints included"""
        t = np.linspace(0.0, self.parameter_span, max(count, 2))
        return np.asarray(self.point(t), dtype=complex)
