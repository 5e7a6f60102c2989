"""
Path pieces and paths in the punctured plane.
"""
from .arc import CircleArc
from .base import PathPiece
from .path import LoopPath, Path, winding_number
from .segment import LineSegment

__all__ = [
    'PathPiece',
    'LineSegment',
    'CircleArc',
    'Path',
    'LoopPath',
    'winding_number',
]
