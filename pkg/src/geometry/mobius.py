"""
Mobius transformations as unit-determinant 2x2 complex matrices acting on CP^1.
"""
import cmath

import numpy as np

from ..models import INFINITY, is_infinite


def make_sl2(m) -> np.ndarray:
    """Scale a non-singular 2x2 matrix to unit determinant (principal square root)"""
    m = np.asarray(m, dtype=complex)
    det = np.linalg.det(m)
    if det == 0:
        raise ValueError("Singular matrix has no SL(2,C) representative")
    return m / cmath.sqrt(det)


def cross_ratio(z1: complex, z2: complex, z3: complex, z4: complex) -> complex:
    """(z1-z3)(z2-z4) / ((z1-z4)(z2-z3)), with factors containing infinity dropped"""
    num = 1.0 + 0j
    den = 1.0 + 0j
    for a, b, is_num in ((z1, z3, True), (z2, z4, True), (z1, z4, False), (z2, z3, False)):
        if is_infinite(a) or is_infinite(b):
            continue
        if is_num:
            num *= a - b
        else:
            den *= a - b
    if den == 0:
        return INFINITY
    return num / den


class Mobius:
    """Element of SL(2,C) acting on the Riemann sphere by fractional linear maps"""

    def __init__(self, matrix, normalize: bool = True):
        m = np.array(matrix, dtype=complex).reshape(2, 2)
        self.matrix = make_sl2(m) if normalize else m

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(np.eye(2))

    @classmethod
    def translation(cls, t: complex) -> "Mobius":
        """T_t : z -> z + t"""
        return cls([[1, t], [0, 1]])

    @classmethod
    def from_three_points(cls, p0: complex, p1: complex, p2: complex) -> "Mobius":
        """The unique map sending p0 -> 0, p1 -> 1, p2 -> infinity"""
        if is_infinite(p0):
            m = [[0, p1 - p2], [1, -p2]]
        elif is_infinite(p1):
            m = [[1, -p0], [1, -p2]]
        elif is_infinite(p2):
            m = [[1, -p0], [0, p1 - p0]]
        else:
            m = [[p1 - p2, -p0 * (p1 - p2)], [p1 - p0, -p2 * (p1 - p0)]]
        return cls(m)

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.matrix))

    @property
    def trace(self) -> complex:
        return complex(self.matrix[0, 0] + self.matrix[1, 1])

    def inverse(self) -> "Mobius":
        m = self.matrix
        return Mobius([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], normalize=False)

    def __matmul__(self, other: "Mobius") -> "Mobius":
        return Mobius(self.matrix @ other.matrix, normalize=False)

    def __neg__(self) -> "Mobius":
        return Mobius(-self.matrix, normalize=False)

    def conjugate(self, other: "Mobius") -> "Mobius":
        """self . other . self^-1"""
        return self @ other @ self.inverse()

    def __call__(self, p: complex) -> complex:
        """Fractional linear action, total on CP^1"""
        a, b = self.matrix[0]
        c, d = self.matrix[1]
        if is_infinite(p):
            return INFINITY if c == 0 else complex(a / c)
        den = c * p + d
        if den == 0:
            return INFINITY
        return complex((a * p + b) / den)

    def fixed_points(self) -> tuple:
        """Fixed points on CP^1 (one repeated point for parabolic elements)"""
        a, b = self.matrix[0]
        c, d = self.matrix[1]
        if c == 0:
            if a == d:
                return (INFINITY, INFINITY)
            return (INFINITY, complex(b / (d - a)))
        disc = cmath.sqrt((a - d) ** 2 + 4 * b * c)
        return (complex((a - d - disc) / (2 * c)), complex((a - d + disc) / (2 * c)))

    def distance_to_identity(self, projective: bool = True) -> float:
        """Entrywise max distance to Id (or to +-Id when projective)"""
        plus = float(np.max(np.abs(self.matrix - np.eye(2))))
        if not projective:
            return plus
        minus = float(np.max(np.abs(self.matrix + np.eye(2))))
        return min(plus, minus)

    def allclose(self, other: "Mobius", atol: float = 1e-10, projective: bool = True) -> bool:
        same = np.allclose(self.matrix, other.matrix, rtol=0, atol=atol)
        if same or not projective:
            return bool(same)
        return bool(np.allclose(self.matrix, -other.matrix, rtol=0, atol=atol))

    def __repr__(self) -> str:
        return f"Mobius({self.matrix.tolist()!r})"


def as_matrix(m, copy: bool = False) -> np.ndarray:
    """Accept a Mobius, anything with a .matrix, or array-like; return a 2x2 complex array"""
    raw = getattr(m, "matrix", m)
    arr = np.array(raw, dtype=complex) if copy else np.asarray(raw, dtype=complex)
    if arr.shape != (2, 2):
        raise ValueError(f"Expected a 2x2 matrix, got shape {arr.shape}")
    return arr

