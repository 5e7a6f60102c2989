"""
Parabolic quadratic differentials on punctured spheres and the parameter chart.

A parabolic differential has a double pole with leading coefficient 1/2 at
every puncture:

    Phi(z) = sum_i [ 1 / (2 (z - p_i)^2) + c_i / (z - p_i) ]

over the finite punctures. At infinity the same shape in w = 1/z forces two
linear conditions on the residues c_i: sum c_i = 0 and sum c_i p_i = (2 - n)/2.
"""
import json
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..errors import ChartDimensionError, ConstraintSingular, DegenerateConfiguration, PoleEvaluation
from ..models import decode_complex, decode_point, encode_complex, encode_point, is_infinite
from .surface import INFINITY_INDEX, PunctureConfig, make_config

logger = logging.getLogger(__name__)

POLE_TOL = 1e-14
CONSTRAINT_TOL = 1e-12


class PolarDifferential:
    """
    Rational differential sum 1/(2(z-p)^2) + c/(z-p) with no constraint at infinity.

    With no poles this is Phi = 0; with a single pole at 0 and zero residue it is
    the pure model 1/(2z^2).
    """

    def __init__(self, poles: Sequence[complex], residues: Sequence[complex]):
        if len(poles) != len(residues):
            raise ValueError(f"{len(poles)} poles but {len(residues)} residues")
        self.poles: Tuple[complex, ...] = tuple(complex(p) for p in poles)
        self.residues: Tuple[complex, ...] = tuple(complex(c) for c in residues)

    def evaluate(self, z: complex) -> complex:
        """Pointwise value; fixed summation order so results are reproducible"""
        if is_infinite(z):
            raise PoleEvaluation("Phi is evaluated in the finite chart only")
        total = 0j
        for p, c in zip(self.poles, self.residues):
            d = z - p
            if abs(d) <= POLE_TOL:
                raise PoleEvaluation(f"Phi has a pole at {p}")
            total += 0.5 / (d * d) + c / d
        return total

    __call__ = evaluate

    def pole_clearance(self, z: complex) -> float:
        """Distance from z to the nearest pole (infinite when there are none)"""
        if not self.poles:
            return float("inf")
        return min(abs(z - p) for p in self.poles)


class ParabolicQD(PolarDifferential):
    """Parabolic quadratic differential on the normalized sphere of `config`"""

    def __init__(self, config: PunctureConfig, residues: Sequence[complex], check: bool = True):
        finite = config.finite_punctures
        if len(residues) != len(finite):
            raise ChartDimensionError(f"Expected {len(finite)} residues, got {len(residues)}")
        super().__init__(finite, residues)
        self.config = config
        if check:
            defects = constraint_defects(self)
            if max(abs(d) for d in defects) > CONSTRAINT_TOL * max(1.0, config.n):
                raise ValueError(f"Residues violate the parabolic constraints at infinity: {defects}")

    @property
    def n(self) -> int:
        return self.config.n

    def residue(self, puncture_index: int) -> complex:
        return self.residues[self.config.finite_indices.index(puncture_index)]


@dataclass(frozen=True)
class ParameterPoint:
    """Chart coordinates: n-3 moduli followed by n-3 accessory parameters"""
    theta: Tuple[complex, ...]

    @classmethod
    def of(cls, theta: Sequence[complex], n: int) -> "ParameterPoint":
        if len(theta) != 2 * n - 6:
            raise ChartDimensionError(f"theta has length {len(theta)}, expected 2n-6 = {2 * n - 6}")
        return cls(tuple(complex(t) for t in theta))

    @property
    def n(self) -> int:
        return len(self.theta) // 2 + 3

    @property
    def moduli(self) -> Tuple[complex, ...]:
        return self.theta[: len(self.theta) // 2]

    @property
    def accessory(self) -> Tuple[complex, ...]:
        return self.theta[len(self.theta) // 2:]


@dataclass(frozen=True)
class LaurentData:
    """Coefficients of orders -2, -1, 0 of Phi at a puncture, in the local coordinate"""
    puncture_index: int
    coefficients: Tuple[complex, complex, complex]

    @property
    def leading(self) -> complex:
        return self.coefficients[0]

    @property
    def residue(self) -> complex:
        return self.coefficients[1]


def constraint_matrix(config: PunctureConfig) -> np.ndarray:
    """2 x (n-1) matrix of the two linear conditions on the residues"""
    finite = np.array(config.finite_punctures, dtype=complex)
    return np.vstack([np.ones_like(finite), finite])


def constraint_rhs(config: PunctureConfig) -> np.ndarray:
    return np.array([0.0, (2.0 - config.n) / 2.0], dtype=complex)


def constraint_defects(qd: ParabolicQD) -> np.ndarray:
    """Residuals of both linear conditions"""
    return constraint_matrix(qd.config) @ np.array(qd.residues, dtype=complex) - constraint_rhs(qd.config)


def accessory_dimension(config: PunctureConfig) -> int:
    """Affine dimension of the residue solution space, (n-1) - rank"""
    matrix = constraint_matrix(config)
    return matrix.shape[1] - int(np.linalg.matrix_rank(matrix))


def solve_residue_constraints(config: PunctureConfig, free: Sequence[complex]) -> ParabolicQD:
    """
    Complete the free residues at punctures 4..n to a parabolic differential.

    Args:
        config: Normalized configuration
        free: n-3 residues, for punctures 4..n in order

    Returns:
        ParabolicQD whose residues at 0 and 1 solve the 2x2 pivot system

    Raises:
        ChartDimensionError: `free` does not have n-3 entries
        ConstraintSingular: the pivot system is singular
    """
    if len(free) != config.n - 3:
        raise ChartDimensionError(f"Expected {config.n - 3} free residues, got {len(free)}")
    free = np.array(free, dtype=complex)
    matrix = constraint_matrix(config)
    pivot_cols = [config.finite_indices.index(0), config.finite_indices.index(1)]
    tail_cols = [k for k in range(matrix.shape[1]) if k not in pivot_cols]
    pivot = matrix[:, pivot_cols]
    rhs = constraint_rhs(config) - matrix[:, tail_cols] @ free
    try:
        head = np.linalg.solve(pivot, rhs)
    except np.linalg.LinAlgError as e:
        raise ConstraintSingular(f"Pivot system {pivot.tolist()} is singular") from e
    residues = np.empty(matrix.shape[1], dtype=complex)
    residues[pivot_cols] = head
    residues[tail_cols] = free
    return ParabolicQD(config, residues.tolist())


def from_chart(theta: Sequence[complex], n: int, basepoint: Optional[complex] = None,
               radius_fraction: float = 0.4) -> ParabolicQD:
    """
    Parabolic differential at chart point theta = (moduli, accessory).

    Raises:
        ChartDimensionError: len(theta) != 2n - 6
        DegenerateConfiguration: a modulus collides with 0, 1 or another modulus
    """
    point = ParameterPoint.of(theta, n)
    for k, modulus in enumerate(point.moduli):
        if is_infinite(modulus):
            raise DegenerateConfiguration(f"Modulus {k} is at infinity")
    config = make_config([0j, 1 + 0j, complex("inf")] + list(point.moduli), basepoint, radius_fraction)
    return solve_residue_constraints(config, point.accessory)


def to_chart(qd: ParabolicQD) -> Tuple[complex, ...]:
    """Inverse of from_chart: moduli followed by the free residues"""
    free = [qd.residue(index) for index in range(3, qd.n)]
    return tuple(qd.config.moduli) + tuple(free)


def evaluate(qd: PolarDifferential, z: complex) -> complex:
    """Value of Phi at z; raises PoleEvaluation at a puncture"""
    return qd.evaluate(z)


def laurent_at(qd: ParabolicQD, puncture_index: int) -> LaurentData:
    """
    Orders -2, -1, 0 of Phi at a puncture.

    At a finite puncture the local coordinate is z - p. At infinity it is w = 1/z
    and Phi(z) dz^2 = Phi(1/w) w^-4 dw^2, so order k of the expansion in 1/z lands
    on order k - 4 in w.
    """
    if not 0 <= puncture_index < qd.n:
        raise IndexError(f"No puncture {puncture_index} for n = {qd.n}")
    if puncture_index == INFINITY_INDEX:
        # Coefficient of z^-k in the large-z expansion
        def z_coefficient(k):
            return sum(0.5 * (k - 1) * p ** (k - 2) + c * p ** (k - 1) for p, c in zip(qd.poles, qd.residues))

        coefficients = (z_coefficient(2), z_coefficient(3), z_coefficient(4))
        return LaurentData(puncture_index, tuple(complex(c) for c in coefficients))
    p_k = qd.config.punctures[puncture_index]
    c_k = qd.residue(puncture_index)
    constant = 0j
    for p, c in zip(qd.poles, qd.residues):
        if p == p_k:
            continue
        d = p_k - p
        constant += 0.5 / (d * d) + c / d
    return LaurentData(puncture_index, (0.5 + 0j, c_k, constant))


def to_json(qd: ParabolicQD) -> str:
    """{"punctures": [...], "residues": [...], "basepoint": [...]}; floats keep 17 significant digits"""
    return json.dumps({
        "punctures": [encode_point(p) for p in qd.config.punctures],
        "residues": [encode_complex(c) for c in qd.residues],
        "basepoint": encode_complex(qd.config.basepoint),
    })


def from_json(text: str, radius_fraction: float = 0.4) -> ParabolicQD:
    data = json.loads(text)
    punctures = [decode_point(p) for p in data["punctures"]]
    basepoint = decode_complex(data["basepoint"]) if data.get("basepoint") is not None else None
    config = make_config(punctures, basepoint, radius_fraction)
    return ParabolicQD(config, [decode_complex(c) for c in data["residues"]])
