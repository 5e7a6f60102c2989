"""
Representation side: parabolicity, non-elementarity, the relation of the
punctured sphere group, and trace coordinates of characters.
"""
import json
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import List, Literal, Sequence, Tuple

import numpy as np

from ..errors import LiftNotNormalized, NotEnoughGenerators, NotParabolic
from ..geometry.mobius import Mobius, as_matrix
from ..models import SCHEMA_VERSION, decode_complex, encode_complex

logger = logging.getLogger(__name__)

LIFT_TOL = 1e-6

__all__ = [
    "Mobius",
    "Character",
    "RelationResult",
    "is_parabolic",
    "commutator_trace",
    "is_nonelementary",
    "max_commutator_defect",
    "relation_check",
    "trace_character",
    "parabolic_normal_form",
    "normalizer_offset",
    "character_to_json",
    "character_from_json",
]


def _trace(m) -> complex:
    a = as_matrix(m)
    return complex(a[0, 0] + a[1, 1])


def is_parabolic(m, tol: float = 1e-8) -> bool:
    """|tr^2 - 4| < tol and m farther than tol from +-Id"""
    a = as_matrix(m)
    trace = _trace(a)
    if abs(trace * trace - 4.0) >= tol:
        return False
    return Mobius(a, normalize=False).distance_to_identity(projective=True) > tol


def commutator_trace(a, b) -> complex:
    """tr(A B A^-1 B^-1)"""
    a = Mobius(as_matrix(a), normalize=False)
    b = Mobius(as_matrix(b), normalize=False)
    return (a @ b @ a.inverse() @ b.inverse()).trace


def max_commutator_defect(generators: Sequence) -> float:
    """Largest |tr[M_i, M_j] - 2| over all pairs"""
    if len(generators) < 2:
        raise NotEnoughGenerators(f"Need at least 2 generators, got {len(generators)}")
    return max(abs(commutator_trace(a, b) - 2.0) for a, b in combinations(generators, 2))


def is_nonelementary(generators: Sequence, tol: float = 1e-6) -> bool:
    """
    Non-elementarity of the group generated by `generators`.

    With a parabolic generator present, the group is elementary exactly when
    every pair of generators has a common fixed point, i.e. tr[A, B] = 2.
    """
    return max_commutator_defect(generators) > tol


@dataclass(frozen=True)
class RelationResult:
    kind: Literal["Id", "MinusId", "Fail"]
    defect: float


def relation_check(monodromies: Sequence, tol: float = 1e-8, projective: bool = False) -> RelationResult:
    """
    Classify the ordered product M_n ... M_1 (loop 1 traversed first).

    The defect is the largest entry of product -+ Id divided by the product of
    the spectral norms of the factors (at least 1).

    With projective=True the comparison ignores the sign, so +-Id both count as Id.
    """
    product = np.eye(2, dtype=complex)
    scale = 1.0
    for m in monodromies:
        matrix = as_matrix(m)
        product = matrix @ product
        scale *= float(np.linalg.norm(matrix, 2))
    scale = max(scale, 1.0)
    plus = float(np.max(np.abs(product - np.eye(2)))) / scale
    minus = float(np.max(np.abs(product + np.eye(2)))) / scale
    if projective:
        defect = min(plus, minus)
        return RelationResult("Id" if defect < tol else "Fail", defect)
    if plus < tol:
        return RelationResult("Id", plus)
    if minus < tol:
        return RelationResult("MinusId", minus)
    return RelationResult("Fail", min(plus, minus))


@dataclass(frozen=True)
class Character:
    """
    Trace coordinates: tr(M_i M_j) for i < j in loop order, then the peripheral traces.
    """
    n: int
    pair_traces: Tuple[complex, ...]
    peripheral_traces: Tuple[complex, ...]

    @property
    def values(self) -> np.ndarray:
        return np.array(self.pair_traces + self.peripheral_traces, dtype=complex)

    def __len__(self) -> int:
        return len(self.pair_traces) + len(self.peripheral_traces)

    def distance(self, other: "Character") -> float:
        return float(np.linalg.norm(self.values - other.values))


def trace_character(monodromies: Sequence) -> Character:
    """
    Character of trace-+2 lifts, of length n(n-1)/2 + n.

    Raises:
        LiftNotNormalized: some input does not have trace +2
    """
    matrices = [as_matrix(m) for m in monodromies]
    for index, m in enumerate(matrices):
        trace = _trace(m)
        if abs(trace - 2.0) > LIFT_TOL:
            raise LiftNotNormalized(f"Lift {index} has trace {trace:.10g}, expected +2")
    pairs = tuple(_trace(matrices[i] @ matrices[j]) for i, j in combinations(range(len(matrices)), 2))
    return Character(len(matrices), pairs, tuple(_trace(m) for m in matrices))


def parabolic_normal_form(m, tol: float = 1e-8) -> Mobius:
    """
    A with A M A^-1 = T_1 (z -> z + 1) for a parabolic M, in PSL(2,C).

    The fixed point of M is A^-1(inf).
    """
    a = as_matrix(m)
    if not is_parabolic(a, tol):
        raise NotParabolic("Only parabolic elements have a translation normal form")
    if _trace(a).real < 0:
        a = -a
    nilpotent = a - np.eye(2)
    candidates = [np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)]
    x = max(candidates, key=lambda v: float(np.linalg.norm(nilpotent @ v)))
    p = np.column_stack([nilpotent @ x, x])
    return Mobius(p).inverse()


def normalizer_offset(a1: Mobius, a2: Mobius, tol: float = 1e-8) -> complex:
    """
    t with A2 A1^-1 = +-T_t, for two normalizers of the same parabolic element.

    Raises:
        NotParabolic: A2 A1^-1 is not a translation
    """
    d = (a2 @ a1.inverse()).matrix
    if d[0, 0].real < 0:
        d = -d
    if abs(d[1, 0]) > tol or abs(d[0, 0] - 1) > tol or abs(d[1, 1] - 1) > tol:
        raise NotParabolic("The two maps do not normalize a common parabolic element")
    return complex(d[0, 1])


def character_to_json(character: Character) -> str:
    return json.dumps({
        "schema_version": SCHEMA_VERSION,
        "n": character.n,
        "values": [encode_complex(v) for v in character.values],
    })


def character_from_json(text: str) -> Character:
    data = json.loads(text)
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"Unsupported character schema {data.get('schema_version')!r}")
    n = int(data["n"])
    values = [decode_complex(v) for v in data["values"]]
    pair_count = n * (n - 1) // 2
    if len(values) != pair_count + n:
        raise ValueError(f"Character for n={n} needs {pair_count + n} values, got {len(values)}")
    return Character(n, tuple(values[:pair_count]), tuple(values[pair_count:]))
