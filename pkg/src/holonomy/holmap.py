"""
The holonomy map theta -> character, its complex Jacobian, and the probes
built on it (rank, injectivity, fibres of the forgetful map).
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..errors import (
    DegenerateParabolic,
    EmptyInput,
    FiberZeroDimensional,
    HolonomyLabError,
    LiftNotNormalized,
    NotParabolic,
    StencilOutOfDomain,
    ValidityError,
    ZeroDimensionalDomain,
)
from ..geometry.paths import LoopPath
from ..geometry.quaddiff import ParabolicQD, from_chart
from ..geometry.surface import peripheral_loops
from ..models import NumericalSettings
from .monodromy import TransferMatrix, loop_monodromy, normalize_parabolic_lift
from .repvar import Character, RelationResult, max_commutator_defect, relation_check, trace_character

logger = logging.getLogger(__name__)

MAX_RESAMPLE = 20


@dataclass
class HolonomyEvaluation:
    """Everything computed on the way from theta to its character"""
    theta: tuple
    qd: ParabolicQD
    loops: List[LoopPath]
    monodromies: List[TransferMatrix]
    lifts: List[np.ndarray]
    parabolic_defects: List[float]
    relation: RelationResult
    commutator_defect: float
    nonelementary: bool
    character: Optional[Character]
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def raw_traces(self) -> List[complex]:
        return [m.trace for m in self.monodromies]

    @property
    def loop_order(self) -> List[int]:
        return [loop.winds_around for loop in self.loops]


def evaluate_holonomy(theta: Sequence[complex], n: Optional[int] = None,
                      settings: Optional[NumericalSettings] = None,
                      basepoint: Optional[complex] = None, strict: bool = True) -> HolonomyEvaluation:
    """
    Run the pipeline from_chart -> peripheral_loops -> loop_monodromy -> lifts -> character.

    Validity checks (parabolicity, relation, non-elementarity) are collected as
    named failures. With strict=True the first failure raises ValidityError.
    """
    settings = settings or NumericalSettings()
    theta = tuple(complex(t) for t in theta)
    n = n if n is not None else len(theta) // 2 + 3
    qd = from_chart(theta, n, basepoint, settings.loop_radius_fraction)
    loops = peripheral_loops(qd.config)
    monodromies = [loop_monodromy(qd, loop, settings) for loop in loops]

    failures = []
    defects = []
    lifts = []
    for loop, m in zip(loops, monodromies):
        trace = m.trace
        defect = abs(trace * trace - 4.0)
        defects.append(defect)
        try:
            lifts.append(normalize_parabolic_lift(m.matrix, settings.parabolic_tol))
            continue
        except NotParabolic:
            failures.append(f"parabolicity: puncture {loop.winds_around} has |tr^2 - 4| = {defect:.3e}")
        except DegenerateParabolic:
            failures.append(f"parabolicity: monodromy around puncture {loop.winds_around} is +-Id")
        # sign flip only, so the later checks still run
        lifts.append(-m.matrix if trace.real < 0 else m.matrix)

    relation = relation_check(lifts, settings.relation_tol)
    if relation.kind == "Fail":
        failures.append(f"relation: ordered peripheral product is {relation.defect:.3e} from +-Id")
    commutator_defect = max_commutator_defect(lifts)
    nonelementary = commutator_defect > settings.irreducibility_tol
    if not nonelementary:
        failures.append(f"non-elementarity: max |tr[A,B] - 2| = {commutator_defect:.3e}")
    try:
        character = trace_character(lifts)
    except LiftNotNormalized as e:
        failures.append(f"lift: {e}")
        character = None

    evaluation = HolonomyEvaluation(theta, qd, loops, monodromies, lifts, defects, relation,
                                    commutator_defect, nonelementary, character, failures)
    if strict and failures:
        check, _, message = failures[0].partition(": ")
        raise ValidityError(check, message)
    return evaluation


def character_map(theta: Sequence[complex], settings: Optional[NumericalSettings] = None,
                  n: Optional[int] = None, basepoint: Optional[complex] = None) -> Character:
    """Character of the holonomy at theta; raises ValidityError naming the failed check"""
    return evaluate_holonomy(theta, n, settings, basepoint, strict=True).character


@dataclass
class JacobianReport:
    """Singular-value summary of a complex Jacobian"""
    jacobian: np.ndarray
    singular_values: np.ndarray
    rank: int
    condition_ratio: float
    threshold: float
    fd_step: Optional[float] = None
    theta: tuple = ()
    cauchy_riemann_defect: Optional[float] = None

    @property
    def sigma_min(self) -> float:
        return float(self.singular_values[-1]) if self.singular_values.size else 0.0


def rank_report(jacobian, threshold: float = 1e-6) -> JacobianReport:
    """
    Numerical rank: the number of singular values above threshold * sigma_max.

    Raises:
        EmptyInput: the matrix has no entries
    """
    j = np.asarray(jacobian, dtype=complex)
    if j.size == 0:
        raise EmptyInput("Cannot take the rank of an empty matrix")
    sigma = np.linalg.svd(j, compute_uv=False)
    top = float(sigma[0])
    if top == 0:
        return JacobianReport(j, sigma, 0, 0.0, threshold)
    rank = int(np.sum(sigma > threshold * top))
    return JacobianReport(j, sigma, rank, float(sigma[-1]) / top, threshold)


def complex_jacobian(func: Callable[[np.ndarray], np.ndarray], theta: Sequence[complex], fd_step: float):
    """
    Central-difference complex Jacobian of a map C^d -> C^m.

    Each coordinate is perturbed along 1 and i; the partials combine into
    df/dz = (f_x - i f_y)/2, and the Cauchy-Riemann defect is
    |(f_x + i f_y)/2| / |df/dz| over the whole matrix.

    Returns:
        (jacobian, cauchy_riemann_defect)

    Raises:
        StencilOutOfDomain: func fails at a stencil point
    """
    theta = np.asarray(theta, dtype=complex)
    holomorphic = []
    antiholomorphic = []
    for k in range(theta.size):
        partials = []
        for direction in (1.0, 1j):
            step = np.zeros_like(theta)
            step[k] = direction * fd_step
            try:
                plus = np.asarray(func(theta + step), dtype=complex)
                minus = np.asarray(func(theta - step), dtype=complex)
            except HolonomyLabError as e:
                raise StencilOutOfDomain(f"Coordinate {k} stencil left the domain: {e}") from e
            partials.append((plus - minus) / (2.0 * fd_step))
        dx, dy = partials
        holomorphic.append(0.5 * (dx - 1j * dy))
        antiholomorphic.append(0.5 * (dx + 1j * dy))
    jacobian = np.column_stack(holomorphic)
    scale = float(np.linalg.norm(jacobian))
    defect = float(np.linalg.norm(np.column_stack(antiholomorphic))) / scale if scale > 0 else 0.0
    return jacobian, defect


def _fixed_basepoint(theta: Sequence[complex], n: int, settings: NumericalSettings,
                     basepoint: Optional[complex]) -> complex:
    """Basepoint of the center configuration, reused at every nearby point"""
    return from_chart(theta, n, basepoint, settings.loop_radius_fraction).config.basepoint


def jacobian_fd(theta: Sequence[complex], fd_step: Optional[float] = None,
                settings: Optional[NumericalSettings] = None,
                basepoint: Optional[complex] = None) -> JacobianReport:
    """
    Finite-difference Jacobian of the character map at theta, with its rank.

    Raises:
        ZeroDimensionalDomain: theta is empty (n = 3)
        StencilOutOfDomain: a stencil point is not a valid parabolic structure
    """
    settings = settings or NumericalSettings()
    fd_step = fd_step or settings.fd_step
    theta = tuple(complex(t) for t in theta)
    if not theta:
        raise ZeroDimensionalDomain("n = 3: the parameter space is a single point")
    n = len(theta) // 2 + 3
    base = _fixed_basepoint(theta, n, settings, basepoint)

    def func(point):
        return character_map(point, settings, n=n, basepoint=base).values

    jacobian, defect = complex_jacobian(func, theta, fd_step)
    report = rank_report(jacobian, settings.rank_threshold)
    report.fd_step = fd_step
    report.theta = theta
    report.cauchy_riemann_defect = defect
    logger.info("rank %d of %s, sigma ratio %.3e, CR defect %.2e",
                report.rank, jacobian.shape, report.condition_ratio, defect)
    return report


@dataclass
class InjectivityReport:
    pairs: int
    violations: int
    resampled: int
    skipped: int
    sigma_min: float
    seed: int
    exhausted: int = 0


def pair_violation(theta1, theta2, sigma_min: float, func: Callable) -> Optional[bool]:
    """
    True when the images of two distinct points are closer than (sigma_min/2)|theta1 - theta2|.

    Identical points give None (nothing to compare).
    """
    gap = float(np.linalg.norm(np.asarray(theta1, dtype=complex) - np.asarray(theta2, dtype=complex)))
    if gap == 0:
        return None
    distance = float(np.linalg.norm(np.asarray(func(theta1)) - np.asarray(func(theta2))))
    return distance < 0.5 * sigma_min * gap


def _ball_point(rng: np.random.Generator, center: np.ndarray, radius: float) -> np.ndarray:
    """Uniform sample of the complex ball of `radius` around `center`"""
    dim = 2 * center.size
    direction = rng.standard_normal(dim)
    direction /= np.linalg.norm(direction)
    scale = radius * rng.random() ** (1.0 / dim)
    offset = scale * direction
    return center + offset[: center.size] + 1j * offset[center.size:]


def injectivity_probe(theta: Sequence[complex], radius: float = 1e-2, samples: int = 50, seed: int = 0,
                      settings: Optional[NumericalSettings] = None, basepoint: Optional[complex] = None,
                      sigma_min: Optional[float] = None, func: Optional[Callable] = None) -> InjectivityReport:
    """
    Look for collisions of the character map on seeded random pairs in a ball.

    Points where the map is undefined are resampled (and counted); a sample
    that stays outside the domain for MAX_RESAMPLE tries counts as exhausted.
    `func` replaces the character map, mainly for synthetic checks.
    """
    settings = settings or NumericalSettings()
    center = np.asarray([complex(t) for t in theta], dtype=complex)
    if func is None:
        n = center.size // 2 + 3
        base = _fixed_basepoint(tuple(center), n, settings, basepoint)

        def func(point):
            return character_map(point, settings, n=n, basepoint=base).values

    if sigma_min is None:
        sigma_min = rank_report(complex_jacobian(func, center, settings.fd_step)[0], settings.rank_threshold).sigma_min

    rng = np.random.default_rng(seed)
    pairs = violations = resampled = skipped = exhausted = 0
    for _ in range(samples):
        for _attempt in range(MAX_RESAMPLE):
            theta1 = _ball_point(rng, center, radius)
            theta2 = _ball_point(rng, center, radius)
            try:
                verdict = pair_violation(theta1, theta2, sigma_min, func)
            except HolonomyLabError as e:
                logger.debug("resampling pair outside the domain: %s", e)
                resampled += 1
                continue
            if verdict is None:
                skipped += 1
            else:
                pairs += 1
                violations += int(verdict)
            break
        else:
            exhausted += 1
    if exhausted:
        logger.warning("%d of %d samples found no pair inside the domain", exhausted, samples)
    return InjectivityReport(pairs, violations, resampled, skipped, float(sigma_min), seed, exhausted)


@dataclass
class FiberReport:
    fiber_rank: int
    moduli_rank: int
    expected_rank: int


def fiber_probe(theta: Sequence[complex], settings: Optional[NumericalSettings] = None,
                basepoint: Optional[complex] = None, jacobian: Optional[JacobianReport] = None) -> FiberReport:
    """
    Rank of the Jacobian restricted to the accessory columns (a fibre of the
    forgetful map) and, for comparison, to the moduli columns.

    Raises:
        FiberZeroDimensional: n = 3
    """
    settings = settings or NumericalSettings()
    if len(theta) == 0:
        raise FiberZeroDimensional("n = 3: the fibre of the forgetful map is a point")
    report = jacobian or jacobian_fd(theta, settings.fd_step, settings, basepoint)
    half = len(theta) // 2
    fiber = rank_report(report.jacobian[:, half:], settings.rank_threshold).rank
    moduli = rank_report(report.jacobian[:, :half], settings.rank_threshold).rank
    return FiberReport(fiber, moduli, half)


@dataclass(frozen=True)
class DimensionCount:
    """Both sides of the holonomy map for the sphere with n punctures"""
    n: int
    moduli: int
    accessory: int
    hom: int
    parabolic_locus: int
    character_variety: int

    @property
    def domain(self) -> int:
        return self.moduli + self.accessory

    @property
    def balanced(self) -> bool:
        return self.domain == self.character_variety


def dimension_count(n: int) -> DimensionCount:
    """
    Hom(free group on n-1 letters, SL2) has dimension 3(n-1); n trace conditions
    cut the parabolic locus to 2n-3; conjugation removes 3 more.
    """
    if n < 3:
        raise ValueError(f"n must be at least 3, got {n}")
    hom = 3 * (n - 1)
    parabolic = hom - n
    return DimensionCount(n, n - 3, n - 3, hom, parabolic, parabolic - 3)
