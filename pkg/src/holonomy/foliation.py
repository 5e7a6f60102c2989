"""
Local model of the compactified suspension near a puncture.

Leaves of dv/du = -1/(2 pi i u) are v = v0 - log(u/u0)/(2 pi i), the gluing map
(tau, z) -> (e^{2 pi i tau}, z - tau) sends horizontal leaves z = const to those
leaves, and the diagonal section tau = z lands on v = 0.
"""
import cmath
import logging
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.integrate import solve_ivp

from ..errors import OutOfDomain, PathTooCoarse, SingularFiber
from ..geometry.path_factory import PathFactory
from ..geometry.paths import LineSegment, Path
from ..geometry.quaddiff import ParabolicQD
from ..geometry.surface import INFINITY_INDEX, loop_order, peripheral_loops
from ..models import NumericalSettings
from .monodromy import DevelopedGerm, develop_along, holonomy_mobius, loop_monodromy
from .repvar import parabolic_normal_form

logger = logging.getLogger(__name__)

TWO_PI_I = 2j * math.pi
QUARTER_TURN = math.pi / 2
DERIVATIVE_STEP = 1e-4
SAMPLE_SPACING = 0.05


@dataclass(frozen=True)
class LeafState:
    """Point (u, v) of the local model with the accumulated argument of u"""
    u: complex
    v: complex
    branch: float = 0.0
    numeric_residual: float = 0.0

    def __post_init__(self):
        if self.u == 0:
            raise SingularFiber("u = 0 is the singular fibre")
        if abs(self.u) >= 1:
            raise OutOfDomain(f"|u| = {abs(self.u)} is outside the unit disk")


@dataclass(frozen=True)
class GlueCoords:
    tau: complex
    z: complex

    def __post_init__(self):
        if complex(self.tau).imag <= 0:
            raise OutOfDomain(f"tau = {self.tau} is not in the upper half-plane")


UPath = Union[Path, Sequence[complex]]


def _samples(u_path: UPath) -> np.ndarray:
    if isinstance(u_path, Path):
        distance = u_path.distance_to(0j)
        if distance == 0:
            raise SingularFiber("The path passes through u = 0")
        return u_path.sample(SAMPLE_SPACING * distance)
    return np.asarray(list(u_path), dtype=complex)


def _branch_steps(points: np.ndarray) -> np.ndarray:
    if np.any(points == 0):
        raise SingularFiber("The path passes through u = 0")
    if np.any(np.abs(points) >= 1):
        raise OutOfDomain("The path leaves the unit disk")
    steps = np.angle(points[1:] / points[:-1])
    if steps.size and float(np.max(np.abs(steps))) >= QUARTER_TURN:
        raise PathTooCoarse("Consecutive samples turn a quarter turn or more around u = 0")
    return steps


def _numeric_shift(u_path: UPath, points: np.ndarray, rtol: float, atol: float) -> complex:
    """Integral of -du/(2 pi i u) along the path (or the polyline through its samples)"""
    if isinstance(u_path, Path):
        pieces = u_path.pieces
    else:
        pieces = [LineSegment(a, b) for a, b in zip(points, points[1:]) if a != b]
    total = 0j
    for piece in pieces:
        span = piece.parameter_span
        if span == 0:
            continue

        def rhs(t, y, piece=piece):
            return np.array([-piece.velocity(t) / (TWO_PI_I * piece.point(t))])

        sol = solve_ivp(rhs, (0.0, span), np.array([0j]), method="DOP853", rtol=rtol, atol=atol)
        total += sol.y[0, -1]
    return total


def leaf_transport(start: LeafState, u_path: UPath, rtol: float = 1e-12, atol: float = 1e-14) -> LeafState:
    """
    Follow the leaf through `start` over u_path.

    The closed form uses log|u/u0| plus the continuously tracked change of arg u;
    a numeric integration of dv/du along the same path is recorded as residual.

    Raises:
        SingularFiber: the path reaches u = 0
        PathTooCoarse: two consecutive samples differ by a quarter turn or more
        OutOfDomain: the path leaves the unit disk
    """
    points = _samples(u_path)
    if points.size == 0 or abs(points[0] - start.u) > 1e-12 * max(1.0, abs(start.u)):
        raise ValueError(f"u_path must start at u = {start.u}")
    turn = float(np.sum(_branch_steps(points)))
    end = complex(points[-1])
    shift = -(math.log(abs(end / start.u)) + 1j * turn) / TWO_PI_I
    numeric = _numeric_shift(u_path, points, rtol, atol)
    residual = abs(numeric - shift)
    return LeafState(end, start.v + shift, start.branch + turn, max(start.numeric_residual, residual))


def leaf_loop_monodromy(start: LeafState, windings: int) -> LeafState:
    """Closed-form holonomy of k counterclockwise turns: v -> v - k"""
    return replace(start, v=start.v - windings, branch=start.branch + 2.0 * math.pi * windings)


def winding_circle(u: complex, windings: int) -> Path:
    """|windings| turns of the circle |u| = const from u, counterclockwise for positive windings"""
    factory = PathFactory()
    if windings == 0:
        return factory.polyline([u])
    return factory.circle(0j, abs(u), cmath.phase(u), turns=float(windings))


def glue(g: GlueCoords) -> tuple:
    """(tau, z) -> (e^{2 pi i tau}, z - tau); constant on (tau, z) ~ (tau + 1, z + 1)"""
    return cmath.exp(TWO_PI_I * g.tau), complex(g.z - g.tau)


def _five_point(f, x: complex, h: float) -> complex:
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def horizontal_leaf_residual(z: complex, tau_start: complex, tau_end: complex, samples: int = 10) -> float:
    """
    Push the horizontal leaf z = const over the segment tau_start -> tau_end
    through glue and measure the relative defect of dv/du = -1/(2 pi i u).
    """
    worst = 0.0
    direction = tau_end - tau_start
    for t in np.linspace(0.0, 1.0, samples):
        tau = tau_start + t * direction
        u, _ = glue(GlueCoords(tau, z))
        du = _five_point(lambda s: glue(GlueCoords(s, z))[0], tau, DERIVATIVE_STEP)
        dv = _five_point(lambda s: glue(GlueCoords(s, z))[1], tau, DERIVATIVE_STEP)
        expected = -1.0 / (TWO_PI_I * u)
        worst = max(worst, abs(dv / du - expected) / abs(expected))
    return worst


@dataclass(frozen=True)
class HorizontalLeaf:
    z: complex
    tau_start: complex
    tau_end: complex


def random_leaves(count: int, seed: int = 0) -> List[HorizontalLeaf]:
    """Leaves with z in the unit box and tau segments inside 0 <= Re tau < 1, 0.2 <= Im tau <= 1.5"""
    rng = np.random.default_rng(seed)
    leaves = []
    for _ in range(count):
        z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        ends = [complex(rng.uniform(0, 1), rng.uniform(0.2, 1.5)) for _ in range(2)]
        leaves.append(HorizontalLeaf(z, ends[0], ends[1]))
    return leaves


@dataclass
class ConjugacyReport:
    max_residual: float
    samples: int
    passed: bool


def conjugacy_check(leaves: Sequence[HorizontalLeaf], tol: float = 1e-9) -> ConjugacyReport:
    """Worst relative defect of dv/du = -1/(2 pi i u) over the pushed leaves"""
    worst = 0.0
    for leaf in leaves:
        worst = max(worst, horizontal_leaf_residual(leaf.z, leaf.tau_start, leaf.tau_end))
    return ConjugacyReport(worst, len(leaves), worst < tol)


def diagonal_section(taus: Sequence[complex]) -> List[complex]:
    """v along the diagonal section tau = z"""
    return [glue(GlueCoords(tau, tau))[1] for tau in taus]


def glue_separation(samples: int = 200, seed: int = 0) -> float:
    """
    Smallest |glue(a) - glue(b)| / |a - b| over seeded random distinct pairs in
    the strip 0 <= Re tau < 1 (Im tau in [0.1, 2], z in the unit box).
    """
    rng = np.random.default_rng(seed)

    def draw():
        return GlueCoords(complex(rng.uniform(0, 1), rng.uniform(0.1, 2.0)),
                          complex(rng.uniform(-1, 1), rng.uniform(-1, 1)))

    worst = math.inf
    for _ in range(samples):
        a, b = draw(), draw()
        gap = math.hypot(abs(a.tau - b.tau), abs(a.z - b.z))
        if gap == 0:
            continue
        (ua, va), (ub, vb) = glue(a), glue(b)
        worst = min(worst, math.hypot(abs(ua - ub), abs(va - vb)) / gap)
    return worst


@dataclass
class SectionProbe:
    """The developed map near a finite puncture, pushed into the local model"""
    puncture_index: int
    distances: List[float]
    u_moduli: List[float]
    ratios: List[complex]
    v_values: List[complex]

    @property
    def monotone(self) -> bool:
        return all(b < a for a, b in zip(self.u_moduli, self.u_moduli[1:]))

    @property
    def ratio_drift(self) -> float:
        """Relative change of u/(z - p) over the two deepest samples"""
        if len(self.ratios) < 2:
            return math.inf
        return abs(self.ratios[-1] - self.ratios[-2]) / abs(self.ratios[-1])

    def passed(self, drift_tol: float = 0.05) -> bool:
        return self.monotone and self.ratio_drift < drift_tol and max(abs(v) for v in self.v_values) == 0


def compactified_section_probe(qd: ParabolicQD, puncture_index: int,
                               settings: Optional[NumericalSettings] = None, depths: int = 8) -> SectionProbe:
    """
    Approach a finite puncture p along its lasso ray and read the developing map in
    the local model: w = A(D) with A the translation normal form of the peripheral
    holonomy, u = e^{2 pi i w}, and v on the diagonal section.

    Near p one expects |u| -> 0 and u/(z - p) to settle to a non-zero limit.
    """
    if puncture_index == INFINITY_INDEX:
        raise ValueError("The probe runs at finite punctures only")
    settings = settings or NumericalSettings()
    config = qd.config
    loops = peripheral_loops(config)
    loop = loops[loop_order(config).index(puncture_index)]
    germ = DevelopedGerm.standard(config.basepoint)
    holonomy = holonomy_mobius(loop_monodromy(qd, loop, settings).matrix, germ)
    normal_form = parabolic_normal_form(holonomy.matrix, settings.parabolic_tol)

    p = config.punctures[puncture_index]
    radius = config.loop_radius(puncture_index)
    direction = (config.basepoint - p) / abs(config.basepoint - p)
    distances, moduli, ratios, vs = [], [], [], []
    for j in range(1, depths + 1):
        distance = radius / 2 ** j
        z = p + distance * direction
        value = develop_along(qd, germ, PathFactory().segment(config.basepoint, z), settings).value
        w = normal_form(value)
        u = cmath.exp(TWO_PI_I * w)
        # the section is (tau, z) = (w, w) in the glued chart, so v = z - tau
        tau, section_z = w, w
        distances.append(distance)
        moduli.append(abs(u))
        ratios.append(u / (z - p))
        vs.append(section_z - tau)
    logger.debug("section probe at puncture %d: |u| %s", puncture_index, moduli)
    return SectionProbe(puncture_index, distances, moduli, ratios, vs)
