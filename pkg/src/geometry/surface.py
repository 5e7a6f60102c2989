"""
Marked punctured spheres: normalization, basepoint choice and peripheral loops.
"""
import cmath
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from shapely.geometry import LineString, MultiPoint, Point

from ..errors import DegenerateConfiguration, GeometryError, TooFewPunctures
from ..models import INFINITY, is_infinite
from .mobius import Mobius
from .path_factory import PathFactory
from .paths import LoopPath, winding_number

logger = logging.getLogger(__name__)

INFINITY_INDEX = 2
DUPLICATE_TOL = 1e-12
GRID_SIZE = 41
WINDING_TOL = 1e-6


@dataclass(frozen=True)
class PunctureConfig:
    """
    Normalized punctured sphere: punctures (0, 1, inf, l4, ..., ln), a basepoint
    and one lasso radius per finite puncture (aligned with `finite_indices`).
    """
    punctures: Tuple[complex, ...]
    basepoint: complex
    loop_radii: Tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.punctures)

    @property
    def finite_indices(self) -> Tuple[int, ...]:
        return tuple(i for i, p in enumerate(self.punctures) if not is_infinite(p))

    @property
    def finite_punctures(self) -> Tuple[complex, ...]:
        return tuple(self.punctures[i] for i in self.finite_indices)

    @property
    def moduli(self) -> Tuple[complex, ...]:
        """Positions of punctures 4..n, the Teichmuller coordinates of the chart"""
        return self.punctures[3:]

    @property
    def infinity_radius(self) -> float:
        """Radius of the circle carrying the loop around infinity"""
        return 2.0 * max(abs(p) for p in self.finite_punctures) + 1.0

    def loop_radius(self, index: int) -> float:
        return self.loop_radii[self.finite_indices.index(index)]


def _check_distinct(points: Sequence[complex]):
    if len(points) < 3:
        raise TooFewPunctures(f"Need at least 3 punctures, got {len(points)}")
    for i, p in enumerate(points):
        for j in range(i):
            q = points[j]
            if is_infinite(p) and is_infinite(q):
                raise DegenerateConfiguration(f"Punctures {j} and {i} are both at infinity")
            if not is_infinite(p) and not is_infinite(q) and abs(p - q) <= DUPLICATE_TOL * max(1.0, abs(p)):
                raise DegenerateConfiguration(f"Punctures {j} and {i} coincide at {p}")


def _loop_radii(finite: Sequence[complex], basepoint: complex, fraction: float) -> Tuple[float, ...]:
    radii = []
    for i, p in enumerate(finite):
        nearest = abs(p - basepoint)
        for j, q in enumerate(finite):
            if j != i:
                nearest = min(nearest, abs(p - q))
        radii.append(fraction * nearest)
    return tuple(radii)


def make_config(punctures: Sequence[complex], basepoint: Optional[complex] = None,
                radius_fraction: float = 0.4) -> PunctureConfig:
    """
    Build a configuration from already-normalized punctures.

    Args:
        punctures: (0, 1, inf, l4, ..., ln)
        basepoint: Loop basepoint; chosen by default_basepoint when omitted
        radius_fraction: Lasso radius as a fraction of the nearest obstacle

    Returns:
        PunctureConfig
    """
    points = tuple(complex(p) if not is_infinite(p) else INFINITY for p in punctures)
    _check_distinct(points)
    if not is_infinite(points[INFINITY_INDEX]) or points[0] != 0 or points[1] != 1:
        raise DegenerateConfiguration("Normalized punctures must start with (0, 1, inf)")
    for index in range(3, len(points)):
        if is_infinite(points[index]):
            raise DegenerateConfiguration(f"Modulus {index} is at infinity")
    finite = [p for p in points if not is_infinite(p)]
    if basepoint is None:
        basepoint = default_basepoint(finite, radius_fraction)
    basepoint = complex(basepoint)
    for p in finite:
        if abs(basepoint - p) <= DUPLICATE_TOL * max(1.0, abs(p)):
            raise GeometryError(f"Basepoint {basepoint} coincides with a puncture")
    return PunctureConfig(points, basepoint, _loop_radii(finite, basepoint, radius_fraction))


def normalize_punctures(raw: Sequence[complex], basepoint: Optional[complex] = None,
                        radius_fraction: float = 0.4) -> Tuple[PunctureConfig, Mobius]:
    """
    Move the first three punctures to (0, 1, inf) by the unique Mobius map.

    The returned configuration lists the images in the input order. `basepoint`
    is given in normalized coordinates.
    """
    points = [INFINITY if is_infinite(p) else complex(p) for p in raw]
    _check_distinct(points)
    m = Mobius.from_three_points(points[0], points[1], points[2])
    images = [0j, 1 + 0j, INFINITY] + [m(p) for p in points[3:]]
    return make_config(images, basepoint, radius_fraction), m


def _ray_clears(base: complex, target: complex, finite: Sequence[complex], radii: Sequence[float]) -> bool:
    """True when the segment base -> target stays outside the disks around the other punctures"""
    ray = LineString([(base.real, base.imag), (target.real, target.imag)])
    for q, r in zip(finite, radii):
        if q == target:
            continue
        if ray.distance(Point(q.real, q.imag)) <= r:
            return False
    return True


def infinity_entry_angle(base: complex, finite: Sequence[complex]) -> float:
    """Direction from `base` bisecting the widest angular gap between finite punctures"""
    angles = sorted(cmath.phase(p - base) for p in finite)
    gaps = [(angles[(k + 1) % len(angles)] - angles[k]) % (2 * math.pi) for k in range(len(angles))]
    if len(angles) == 1:
        gaps = [2 * math.pi]
    widest = int(np.argmax(gaps))
    return angles[widest] + gaps[widest] / 2.0


def _candidate_ok(base: complex, finite: Sequence[complex], radius_fraction: float, big_radius: float) -> bool:
    if abs(base) > big_radius - 0.5:
        return False
    radii = _loop_radii(finite, base, radius_fraction)
    if not all(_ray_clears(base, p, finite, radii) for p in finite):
        return False
    entry = base + 2.0 * big_radius * cmath.exp(1j * infinity_entry_angle(base, finite))
    return _ray_clears(base, entry, finite, radii)


def default_basepoint(finite: Sequence[complex], radius_fraction: float = 0.4) -> complex:
    """
    Coarse grid search for a basepoint far from every finite puncture.

    Candidates on a grid over the padded bounding box are kept when every lasso
    ray (and the access ray to the loop around infinity) clears the other
    puncture disks. Among those, the largest minimum distance wins; ties go to
    the candidate nearest the centroid, then to the larger imaginary part.
    """
    finite = [complex(p) for p in finite]
    xs = [p.real for p in finite]
    ys = [p.imag for p in finite]
    big_radius = 2.0 * max(abs(p) for p in finite) + 1.0
    pad = 0.5
    cloud = MultiPoint([(p.real, p.imag) for p in finite])
    centroid = cloud.centroid
    best = None
    best_key = None
    for x in np.linspace(min(xs) - pad, max(xs) + pad, GRID_SIZE):
        for y in np.linspace(min(ys) - pad, max(ys) + pad, GRID_SIZE):
            candidate = complex(float(x), float(y))
            if not _candidate_ok(candidate, finite, radius_fraction, big_radius):
                continue
            spot = Point(candidate.real, candidate.imag)
            key = (round(spot.distance(cloud), 9), -round(spot.distance(centroid), 9), round(candidate.imag, 9))
            if best_key is None or key > best_key:
                best, best_key = candidate, key
    if best is None:
        raise GeometryError("No basepoint on the search grid gives clear peripheral loops")
    logger.debug("default basepoint %s (clearance %.4f)", best, best_key[0])
    return best


def loop_order(config: PunctureConfig) -> List[int]:
    """
    Puncture indices in loop order: finite punctures by the argument of p - b
    measured counterclockwise from the access ray to infinity, then infinity.
    """
    base = config.basepoint
    entry = infinity_entry_angle(base, config.finite_punctures)

    def key(index):
        p = config.punctures[index]
        return ((cmath.phase(p - base) - entry) % (2 * math.pi), abs(p - base))

    return sorted(config.finite_indices, key=key) + [INFINITY_INDEX]


def peripheral_loops(config: PunctureConfig) -> List[LoopPath]:
    """
    One lasso per puncture, in loop order, so that traversing them in sequence
    gives a null-homotopic loop.

    Raises:
        GeometryError: a lasso radius breaks the clearance invariant or a ray
            passes through another puncture's disk
    """
    factory = PathFactory()
    base = config.basepoint
    finite = config.finite_punctures
    radii = config.loop_radii
    for i, p in enumerate(finite):
        nearest = abs(p - base)
        for j, q in enumerate(finite):
            if j != i:
                nearest = min(nearest, abs(p - q))
        if not 0 < radii[i] < 0.5 * nearest:
            raise GeometryError(f"Loop radius {radii[i]} around {p} violates the clearance bound {0.5 * nearest}")
        if not _ray_clears(base, p, finite, radii):
            raise GeometryError(f"The ray from the basepoint to {p} meets another puncture disk")
    big_radius = config.infinity_radius
    if abs(base) >= big_radius:
        raise GeometryError(f"Basepoint {base} lies outside the circle |z| = {big_radius}")
    entry_angle = infinity_entry_angle(base, finite)
    entry = base + 2.0 * big_radius * cmath.exp(1j * entry_angle)
    if not _ray_clears(base, entry, finite, radii):
        raise GeometryError("The access ray to infinity meets a puncture disk")

    loops = []
    for index in loop_order(config):
        if index == INFINITY_INDEX:
            loops.append(factory.big_circle(base, big_radius, entry_angle, winds_around=index))
        else:
            loops.append(factory.lasso(base, config.punctures[index], config.loop_radius(index), winds_around=index))
    return loops


def loop_windings(config: PunctureConfig, loop: LoopPath) -> List[float]:
    """
    Sphere winding number of `loop` around every puncture, in puncture order.

    Measured relative to infinity for loops around finite punctures and relative
    to puncture 0 for the loop around infinity; the reference itself counts 0.
    """
    reference = INFINITY if loop.winds_around != INFINITY_INDEX else config.punctures[0]
    windings = []
    for p in config.punctures:
        if p == reference:
            windings.append(0.0)
        else:
            windings.append(winding_number(loop, p, reference))
    return windings


def check_loop_windings(config: PunctureConfig, loops: Sequence[LoopPath]):
    """Raise GeometryError unless each loop winds once around its own puncture and 0 around the rest"""
    for loop in loops:
        for index, value in enumerate(loop_windings(config, loop)):
            expected = 1 if index == loop.winds_around else 0
            if abs(value - round(value)) > WINDING_TOL or round(value) != expected:
                raise GeometryError(
                    f"Loop around puncture {loop.winds_around} winds {value:.6f} times around puncture {index}"
                )
