"""
Transfer matrices of y'' + (Phi/2) y = 0 along paths, loop monodromy, and
continuation of the developing map D = y1/y2.

The state is the 2x2 frame F = [[y1, y2], [y1', y2']], transported by
dF/dt = [[0, 1], [-Phi/2, 0]] F dz/dt. The coefficient matrix is trace-free,
so det F is conserved.
"""
import cmath
import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Union

import numpy as np
from scipy.integrate import solve_ivp

from ..errors import DegenerateParabolic, FrameDegenerate, NotParabolic, PoleOnPath, StiffnessFailure
from ..geometry.mobius import Mobius, as_matrix
from ..geometry.paths import LineSegment, LoopPath, Path
from ..geometry.quaddiff import PolarDifferential
from ..models import INFINITY, NumericalSettings

logger = logging.getLogger(__name__)

FRAME_COLLAPSE_TOL = 1e-14
SKIP_RATIO = 1e-8
IDENTITY = np.eye(2, dtype=complex)


@dataclass(eq=False)
class TransferMatrix:
    """SL(2,C) matrix carrying the frame at `start` to the frame at `end`"""
    matrix: np.ndarray
    start: complex
    end: complex
    length: float
    tolerance: float
    det_drift: float = 0.0
    steps: int = 0

    @property
    def trace(self) -> complex:
        return complex(self.matrix[0, 0] + self.matrix[1, 1])

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.matrix))

    def inverse(self) -> "TransferMatrix":
        m = self.matrix
        inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
        return replace(self, matrix=inv, start=self.end, end=self.start)

    def then(self, other: "TransferMatrix") -> "TransferMatrix":
        """Transfer along this path followed by `other`"""
        return TransferMatrix(
            other.matrix @ self.matrix, self.start, other.end, self.length + other.length,
            max(self.tolerance, other.tolerance), max(self.det_drift, other.det_drift), self.steps + other.steps,
        )

    def as_mobius(self) -> Mobius:
        return Mobius(self.matrix, normalize=False)


def _frame_rhs(qd: PolarDifferential, piece):
    def rhs(t, y):
        z = piece.point(t)
        dz = piece.velocity(t)
        half_phi = 0.5 * qd.evaluate(z)
        return np.array([y[2] * dz, y[3] * dz, -half_phi * y[0] * dz, -half_phi * y[1] * dz])
    return rhs


def integrate_along(qd: PolarDifferential, path: Path, settings: Optional[NumericalSettings] = None) -> TransferMatrix:
    """
    Transfer matrix of the Schwarzian ODE along `path`.

    Each piece is integrated in its own parameter (arclength for segments, angle
    for arcs) with DOP853. The result is rescaled to unit determinant and the
    drift before rescaling is recorded.

    Raises:
        PoleOnPath: the path comes closer than min_clearance to a pole
        StiffnessFailure: the integrator fails to take a step
    """
    settings = settings or NumericalSettings()
    clearance = path.clearance(qd.poles)
    if clearance < settings.min_clearance:
        raise PoleOnPath(f"Path passes within {clearance:.3e} of a pole")

    frame = IDENTITY.copy()
    steps = 0
    for piece in path.pieces:
        span = piece.parameter_span
        if span == 0:
            continue
        sol = solve_ivp(
            _frame_rhs(qd, piece), (0.0, span), frame.ravel(),
            method="DOP853", rtol=settings.ode_rtol, atol=settings.ode_atol,
        )
        if sol.status != 0:
            raise StiffnessFailure(f"Integration failed on {piece!r}: {sol.message}")
        frame = sol.y[:, -1].reshape(2, 2)
        steps += sol.t.size - 1

    det = complex(np.linalg.det(frame))
    drift = abs(det - 1.0)
    if drift > 0:
        frame = frame / cmath.sqrt(det)
    logger.debug("integrated length %.4f in %d steps, det drift %.2e", path.length, steps, drift)
    return TransferMatrix(frame, path.start, path.end, path.length, settings.ode_rtol, drift, steps)


def loop_monodromy(qd: PolarDifferential, loop: LoopPath, settings: Optional[NumericalSettings] = None) -> TransferMatrix:
    """Transfer matrix around a closed loop, based at the loop's base point"""
    return integrate_along(qd, loop, settings)


MatrixLike = Union[TransferMatrix, np.ndarray]


def normalize_parabolic_lift(m: MatrixLike, tol: float = 1e-8) -> MatrixLike:
    """
    The sign of a parabolic SL(2,C) matrix with trace +2.

    Args:
        m: TransferMatrix or 2x2 array
        tol: Tolerance on |tr^2 - 4| and on the distance to +-Id

    Returns:
        Same kind as `m`, possibly negated

    Raises:
        NotParabolic: |tr^2 - 4| >= tol
        DegenerateParabolic: m is within tol of +-Id
    """
    matrix = as_matrix(m)
    trace = complex(matrix[0, 0] + matrix[1, 1])
    if abs(trace * trace - 4.0) >= tol:
        raise NotParabolic(f"trace {trace:.12g} is not +-2 (|tr^2 - 4| = {abs(trace * trace - 4):.3e})")
    if Mobius(matrix, normalize=False).distance_to_identity(projective=True) < tol:
        raise DegenerateParabolic("Matrix is +-Id, not a parabolic element")
    flipped = -matrix if trace.real < 0 else matrix
    if isinstance(m, TransferMatrix):
        return replace(m, matrix=flipped)
    return flipped


@dataclass(frozen=True)
class DevelopedGerm:
    """Germ of the developing map at `base`: frame [[y1, y2], [y1', y2']] with D = y1/y2"""
    base: complex
    frame: np.ndarray = field(default_factory=lambda: np.array([[0, 1], [1, 0]], dtype=complex))

    def __post_init__(self):
        frame = np.asarray(self.frame, dtype=complex)
        if frame.shape != (2, 2):
            raise ValueError(f"Germ frame must be 2x2, got {frame.shape}")
        if abs(np.linalg.det(frame)) < FRAME_COLLAPSE_TOL:
            raise FrameDegenerate("Germ frame is singular")
        object.__setattr__(self, "frame", frame)
        object.__setattr__(self, "base", complex(self.base))

    @classmethod
    def standard(cls, base: complex) -> "DevelopedGerm":
        """D(base) = 0, D'(base) = 1, D''(base) = 0"""
        return cls(base)

    @property
    def value(self) -> complex:
        y1, y2 = self.frame[0]
        if y2 == 0:
            return INFINITY
        return complex(y1 / y2)

    @property
    def derivative(self) -> complex:
        """D' = (y1' y2 - y1 y2') / y2^2"""
        y1, y2 = self.frame[0]
        d1, d2 = self.frame[1]
        return complex((d1 * y2 - y1 * d2) / (y2 * y2))

    @property
    def log_derivative(self) -> complex:
        """D''/D' = -2 y2'/y2"""
        return complex(-2.0 * self.frame[1, 1] / self.frame[0, 1])


def develop_along(qd: PolarDifferential, germ: DevelopedGerm, path: Path,
                  settings: Optional[NumericalSettings] = None) -> DevelopedGerm:
    """
    Analytic continuation of D along `path`.

    Raises:
        ValueError: the path does not start at the germ's base
        FrameDegenerate: both y1 and y2 vanish at the end point
    """
    if abs(path.start - germ.base) > 1e-9 * max(1.0, abs(germ.base)):
        raise ValueError(f"Path starts at {path.start}, germ is based at {germ.base}")
    transfer = integrate_along(qd, path, settings)
    frame = transfer.matrix @ germ.frame
    scale = float(np.max(np.abs(frame)))
    if max(abs(frame[0, 0]), abs(frame[0, 1])) < FRAME_COLLAPSE_TOL * scale:
        raise FrameDegenerate(f"Developing map undefined at {path.end}")
    return DevelopedGerm(path.end, frame)


def holonomy_mobius(m: MatrixLike, germ: DevelopedGerm) -> Mobius:
    """
    Mobius action of a loop transfer matrix on the values of D at `germ`.

    Continuation gives frame M G = G R with R = G^-1 M G, so D_after = R^T(D_before).
    """
    g = germ.frame
    r = np.linalg.solve(g, as_matrix(m) @ g)
    return Mobius(r.T)


@dataclass
class SchwarzianResidual:
    """Worst |S_D - Phi| over the checked sample points"""
    max_residual: float
    checked: int
    skipped: List[complex]


def _log_derivative(frame: np.ndarray) -> Optional[complex]:
    y2, d2 = frame[0, 1], frame[1, 1]
    if abs(y2) < SKIP_RATIO * float(np.max(np.abs(frame))):
        return None
    return complex(-2.0 * d2 / y2)


def _sample_positions(path: Path, samples: int):
    """(piece index, piece parameter) at evenly spaced interior arclengths"""
    total = path.length
    lengths = [piece.length for piece in path.pieces]
    positions = []
    for k in range(samples):
        s = (k + 0.5) * total / samples
        for index, length in enumerate(lengths):
            if s <= length or index == len(lengths) - 1:
                piece = path.pieces[index]
                positions.append((index, min(s, length) * piece.parameter_span / length))
                break
            s -= length
    return positions


def schwarzian_residual(qd: PolarDifferential, path: Path, samples: int = 20,
                        settings: Optional[NumericalSettings] = None,
                        germ: Optional[DevelopedGerm] = None) -> SchwarzianResidual:
    """
    Compare the Schwarzian of the continued developing map with Phi along `path`.

    D''/D' is read off the transported frame; its derivative comes from a
    5-point central difference whose stencil points are reached by transporting
    the frame along short segments. Step h = schwarzian_fd_ratio * clearance,
    with the clearance capped at 1.
    """
    settings = settings or NumericalSettings()
    germ = germ or DevelopedGerm.standard(path.start)
    if path.length == 0 or samples < 1:
        return SchwarzianResidual(0.0, 0, [])

    frame = germ.frame
    current_piece, current_t = 0, 0.0
    worst = 0.0
    checked = 0
    skipped: List[complex] = []
    for index, t in _sample_positions(path, samples):
        while current_piece < index:
            piece = path.pieces[current_piece]
            tail = piece.subpiece(current_t, piece.parameter_span)
            frame = integrate_along(qd, Path([tail]), settings).matrix @ frame
            current_piece, current_t = current_piece + 1, 0.0
        piece = path.pieces[index]
        if t > current_t:
            frame = integrate_along(qd, Path([piece.subpiece(current_t, t)]), settings).matrix @ frame
            current_t = t
        z = complex(piece.point(t))

        h = settings.schwarzian_fd_ratio * min(qd.pole_clearance(z), 1.0)
        stencil = {}
        for k in (-2, -1, 1, 2):
            shifted = integrate_along(qd, Path([LineSegment(z, z + k * h)]), settings).matrix @ frame
            stencil[k] = _log_derivative(shifted)
        log_derivative = _log_derivative(frame)
        if log_derivative is None or any(v is None for v in stencil.values()):
            logger.debug("skipping Schwarzian sample at %s: D' has a pole nearby", z)
            skipped.append(z)
            continue
        derivative = (stencil[-2] - 8.0 * stencil[-1] + 8.0 * stencil[1] - stencil[2]) / (12.0 * h)
        schwarzian = derivative - 0.5 * log_derivative * log_derivative
        worst = max(worst, abs(schwarzian - qd.evaluate(z)))
        checked += 1
    return SchwarzianResidual(worst, checked, skipped)
