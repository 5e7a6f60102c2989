"""
Error hierarchy for the holonomy laboratory.

Every failure raised by the library derives from HolonomyLabError. Errors that
describe bad input also derive from ValueError.
"""


class HolonomyLabError(Exception):
    """Base class for all laboratory errors"""


# Surface and configuration

class DegenerateConfiguration(HolonomyLabError, ValueError):
    """Two punctures (or a modulus and a normalized puncture) coincide"""


class TooFewPunctures(HolonomyLabError, ValueError):
    """Fewer than three punctures were given"""


class GeometryError(HolonomyLabError, ValueError):
    """Loop geometry violates a clearance requirement"""


# Quadratic differentials

class ConstraintSingular(HolonomyLabError):
    """The 2x2 pivot system of the residue constraints is singular"""


class ChartDimensionError(HolonomyLabError, ValueError):
    """A parameter vector has the wrong length for the puncture count"""


class PoleEvaluation(HolonomyLabError, ValueError):
    """A quadratic differential was evaluated at one of its poles"""


# Integration

class PoleOnPath(HolonomyLabError, ValueError):
    """An integration path passes through (or too close to) a pole"""


class StiffnessFailure(HolonomyLabError):
    """The adaptive integrator could not take a step"""


class FrameDegenerate(HolonomyLabError):
    """A solution frame collapsed (both components of the developing map vanish)"""


# Representations

class NotParabolic(HolonomyLabError, ValueError):
    """A matrix expected to be parabolic is not"""


class DegenerateParabolic(HolonomyLabError, ValueError):
    """A matrix with trace +-2 is within tolerance of +-Id"""


class NotEnoughGenerators(HolonomyLabError, ValueError):
    """Fewer than two generators were given"""


class LiftNotNormalized(HolonomyLabError, ValueError):
    """A peripheral lift does not have trace +2"""


# Holonomy map

class ValidityError(HolonomyLabError):
    """A mathematical validity check failed along the pipeline"""

    def __init__(self, check: str, message: str):
        super().__init__(f"{check}: {message}")
        self.check = check


class StencilOutOfDomain(HolonomyLabError):
    """A finite-difference stencil point left the chart's validity domain"""


class EmptyInput(HolonomyLabError, ValueError):
    """An empty matrix was given where a non-empty one is required"""


class ZeroDimensionalDomain(HolonomyLabError):
    """The parameter space is a point (n = 3); there is nothing to differentiate"""


class FiberZeroDimensional(HolonomyLabError):
    """The fibre of the forgetful map is a point (n = 3)"""


# Foliation local model

class SingularFiber(HolonomyLabError, ValueError):
    """A path in the local model reaches the singular fibre u = 0"""


class OutOfDomain(HolonomyLabError, ValueError):
    """A point lies outside the domain of the local model"""


class PathTooCoarse(HolonomyLabError, ValueError):
    """Consecutive path samples turn by a quarter turn or more around u = 0"""
