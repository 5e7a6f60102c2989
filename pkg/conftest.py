"""
Shared fixtures: the thrice-punctured sphere, the four-punctured fixture and
the two test models Phi = 0 and Phi = 1/(2z^2).
"""
import math

import numpy as np
import pytest

from src.geometry.quaddiff import PolarDifferential, from_chart
from src.holonomy.holmap import evaluate_holonomy, jacobian_fd
from src.holonomy.monodromy import DevelopedGerm
from src.models import NumericalSettings

LAMBDA = 0.3 + 0.4j
FIXTURE_THETA = (LAMBDA, 0j)
N3_BASEPOINT = 0.5 + 0.5j


@pytest.fixture(scope="session")
def settings():
    return NumericalSettings()


@pytest.fixture(scope="session")
def qd3():
    return from_chart((), 3, basepoint=N3_BASEPOINT)


@pytest.fixture(scope="session")
def qd4():
    return from_chart(FIXTURE_THETA, 4)


@pytest.fixture(scope="session")
def flat():
    """Phi = 0"""
    return PolarDifferential([], [])


@pytest.fixture(scope="session")
def pure_model():
    """Phi = 1/(2 z^2), whose developing map is log(z)/(2 pi i)"""
    return PolarDifferential([0j], [0j])


@pytest.fixture
def log_germ():
    """Germ at z = 1 of D = log(z)/(2 pi i) for the pure model"""
    return DevelopedGerm(1 + 0j, np.array([[0, 1], [1 / (2j * math.pi), 0.5]], dtype=complex))


@pytest.fixture(scope="session")
def evaluation3(settings):
    return evaluate_holonomy((), 3, settings, basepoint=N3_BASEPOINT)


@pytest.fixture(scope="session")
def evaluation4(settings):
    return evaluate_holonomy(FIXTURE_THETA, 4, settings)


@pytest.fixture(scope="session")
def jacobian4(settings):
    return jacobian_fd(FIXTURE_THETA, 1e-5, settings)
