import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.errors import DegenerateParabolic, FrameDegenerate, NotParabolic, PoleOnPath
from src.geometry.path_factory import PathFactory
from src.geometry.surface import peripheral_loops
from src.holonomy.monodromy import (
    DevelopedGerm,
    TransferMatrix,
    develop_along,
    holonomy_mobius,
    integrate_along,
    loop_monodromy,
    normalize_parabolic_lift,
    schwarzian_residual,
)
from src.models import NumericalSettings

factory = PathFactory()


def test_flat_transfer_is_a_shear(flat, settings):
    a, b = 0.2 + 0.1j, 1.7 - 0.4j
    transfer = integrate_along(flat, factory.segment(a, b), settings)
    assert_allclose(transfer.matrix, [[1, b - a], [0, 1]], atol=1e-12)
    assert transfer.start == a and transfer.end == b


def test_constant_path_gives_identity(qd3, settings):
    transfer = integrate_along(qd3, factory.polyline([0.5 + 0.5j]), settings)
    assert_allclose(transfer.matrix, np.eye(2), atol=0)


def test_pure_model_loop(pure_model, settings, log_germ):
    loop = factory.circle(0j, 1.0)
    m = loop_monodromy(pure_model, loop, settings)
    assert_allclose(m.trace, -2.0, atol=1e-8)
    expected = -np.array([[1 - math.pi * 1j, 2 * math.pi * 1j], [-math.pi * 1j / 2, 1 + math.pi * 1j]])
    assert_allclose(m.matrix, expected, atol=1e-8)
    # D = log(z)/(2 pi i) gains 1 around the origin
    action = holonomy_mobius(m, log_germ)
    assert_allclose(action(0.3 + 0j), 1.3, atol=1e-8)
    continued = develop_along(pure_model, log_germ, loop, settings)
    assert_allclose(continued.value, log_germ.value + 1, atol=1e-8)


def test_pure_model_partial_turn(pure_model, settings, log_germ):
    half = factory.circle(0j, 1.0, turns=0.5)
    continued = develop_along(pure_model, log_germ, half, settings)
    assert_allclose(continued.value, 0.5, atol=1e-9)


def test_determinant_is_conserved(qd3, settings):
    for loop in peripheral_loops(qd3.config):
        m = loop_monodromy(qd3, loop, settings)
        assert m.det_drift < 1e-8
        assert_allclose(m.det, 1.0, atol=1e-12)


def test_loop_then_reverse_is_identity(qd3, settings):
    loop = peripheral_loops(qd3.config)[0]
    m = loop_monodromy(qd3, loop, settings)
    back = loop_monodromy(qd3, loop.reversed(), settings)
    assert_allclose(m.then(back).matrix, np.eye(2), atol=1e-8)
    assert_allclose(back.matrix, m.inverse().matrix, atol=1e-8)


def test_homotopic_paths_agree(qd3, settings):
    start, end = 0.5 + 0.5j, 0.5 + 1.5j
    straight = integrate_along(qd3, factory.segment(start, end), settings)
    for detour in (1.0 + 1.0j, -0.2 + 1.0j):
        bent = integrate_along(qd3, factory.polyline([start, detour, end]), settings)
        assert_allclose(bent.matrix, straight.matrix, atol=1e-8)


def test_peripheral_traces_are_parabolic(qd3, settings):
    for loop in peripheral_loops(qd3.config):
        trace = loop_monodromy(qd3, loop, settings).trace
        assert abs(trace * trace - 4) < 1e-8
        # the raw frame monodromy of a parabolic puncture has trace -2
        assert_allclose(trace, -2.0, atol=1e-7)


def test_pole_on_path(qd3, settings):
    with pytest.raises(PoleOnPath):
        integrate_along(qd3, factory.segment(-0.5 + 0j, 0.5 + 0j), settings)


def test_normalize_parabolic_lift():
    shear = np.array([[1, 1], [0, 1]], dtype=complex)
    assert_allclose(normalize_parabolic_lift(shear), shear)
    flipped = -np.array([[1, 2j * math.pi], [0, 1]])
    assert_allclose(normalize_parabolic_lift(flipped), [[1, 2j * math.pi], [0, 1]])
    with pytest.raises(DegenerateParabolic):
        normalize_parabolic_lift(np.eye(2))
    with pytest.raises(NotParabolic):
        normalize_parabolic_lift(np.diag([2.0, 0.5]))


def test_normalize_keeps_transfer_matrix_type(pure_model, settings):
    m = loop_monodromy(pure_model, factory.circle(0j, 1.0), settings)
    lift = normalize_parabolic_lift(m)
    assert isinstance(lift, TransferMatrix)
    assert_allclose(lift.trace, 2.0, atol=1e-8)


def test_germ_accessors():
    germ = DevelopedGerm.standard(0.5 + 0.5j)
    assert germ.value == 0
    assert germ.derivative == 1
    assert germ.log_derivative == 0
    with pytest.raises(FrameDegenerate):
        DevelopedGerm(0j, np.zeros((2, 2)))


def test_develop_along_checks_start(qd3, settings):
    germ = DevelopedGerm.standard(0.5 + 0.5j)
    with pytest.raises(ValueError):
        develop_along(qd3, germ, factory.segment(0.4 + 0.5j, 0.5 + 1j), settings)


def test_developing_map_is_equivariant(qd3, settings):
    germ = DevelopedGerm.standard(qd3.config.basepoint)
    offset = factory.segment(qd3.config.basepoint, 0.5 + 0.8j)
    moved = develop_along(qd3, germ, offset, settings)
    for loop in peripheral_loops(qd3.config):
        m = loop_monodromy(qd3, loop, settings)
        around = develop_along(qd3, germ, loop + offset, settings)
        expected = holonomy_mobius(m, germ)(moved.value)
        assert_allclose(around.value, expected, atol=1e-7)


def test_schwarzian_of_flat_developing_map(flat, settings):
    result = schwarzian_residual(flat, factory.segment(0j, 1 + 1j), samples=4, settings=settings)
    assert result.checked == 4
    assert result.max_residual < 1e-6


def test_schwarzian_matches_phi(qd3, settings):
    path = factory.segment(0.5 + 0.5j, 0.5 + 1.2j)
    result = schwarzian_residual(qd3, path, samples=5, settings=settings)
    assert result.checked + len(result.skipped) == 5
    assert result.checked >= 3
    assert result.max_residual < 1e-5


def test_schwarzian_residual_shrinks_with_the_stencil_step(pure_model):
    path = factory.segment(1 + 0j, 1 + 1j)
    residuals = []
    for ratio in (0.1, 0.05):
        result = schwarzian_residual(pure_model, path, samples=3, settings=NumericalSettings(schwarzian_fd_ratio=ratio))
        assert result.checked == 3
        residuals.append(result.max_residual)
    assert residuals[1] < residuals[0] / 4
