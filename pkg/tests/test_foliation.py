import cmath
import math

import pytest
from numpy.testing import assert_allclose

from src.errors import OutOfDomain, PathTooCoarse, SingularFiber
from src.geometry.path_factory import PathFactory
from src.holonomy.foliation import (
    GlueCoords,
    LeafState,
    compactified_section_probe,
    conjugacy_check,
    diagonal_section,
    glue,
    glue_separation,
    horizontal_leaf_residual,
    leaf_loop_monodromy,
    leaf_transport,
    random_leaves,
    winding_circle,
)


def test_leaf_state_domain():
    with pytest.raises(SingularFiber):
        LeafState(0j, 0j)
    with pytest.raises(OutOfDomain):
        LeafState(1.5 + 0j, 0j)


@pytest.mark.parametrize("k", [-2, -1, 0, 1, 2])
def test_leaf_monodromy_around_the_singular_fibre(k):
    start = LeafState(0.5 + 0j, 0j)
    closed = leaf_loop_monodromy(start, k)
    assert closed.v == -k
    numeric = leaf_transport(start, winding_circle(start.u, k))
    assert_allclose(numeric.v, closed.v, atol=1e-9)
    assert numeric.numeric_residual < 1e-9
    assert_allclose(numeric.u, start.u, atol=1e-12)


def test_leaf_transport_over_a_half_circle():
    start = LeafState(0.5 + 0j, 0j)
    end = leaf_transport(start, PathFactory().circle(0j, 0.5, 0.0, turns=0.5))
    assert_allclose(end.u, -0.5, atol=1e-12)
    assert_allclose(end.v, -0.5, atol=1e-12)
    assert end.numeric_residual < 1e-9


def test_leaf_transport_along_a_radius():
    start = LeafState(0.5 + 0j, 0.1j)
    end = leaf_transport(start, PathFactory().segment(0.5 + 0j, 0.25 + 0j))
    assert_allclose(end.v, 0.1j - math.log(0.5) / (2j * math.pi), atol=1e-12)
    assert end.numeric_residual < 1e-9


def test_leaf_transport_is_additive():
    start = LeafState(0.6 + 0j, 0j)
    points = [0.6 * cmath.exp(1j * t) * (1 - 0.1 * t) for t in [0.1 * k for k in range(31)]]
    whole = leaf_transport(start, points)
    middle = leaf_transport(start, points[:16])
    joined = leaf_transport(middle, points[15:])
    assert_allclose(joined.v, whole.v, atol=1e-12)
    assert_allclose(joined.branch, whole.branch, atol=1e-12)


def test_leaf_transport_rejects_bad_paths():
    start = LeafState(0.5 + 0j, 0j)
    with pytest.raises(SingularFiber):
        leaf_transport(start, [0.5 + 0j, 0j, -0.5 + 0j])
    with pytest.raises(PathTooCoarse):
        leaf_transport(start, [0.5 + 0j, 0.5j])
    with pytest.raises(OutOfDomain):
        leaf_transport(start, [0.5 + 0j, 1.2 + 0j])
    with pytest.raises(ValueError):
        leaf_transport(start, [0.4 + 0j, 0.3 + 0j])


def test_glue_examples():
    u, v = glue(GlueCoords(0.5j, 0j))
    assert_allclose(u, math.exp(-math.pi), rtol=1e-14)
    assert_allclose(v, -0.5j, atol=1e-15)
    u1, v1 = glue(GlueCoords(1 + 0.5j, 1 + 0j))
    assert_allclose(u1, u, rtol=1e-12)
    assert_allclose(v1, v, atol=1e-15)
    with pytest.raises(OutOfDomain):
        GlueCoords(0.3 - 0.1j, 0j)


def test_horizontal_leaves_map_to_leaves():
    assert horizontal_leaf_residual(0j, 1j, 1 + 1j) < 1e-9
    assert horizontal_leaf_residual(0.2 - 0.4j, 0.1 + 0.3j, 0.9 + 1.2j) < 1e-9
    report = conjugacy_check(random_leaves(100, seed=0))
    assert report.samples == 100
    assert report.passed, report.max_residual


def test_random_leaves_are_seeded():
    assert random_leaves(5, seed=4) == random_leaves(5, seed=4)
    assert random_leaves(5, seed=4) != random_leaves(5, seed=5)


def test_diagonal_section_is_zero():
    assert diagonal_section([0.5j, 0.25 + 1j, 0.9 + 0.1j]) == [0j, 0j, 0j]


def test_glue_is_injective_on_the_strip():
    assert glue_separation(100, seed=0) > 0


def test_developed_section_approaches_the_singular_fibre(qd3, settings):
    for index in qd3.config.finite_indices:
        probe = compactified_section_probe(qd3, index, settings, depths=6)
        assert probe.monotone
        assert len(probe.u_moduli) == 6
        assert probe.u_moduli[-1] < probe.u_moduli[0]
        assert all(v == 0 for v in probe.v_values)
        assert probe.ratio_drift < 0.05
        assert probe.passed()


def test_section_probe_skips_infinity(qd3):
    with pytest.raises(ValueError):
        compactified_section_probe(qd3, 2)
