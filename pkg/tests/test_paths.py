import math

import pytest
from numpy.testing import assert_allclose

from src.geometry.path_factory import PathFactory
from src.geometry.paths import CircleArc, LineSegment, LoopPath, Path, winding_number


def test_segment_geometry():
    seg = LineSegment(0j, 3 + 4j)
    assert seg.length == 5.0
    assert_allclose(seg.point(2.5), 1.5 + 2j)
    assert_allclose(seg.velocity(1.0), 0.6 + 0.8j)
    assert seg.distance_to(1j) == pytest.approx(0.6)
    assert seg.reversed().start == 3 + 4j


def test_arc_endpoints_and_orientation():
    arc = CircleArc(1j, 2.0, 0.0, math.pi / 2)
    assert_allclose(arc.start, 2 + 1j, atol=1e-15)
    assert_allclose(arc.end, 3j, atol=1e-15)
    assert arc.length == pytest.approx(math.pi)
    back = arc.reversed()
    assert_allclose(back.start, arc.end, atol=1e-15)
    assert_allclose(back.end, arc.start, atol=1e-15)
    assert back.orientation == -1


def test_arc_distance_outside_the_swept_angle():
    arc = CircleArc(0j, 1.0, 0.0, math.pi / 2)
    assert arc.distance_to(0.5 + 0j) == pytest.approx(0.5)
    assert arc.distance_to(-2 + 0j) == pytest.approx(abs(-2 - 1j))


def test_path_rejects_gaps():
    with pytest.raises(ValueError):
        Path([LineSegment(0j, 1 + 0j), LineSegment(1 + 1e-3j, 2 + 0j)])


def test_empty_path_needs_a_start():
    with pytest.raises(ValueError):
        Path([])
    constant = PathFactory().polyline([0.5j])
    assert constant.start == constant.end == 0.5j
    assert constant.length == 0


def test_path_reverse_and_concatenate():
    factory = PathFactory()
    path = factory.polyline([0j, 1 + 0j, 1 + 1j])
    assert path.length == pytest.approx(2.0)
    back = path.reversed()
    assert back.start == 1 + 1j and back.end == 0j
    loop = path + back
    assert loop.start == loop.end == 0j


def test_winding_number_of_circles():
    factory = PathFactory()
    ccw = factory.circle(0j, 1.0)
    assert winding_number(ccw, 0j) == pytest.approx(1.0, abs=1e-9)
    assert winding_number(ccw.reversed(), 0j) == pytest.approx(-1.0, abs=1e-9)
    assert winding_number(ccw, 3 + 0j) == pytest.approx(0.0, abs=1e-9)
    twice = factory.circle(0j, 1.0, turns=2.0)
    assert winding_number(twice, 0.2j) == pytest.approx(2.0, abs=1e-9)


def test_winding_number_relative_to_finite_reference():
    ccw = PathFactory().circle(0j, 1.0)
    # around 0 counted against a reference outside: 1 - 0
    assert winding_number(ccw, 0j, reference=5 + 0j) == pytest.approx(1.0, abs=1e-9)
    # a reference inside cancels
    assert winding_number(ccw, 0.1 + 0j, reference=-0.1 + 0j) == pytest.approx(0.0, abs=1e-9)


def test_lasso_closes_and_winds_once():
    loop = PathFactory().lasso(2 + 0j, 0j, 0.5, winds_around=0)
    assert isinstance(loop, LoopPath)
    assert loop.winds_around == 0
    assert abs(loop.end - loop.base) < 1e-12
    assert winding_number(loop, 0j) == pytest.approx(1.0, abs=1e-9)
    assert winding_number(loop, 1j) == pytest.approx(0.0, abs=1e-9)
    assert loop.distance_to(0j) == pytest.approx(0.5)


def test_lasso_base_inside_circle():
    with pytest.raises(ValueError):
        PathFactory().lasso(0.1 + 0j, 0j, 0.5)


def test_big_circle_is_clockwise_in_the_plane():
    loop = PathFactory().big_circle(0.5j, 3.0, math.pi / 2)
    assert_allclose(abs(loop.pieces[0].end), 3.0)
    assert winding_number(loop, 0j) == pytest.approx(-1.0, abs=1e-9)
    assert winding_number(loop, 1 + 0j) == pytest.approx(-1.0, abs=1e-9)


def test_descriptor_round_trip():
    factory = PathFactory()
    loop = factory.lasso(1 + 1j, 0j, 0.4)
    rebuilt = factory.path_from_descriptors(loop.to_descriptors())
    assert len(rebuilt.pieces) == 3
    assert_allclose(rebuilt.end, loop.end, atol=1e-12)
    assert rebuilt.length == pytest.approx(loop.length)


def test_unknown_descriptor_kind():
    with pytest.raises(ValueError):
        PathFactory().from_descriptor({"kind": "spline"})
