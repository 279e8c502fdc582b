import numpy as np
import pytest

from elastica_lab.curves import PlanarCurve
from elastica_lab.geometry import circle, count_self_intersections, ellipse, figure_eight, limacon, self_intersections


def test_ellipse_length():
    # Ramanujan's second approximation is accurate to ~1e-7 here
    a, b = 2.0, 1.0
    h = ((a - b) / (a + b)) ** 2
    ram = np.pi * (a + b) * (1 + 3 * h / (10 + np.sqrt(4 - 3 * h)))
    assert ellipse(8193).length == pytest.approx(ram, rel=1e-6)


@pytest.mark.parametrize("shape", [ellipse, limacon, figure_eight])
def test_uniform_arclength(shape):
    seg = shape(2049).segment_lengths
    assert np.ptp(seg) / seg.mean() <= 1e-5


@pytest.mark.parametrize("shape,expected", [(circle, 0), (ellipse, 0), (limacon, 0), (figure_eight, 1)])
def test_self_intersections_of_shapes(shape, expected):
    assert count_self_intersections(shape(4097)) == expected


def test_crossing_location():
    pts = self_intersections(figure_eight(4097))
    np.testing.assert_allclose(pts[0], [0.0, 0.0], atol=1e-12)


def test_polyline_cross():
    pts = np.array([[0.0, 0.0], [2.0, 2.0], [2.0, 0.0], [0.0, 2.0]])
    x = self_intersections(PlanarCurve(pts))
    np.testing.assert_allclose(x, [[1.0, 1.0]])


def test_subsampling():
    assert count_self_intersections(figure_eight(20001), max_points=2000) == 1
