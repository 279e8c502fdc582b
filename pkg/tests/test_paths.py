import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elastica_lab import elastica as el
from elastica_lab.curves import lift_tangent
from elastica_lab.geometry import ellipse
from elastica_lab.paths import Arc, ElasticaPiece, Path, Straight, circle_path, concat_lengths, spline_path


def test_circle_path_geometry():
    p = circle_path(2.0)
    assert p.length == pytest.approx(4 * np.pi)
    pts, th, kap = p.evaluate(np.linspace(0, p.length, 9))
    np.testing.assert_allclose(np.hypot(*pts.T), 2.0, atol=1e-14)
    np.testing.assert_allclose(kap, 0.5)
    assert np.allclose(p.end_point(), p.start_point(), atol=1e-14)


def test_chain_is_tangent_continuous():
    path = Path([Straight(1.0), Arc(np.pi / 2, 1.0), Straight(0.5), ElasticaPiece(1e-2, -0.3, 0.3, 1)])
    offs = path.piece_offsets
    for s in offs[1:-1]:
        p, th, _ = path.evaluate(np.array([s - 1e-12, s + 1e-12]))
        assert np.hypot(*(p[1] - p[0])) <= 1e-10
        assert abs(th[1] - th[0]) <= 1e-9


def test_elastica_piece_matches_closed_form():
    eps = 1e-2
    piece = ElasticaPiece(eps, -0.2, 0.2, 1)
    u = np.linspace(0, piece.length, 7)
    _, th, kap = piece.local(u)
    th0 = el.theta(eps, -0.2)
    np.testing.assert_allclose(th, el.theta(eps, u - 0.2) - th0, atol=1e-12)
    np.testing.assert_allclose(kap, el.curvature(eps, u - 0.2), rtol=1e-12)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_subpieces_reassemble(a, b):
    a, b = sorted((a, b))
    path = Path([Straight(0.3), Arc(0.4, 2.0), Straight(0.3)])
    sub = path.subpieces(a, b)
    assert concat_lengths(sub) == pytest.approx(b - a, abs=1e-12)


def test_scaling_is_homothety():
    path = Path([Straight(0.3), Arc(0.4, 2.0)])
    big = path.scaled(2.0)
    assert big.length == pytest.approx(2 * path.length)
    np.testing.assert_allclose(big.end_point(), 2 * path.end_point(), atol=1e-14)
    assert big.end_angle() == pytest.approx(path.end_angle())


def test_closed_sampling_shares_grid_and_lifts_continuously():
    p = circle_path(1.0)
    c0, s, th, _ = p.sample(257, closed=True)
    c1, _, th1, _ = p.sample(257, closed=True, shift=1.0)
    np.testing.assert_allclose(c0.grid, c1.grid, rtol=0, atol=1e-13)
    assert th1[-1] - th1[0] == pytest.approx(2 * np.pi)
    assert np.all(np.diff(th1) > 0)


def test_spline_path_follows_samples():
    c = ellipse(1025)
    sp = spline_path(c)
    assert sp.length == pytest.approx(c.length, rel=1e-5)
    lift = lift_tangent(c)
    assert (sp.end_angle() - sp.angle0) == pytest.approx(lift.theta[-1] - lift.theta[0], abs=1e-6)
