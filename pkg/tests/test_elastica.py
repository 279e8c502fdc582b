import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elastica_lab import elastica as el
from elastica_lab.curves import PlanarCurve
from elastica_lab.errors import ParameterOutOfRange

eps_st = st.floats(1e-6, 1.0)


@pytest.mark.parametrize("eps", [1e-6, 1e-3, 0.5, 1.0])
def test_center_values(eps):
    s = el.borderline_sample(eps, 0.0)
    assert s.angle == pytest.approx(np.pi, abs=1e-15)
    assert s.point[1] == pytest.approx(2 * np.sqrt(2 * eps))
    assert s.curvature == pytest.approx(np.sqrt(2) / np.sqrt(eps))


def test_limits_at_infinity():
    assert el.theta(1e-4, 1e6) == pytest.approx(2 * np.pi)
    assert el.curvature(1e-4, 1e6) == 0.0
    assert el.theta(1e-4, -1e6) == pytest.approx(0.0)
    # no overflow warnings deep in the tails
    with np.errstate(over="raise", invalid="raise", under="ignore"):
        el.curvature(1e-8, np.array([-1e3, 1e3]))


def test_equipartition_random():
    rng = np.random.default_rng(42)
    eps = 10.0 ** rng.uniform(-6, 0, 10_000)
    s = rng.uniform(-10, 10, 10_000) * np.sqrt(2 * eps)
    assert np.max(el.equipartition_defect(eps, s)) <= 1e-12


@given(eps_st, st.floats(0.0, 20.0))
def test_symmetry(eps, x):
    s = x * np.sqrt(2 * eps)
    assert el.curvature(eps, s) == pytest.approx(el.curvature(eps, -s), rel=1e-13)
    p, m = el.position(eps, s), el.position(eps, -s)
    assert p[1] == pytest.approx(m[1], rel=1e-13)
    assert p[0] == pytest.approx(-m[0], rel=1e-12, abs=1e-15)


@given(eps_st)
def test_monotone_lifting(eps):
    s = np.linspace(-8, 8, 401) * np.sqrt(2 * eps)
    th = el.theta(eps, s)
    assert np.all(np.diff(th) > 0)
    assert np.all((th > 0) & (th < 2 * np.pi))


@given(eps_st, st.floats(-5, 5))
def test_tangent_is_unit_and_matches_angle(eps, x):
    s = x * np.sqrt(2 * eps)
    t = el.tangent(eps, s)
    assert np.hypot(*t) == pytest.approx(1.0, abs=1e-14)
    th = el.theta(eps, s)
    assert t == pytest.approx([np.cos(th), np.sin(th)], abs=1e-12)


def test_el_residual_sampled_curve():
    e = 1e-2
    w = np.sqrt(2 * e)
    r = el.el_residual(el.sample_borderline(e, -8 * w, 8 * w, 8192), e)
    assert r.max_abs <= 1e-3 * el.curvature(e, 0.0)


def test_el_residual_straight_line():
    x = np.linspace(0, 1, 200)
    r = el.el_residual(PlanarCurve(np.column_stack([x, 2 * x])), 1e-3)
    assert r.max_abs <= 1e-10


@pytest.mark.parametrize("bad", [0.0, -1.0, 2.0, np.nan])
def test_epsilon_range(bad):
    with pytest.raises(ParameterOutOfRange):
        el.borderline_sample(bad, 0.0)
