import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.distance import cdist

from elastica_lab import elastica as el
from elastica_lab.curves import (CONSTANT_SPEED, AngleLifting, PlanarCurve, closure_gap, curvature_profile,
                                 lift_tangent, load_curve, polyline_length, resample_arclength, save_curve,
                                 synthesize_from_angle, to_constant_speed, unwrap_increments)
from elastica_lab.errors import AmbiguousBranchWarning, CurveFormatError, DegenerateSegment
from elastica_lab.geometry import circle, ellipse, figure_eight, limacon


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    d = cdist(a, b)
    return float(max(d.min(axis=0).max(), d.min(axis=1).max()))


def segment(n=101, length=1.0):
    x = np.linspace(0.0, length, n)
    return PlanarCurve(np.column_stack([x, np.zeros(n)]))


# ------------------------------------------------------------------ PlanarCurve

def test_duplicate_samples_rejected():
    with pytest.raises(DegenerateSegment):
        PlanarCurve(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))


def test_bad_shape_and_unclosed_rejected():
    with pytest.raises(CurveFormatError):
        PlanarCurve(np.zeros((4, 3)))
    with pytest.raises(CurveFormatError):
        PlanarCurve(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]), closed=True)
    with pytest.raises(CurveFormatError):
        PlanarCurve(np.array([[0.0, 0.0], [1.0, 0.0]]), param=CONSTANT_SPEED)


def test_points_are_read_only():
    c = segment()
    with pytest.raises(ValueError):
        c.points[0, 0] = 5.0


def test_save_load_round_trip(tmp_path):
    c = to_constant_speed(segment(11, 2.0), 1.0)
    save_curve(c, tmp_path / "c.json")
    back = load_curve(tmp_path / "c.json")
    assert back.param == CONSTANT_SPEED and back.L == 1.0
    np.testing.assert_array_equal(back.points, c.points)


# ------------------------------------------------------------------ lifting

def test_circle_turning_number():
    lift = lift_tangent(circle(256))
    assert abs(lift.theta[-1] - lift.theta[0] - 2 * np.pi) <= 1e-6


def test_segment_lifting_is_zero():
    lift = lift_tangent(segment())
    np.testing.assert_allclose(lift.theta, 0.0, atol=1e-15)


def test_figure_eight_turning_number_zero():
    lift = lift_tangent(figure_eight(2048))
    assert abs(lift.theta[-1] - lift.theta[0]) <= 1e-6


def test_exact_pi_increment_warns_and_takes_plus_branch():
    t = np.array([[1.0, 0.0], [-1.0, 0.0]])
    inc, amb = unwrap_increments(t)
    assert amb == (0,) and inc[0] == np.pi
    # a hairpin: the tangent estimate at the tip reverses exactly
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0 + 1e-300]])
    with warnings.catch_warnings():
        warnings.simplefilter("error", AmbiguousBranchWarning)
        try:
            lift_tangent(PlanarCurve(pts))
        except AmbiguousBranchWarning:
            pass


@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_increments_in_half_open_branch(seed):
    rng = np.random.default_rng(seed)
    pts = np.cumsum(rng.normal(size=(40, 2)), axis=0)
    lift = lift_tangent(PlanarCurve(pts))
    inc = np.diff(lift.theta)
    assert np.all(inc > -np.pi) and np.all(inc <= np.pi)


@pytest.mark.parametrize("shape", [circle, ellipse, limacon])
def test_turning_number_quantized(shape):
    w = lift_tangent(shape(1024)).winding
    assert abs(w - round(w)) <= 1e-3


@given(st.floats(-np.pi, np.pi), st.floats(-5, 5), st.floats(-5, 5))
def test_rigid_motion_invariance(angle, dx, dy):
    c = ellipse(513)
    moved = c.rotated(angle).translated((dx, dy))
    assert abs(moved.length - c.length) <= 1e-12 * c.length
    k0 = curvature_profile(lift_tangent(c))
    k1 = curvature_profile(lift_tangent(moved))
    np.testing.assert_allclose(k1, k0, atol=1e-8)


def test_length_additivity_for_polylines():
    rng = np.random.default_rng(3)
    pts = np.cumsum(rng.normal(size=(30, 2)), axis=0)
    a, b = PlanarCurve(pts[:15]), PlanarCurve(pts[14:])
    assert abs(PlanarCurve(pts).length - (a.length + b.length)) <= 1e-12 * PlanarCurve(pts).length
    assert polyline_length(pts) == pytest.approx(PlanarCurve(pts).length, rel=1e-15)


# ------------------------------------------------------------------ curvature

@pytest.mark.parametrize("R", [0.5, 1.0, 3.0])
def test_circle_curvature(R):
    k = curvature_profile(lift_tangent(circle(1025, R)))
    assert np.max(np.abs(k - 1.0 / R)) <= 1e-4 / R


def test_borderline_curvature_at_center():
    eps = 1e-2
    w = np.sqrt(2 * eps)
    c = el.sample_borderline(eps, -5 * w, 5 * w, 4097)
    lift = lift_tangent(c)
    k = curvature_profile(lift)
    mid = len(k) // 2
    assert k[mid] == pytest.approx(np.sqrt(2) / np.sqrt(eps), rel=1e-4)


def test_segment_curvature_zero():
    np.testing.assert_allclose(curvature_profile(lift_tangent(segment())), 0.0, atol=1e-12)


# ------------------------------------------------------------------ synthesis

def test_zero_angle_gives_segment():
    grid = np.linspace(0.0, 1.0, 11)
    c = synthesize_from_angle(AngleLifting(grid, np.zeros(11)))
    np.testing.assert_allclose(c.points[-1], [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(c.points[:, 1], 0.0)


def test_linear_angle_gives_circle():
    for n in (256, 1024):
        grid = np.linspace(0.0, 2 * np.pi, n)
        lift = AngleLifting(grid, grid + np.pi / 2, closed=True)
        assert closure_gap(lift) <= 30.0 / n**2
        c = synthesize_from_angle(lift, basepoint=(1.0, 0.0))
        assert c.closed
        assert np.max(np.abs(np.hypot(*c.points.T) - 1.0)) <= 30.0 / n**2


@pytest.mark.parametrize("shape", [circle, ellipse, limacon])
def test_round_trip_second_order(shape):
    errs = []
    for n in (512, 1024):
        c = shape(n)
        back = synthesize_from_angle(lift_tangent(c), basepoint=c.points[0])
        errs.append(hausdorff(c.points, back.points))
    # halving h reduces the error by about four
    assert errs[1] <= errs[0] / 3.0


def test_ellipse_round_trip_at_4096():
    c = ellipse(4096)
    back = synthesize_from_angle(lift_tangent(c), basepoint=c.points[0])
    assert hausdorff(c.points, back.points) <= 1e-6


# ------------------------------------------------------------------ resampling

def test_circle_resample_preserves_length():
    c = circle(100)
    r = resample_arclength(c, 1000)
    # the 100-gon underestimates 2 pi; the periodic spline recovers it
    assert abs(r.length - 2 * np.pi) / (2 * np.pi) <= 1e-4
    seg = r.segment_lengths
    assert np.ptp(seg) / seg.mean() <= 1e-3


def test_polyline_linear_resample_exact():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    r = resample_arclength(PlanarCurve(pts), 21, method="linear")
    assert r.length == pytest.approx(2.0, rel=1e-14)
    np.testing.assert_allclose(r.segment_lengths, 0.1, rtol=1e-12)


def test_borderline_resample_length():
    eps = 1e-3
    w = np.sqrt(2 * eps)
    c = resample_arclength(el.sample_borderline(eps, -5 * w, 5 * w, 2001), 3001)
    assert c.length == pytest.approx(10 * w, rel=1e-6)


# ------------------------------------------------------------------ constant speed

def test_constant_speed_factor():
    c = to_constant_speed(segment(11, 2.0), 1.0)
    assert c.speed == pytest.approx(2.0)
    same = to_constant_speed(segment(11, 2.0), 2.0)
    assert same.speed == pytest.approx(1.0)
    np.testing.assert_allclose(same.grid, segment(11, 2.0).grid)
    assert c.grid[-1] == 1.0
