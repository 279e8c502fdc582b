import numpy as np
import pytest

from elastica_lab.curves import PlanarCurve
from elastica_lab.detector import (atoms_from_intervals, deviation_intervals, extract_singularities,
                                   sweep_diagnostics)
from elastica_lab.errors import GridMismatch
from elastica_lab.experiments import open_builder
from elastica_lab.geometry import circle
from elastica_lab.measures import OPEN, AtomicIntegerMeasure, curvature_measure, flat_norm_coarse
from elastica_lab.paths import circle_path
from elastica_lab.recovery_closed import build_closed_recovery, default_samples
from elastica_lab.recovery_open import build_open_recovery

RIGHT = np.array([1.0, 0.0])
A = 0.375


def segment(n=257):
    x = np.linspace(0.0, 1.0, n)
    return PlanarCurve(np.column_stack([x, np.zeros(n)]))


def test_identical_curves_give_no_intervals():
    c = circle(513)
    assert deviation_intervals(c, c, 0.125).intervals == ()
    assert deviation_intervals(segment(), RIGHT, 0.125).intervals == ()
    assert deviation_intervals(segment(), np.array([[0.0, 0.0], [1.0, 0.0]]), 0.125).intervals == ()


def test_one_block_one_interval_containing_window():
    rec = build_open_recovery(1.0, AtomicIntegerMeasure(1.0, [0.5], [1]), 1e-4)
    dev = deviation_intervals(rec.constant_speed(), RIGHT, 0.125)
    assert len(dev.intervals) == 1
    iv = dev.intervals[0]
    lo, hi = rec.windows[0]
    assert lo <= iv.a < iv.b <= hi
    assert iv.k == 1 and iv.confidence <= 0.15


def test_single_atom_position():
    eps = 1e-5
    rec = build_open_recovery(1.0, AtomicIntegerMeasure(1.0, [0.5], [1]), eps)
    curve = rec.constant_speed()
    ext = extract_singularities(curve, RIGHT, 0.125)
    assert ext.omega.multiplicities == (1,)
    assert abs(ext.omega.positions[0] - 0.5) <= 2 * eps**A + 1.0 / (curve.n - 1)
    assert ext.low_confidence == ()


def test_closed_mode_grid_mismatch():
    with pytest.raises(GridMismatch):
        deviation_intervals(circle(100), circle(101), 0.125)
    with pytest.raises(GridMismatch):
        deviation_intervals(segment(), circle(257), 0.125)
    with pytest.raises(ValueError):
        deviation_intervals(segment(), RIGHT, 0.6)


def test_closed_two_atoms():
    base = circle_path(1.0)
    ell = base.length
    eps = 1e-5
    omega = AtomicIntegerMeasure(ell, [0.2 * ell, 0.6 * ell], [1, 1])
    rec = build_closed_recovery(base, omega, eps)
    ce, ref = rec.sample(default_samples(ell, eps, 2))
    ext = extract_singularities(ce, ref, 0.125)
    assert ext.omega.multiplicities == (1, 1)
    np.testing.assert_allclose(ext.omega.positions, omega.positions, atol=2 * eps**A)


def test_constant_builder_sweep():
    c = circle(513)
    sw = sweep_diagnostics(lambda e: c, [1e-2, 1e-3], c, 0.125, AtomicIntegerMeasure(c.length))
    assert all(r.flat_to_target == 0.0 and r.count == 0 for r in sw.rows)
    assert sw.threshold == 1e-2


def test_sweep_requires_decreasing():
    c = circle(65)
    with pytest.raises(ValueError):
        sweep_diagnostics(lambda e: c, [1e-3, 1e-2], c, 0.125, AtomicIntegerMeasure(c.length))


@pytest.mark.parametrize("eps", [1e-3, 1e-4, 1e-5])
def test_endpoint_choice_invariance(eps):
    omega = AtomicIntegerMeasure(1.0, [0.3, 0.7], [1, -1])
    curve = build_open_recovery(1.0, omega, eps).constant_speed()
    dev = deviation_intervals(curve, RIGHT, 0.125)
    mu = curvature_measure(curve)
    vals, errs = [], []
    for where in ("left", "mid", "right"):
        v, err = flat_norm_coarse(mu - atoms_from_intervals(dev, where).as_interval_measure(), OPEN, 2000)
        vals.append(v)
        errs.append(err)
    # moving an atom of mass 2 pi by at most b - a, plus the certified coarsening error
    bound = 2 * np.pi * float(np.sum(dev.lengths())) + 2 * max(errs)
    assert max(vals) - min(vals) <= bound + 1e-9


@pytest.mark.parametrize("eps", [1e-4, 1e-5])
def test_rho_robustness(eps):
    for omega in (AtomicIntegerMeasure(1.0, [0.3, 0.7], [1, -1]), AtomicIntegerMeasure(1.0, [0.5], [2])):
        curve = build_open_recovery(1.0, omega, eps).constant_speed()
        seen = {extract_singularities(curve, RIGHT, rho).omega.multiplicities for rho in (1 / 16, 1 / 12, 1 / 8)}
        assert len(seen) == 1
        assert sum(abs(c) for c in seen.pop()) == omega.count


def test_count_stable_below_threshold():
    omega = AtomicIntegerMeasure(1.0, [0.3, 0.7], [1, -1])
    eps = [1e-3, 1e-4, 1e-5]
    sw = sweep_diagnostics(open_builder(1.0, omega, A), eps, RIGHT, 0.125, omega)
    assert sw.threshold is not None
    assert all(r.count == 2 for r in sw.rows if r.epsilon <= sw.threshold)
    d = [r.flat_to_target for r in sw.rows]
    assert sw.flat_decreasing and d[-1] <= 0.2
