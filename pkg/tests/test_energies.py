import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elastica_lab.curves import AngleLifting, PlanarCurve, lift_tangent
from elastica_lab.energies import (SIGMA, bending_energy, closed_excess_energy, flat_defect_check, limit_energy,
                                   mm_lower_bound, open_excess_energy, phi_defect, phi_transform, sigma_quadrature)
from elastica_lab.errors import AdmissibilityError, GridMismatch, LengthMismatch
from elastica_lab.geometry import circle
from elastica_lab.measures import AtomicIntegerMeasure
from elastica_lab.paths import circle_path
from elastica_lab.recovery_open import block_report, build_key_block, circle_loop_baseline


def segment(n=201, L=1.0):
    x = np.linspace(0.0, L, n)
    return PlanarCurve(np.column_stack([x, np.zeros(n)]))


def test_sigma_quadrature():
    assert abs(sigma_quadrature() - 8 * np.sqrt(2)) <= 1e-10


@given(st.floats(-20, 20))
def test_phi_is_odd_and_periodic_shift(t):
    assert phi_transform(-t) == pytest.approx(-phi_transform(t), abs=1e-12)
    assert phi_transform(t + 2 * np.pi) == pytest.approx(phi_transform(t) + SIGMA, abs=1e-10)
    assert phi_defect(t + 2 * np.pi) == pytest.approx(phi_defect(t), abs=1e-10)


def test_phi_defect_vanishes_on_lattice():
    assert np.max(np.abs(phi_defect(2 * np.pi * np.arange(-3, 4)))) <= 1e-12


@pytest.mark.parametrize("R", [0.5, 2.0])
def test_bending_energy_circle(R):
    assert bending_energy(circle(2049, R)) == pytest.approx(2 * np.pi / R, rel=1e-6)


def test_bending_energy_segment():
    assert bending_energy(segment()) == 0.0


def test_open_segment_zero():
    rep = open_excess_energy(segment(), (0, 0), (1, 0), 1e-3)
    assert rep.total == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("eps", [1e-3, 1e-4, 1e-5])
def test_circle_loop_four_pi(eps):
    base = circle_loop_baseline(1.0, eps)
    rep = open_excess_energy(base.curve, (0, 0), (1, 0), eps)
    assert rep.total == pytest.approx(4 * np.pi, rel=1e-3)
    assert abs(rep.total - rep.mm_total) <= 1e-6 * (1 + rep.total)


def test_key_block_near_sigma():
    rep = block_report(build_key_block(1e-5, 0.375))
    assert abs(rep.total / SIGMA - 1) <= 0.02


@pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4])
def test_geometric_and_mm_forms_agree(eps):
    rep = block_report(build_key_block(eps, 0.375))
    assert abs(rep.total - rep.mm_total) <= 1e-6 * (1 + abs(rep.total))


@pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4, 1e-5])
def test_young_inequality(eps):
    for rep in (block_report(build_key_block(eps, 0.375)),
                open_excess_energy(circle_loop_baseline(1.0, eps).curve, (0, 0), (1, 0), eps)):
        assert rep.total >= rep.mm_lower_bound - 1e-8 * (1 + abs(rep.total))


def test_admissibility_errors():
    x = np.linspace(0, 1, 50)
    bent = PlanarCurve(np.column_stack([x, 0.1 * x**2]))
    with pytest.raises(AdmissibilityError):
        open_excess_energy(bent, (0, 0), (1, 0), 1e-3)
    assert open_excess_energy(bent, (0, 0), (1, 0), 1e-3, check=False).total > 0


def test_closed_identical_curves():
    R = 1.0
    c = circle(4097, R)
    eps = 1e-3
    rep = closed_excess_energy(c, c, eps)
    assert rep.excess_term == 0.0
    assert rep.total == pytest.approx(np.sqrt(eps) * 2 * np.pi / R, rel=1e-6)


@pytest.mark.parametrize("beta", [0.1, 0.7, 2.0])
def test_rotated_copy_excess(beta):
    eps = 1e-3
    path = circle_path(1.0)
    n = 4097
    ref = path.sample(n, closed=True)[0]
    shifted = path.sample(n, closed=True, shift=beta)[0]
    rep = closed_excess_energy(shifted, ref, eps)
    ell = 2 * np.pi
    assert rep.excess_term == pytest.approx((1 - np.cos(beta)) * ell / np.sqrt(eps), rel=1e-6)
    # constant phi = beta turns the tangent form into the angle form exactly
    mm_excess = rep.mm_total - rep.curvature_term
    assert abs(mm_excess - rep.excess_term) <= 1e-8 * (1 + rep.excess_term)


def test_closed_mismatches():
    with pytest.raises(GridMismatch):
        closed_excess_energy(circle(100), circle(101), 1e-3)
    with pytest.raises(LengthMismatch):
        closed_excess_energy(circle(100), circle(100, 1.1), 1e-3)


@pytest.mark.parametrize("omega,expected", [
    (AtomicIntegerMeasure(1.0), (0, 0.0)),
    (AtomicIntegerMeasure(1.0, [0.2, 0.6], [1, 1]), (2, 16 * np.sqrt(2))),
    (AtomicIntegerMeasure(1.0, [0.5], [-2]), (2, 16 * np.sqrt(2))),
])
def test_limit_energy(omega, expected):
    n, g = limit_energy(omega)
    assert n == expected[0] and g == pytest.approx(expected[1])


def test_mm_lower_bound_examples():
    grid = np.linspace(0, 1, 101)
    assert mm_lower_bound(AngleLifting(grid, np.zeros(101))) == 0.0
    assert mm_lower_bound(AngleLifting(grid, 2 * np.pi * grid**2)) == pytest.approx(SIGMA, abs=1e-12)


def test_mm_lower_bound_along_key_block_sweep():
    from elastica_lab.elastica import sample_borderline

    vals = []
    for eps in (1e-2, 1e-3, 1e-4):
        blk = build_key_block(eps, 0.375)
        # the full block turns monotonically from 0 to 2 pi, so its value is exactly sigma
        assert mm_lower_bound(lift_tangent(blk.samples)) == pytest.approx(SIGMA, abs=1e-9)
        piece = sample_borderline(eps, -blk.delta, blk.delta, 4097)
        lb = mm_lower_bound(lift_tangent(piece))
        w = np.sqrt(2 * eps)
        assert SIGMA * np.tanh(blk.delta / w) - 1e-6 <= lb <= SIGMA
        vals.append(lb)
    assert vals[0] < vals[1] < vals[2]


@given(st.integers(0, 2**31 - 1))
def test_flat_defect_bound_random_fields(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 60))
    grid = np.sort(rng.random(n)) + np.arange(n)
    th = np.cumsum(rng.normal(0, 1.5, n))
    lhs, rhs = flat_defect_check(AngleLifting(grid, th))
    assert lhs <= rhs + 1e-8
