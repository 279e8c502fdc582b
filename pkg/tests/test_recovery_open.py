import numpy as np
import pytest

from elastica_lab import elastica as el
from elastica_lab.curves import curvature_profile, lift_tangent
from elastica_lab.detector import extract_singularities
from elastica_lab.energies import SIGMA, open_excess_energy
from elastica_lab.errors import BlocksDoNotFit, ParameterOutOfRange
from elastica_lab.measures import OPEN, AtomicIntegerMeasure, curvature_measure, flat_norm_coarse
from elastica_lab.recovery_open import (block_report, build_key_block, build_open_recovery, circle_loop_baseline,
                                        key_block_energy)

EPS = (1e-2, 1e-3, 1e-4, 1e-5)
RIGHT = np.array([1.0, 0.0])


def test_parameter_range():
    build_key_block(1e-2, 0.3)
    with pytest.raises(ParameterOutOfRange):
        build_key_block(1e-2, 0.6)
    with pytest.raises(ParameterOutOfRange):
        build_key_block(0.0, 0.375)


@pytest.mark.parametrize("eps", EPS)
def test_block_invariants(eps):
    blk = build_key_block(eps)
    # horizontal end tangents, one full turn
    assert blk.path.angle0 == 0.0
    assert blk.winding == pytest.approx(1.0, abs=1e-12)
    assert abs(blk.q[1] - blk.p[1]) <= 1e-12
    # length identity and chord
    assert blk.length == pytest.approx(2 * blk.delta + 2 * blk.r * el.theta(eps, -blk.delta), rel=1e-9)
    assert blk.samples.length == pytest.approx(blk.length, rel=1e-6)
    assert np.hypot(*(blk.q - blk.p)) == pytest.approx(blk.chord, rel=1e-9, abs=1e-14)


def test_block_terms_converge():
    terms = np.array([key_block_energy(build_key_block(e))[:3] for e in EPS])
    I, II, III = terms.T
    assert np.all(np.diff(I) < 0) and np.all(np.diff(III) < 0) and np.all(np.diff(II) > 0)
    assert II[-1] == pytest.approx(SIGMA, rel=0.01)
    # the connector terms shrink by an order of magnitude over the sweep
    assert I[-1] < 0.1 * I[0] and III[-1] < 0.1 * III[0]


def test_block_near_sigma_at_smallest_eps():
    G = key_block_energy(build_key_block(1e-5))[3]
    assert abs(G - SIGMA) / SIGMA <= 0.02


@pytest.mark.parametrize("eps", EPS)
def test_decomposition_matches_quadrature(eps):
    rep = block_report(build_key_block(eps, n=2**14 + 1))
    assert abs(sum(rep.block_terms) - rep.total) <= 1e-4 * rep.total


def test_sign_symmetry():
    eps = 1e-3
    up, down = build_key_block(eps, sign=1), build_key_block(eps, sign=-1)
    ku = curvature_profile(lift_tangent(up.samples))
    kd = curvature_profile(lift_tangent(down.samples))
    np.testing.assert_allclose(kd, -ku, atol=1e-8 * np.max(np.abs(ku)))
    assert block_report(down).total == pytest.approx(block_report(up).total, rel=1e-12)
    L = 1.0
    for sg in (1, -1):
        rec = build_open_recovery(L, AtomicIntegerMeasure(L, [0.5], [sg]), 1e-4)
        ext = extract_singularities(rec.constant_speed(), RIGHT, 0.125)
        assert ext.omega.multiplicities == (sg,)


def test_zero_omega_is_segment():
    rec = build_open_recovery(1.0, AtomicIntegerMeasure(1.0), 1e-3)
    rep = open_excess_energy(rec.curve, (0, 0), (1, 0), 1e-3)
    assert rep.total == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("omega", [
    AtomicIntegerMeasure(1.0, [0.5], [1]),
    AtomicIntegerMeasure(1.0, [0.3, 0.7], [1, -1]),
    AtomicIntegerMeasure(1.0, [0.4], [2]),
])
def test_recovery_admissible_and_c1(omega):
    for eps in (1e-3, 1e-4):
        rec = build_open_recovery(1.0, omega, eps)
        # raises AdmissibilityError on failure
        open_excess_energy(rec.curve, (0, 0), (1, 0), eps)
        path = rec.path
        for s in path.piece_offsets[1:-1]:
            p, th, _ = path.evaluate(np.array([s - 1e-12, s + 1e-12]))
            assert np.hypot(*(p[1] - p[0])) <= 1e-10 and abs(th[1] - th[0]) <= 1e-9
        np.testing.assert_allclose(rec.curve.points[-1], [1.0, 0.0], atol=1e-12)


def test_one_atom_sweep():
    omega = AtomicIntegerMeasure(1.0, [0.5], [1])
    G, dist = [], []
    for eps in EPS:
        rec = build_open_recovery(1.0, omega, eps)
        G.append(open_excess_energy(rec.curve, (0, 0), (1, 0), eps).total)
        mu = curvature_measure(rec.constant_speed())
        dist.append(flat_norm_coarse(mu - omega.as_interval_measure(), OPEN, 2000)[0])
    assert all(b < a for a, b in zip(G, G[1:]))
    assert abs(G[-1] / SIGMA - 1) <= 0.02
    assert all(b < a for a, b in zip(dist, dist[1:])) and dist[-1] <= 0.2


def test_double_atom_energy():
    omega = AtomicIntegerMeasure(1.0, [0.5], [2])
    rec = build_open_recovery(1.0, omega, 1e-5)
    G = open_excess_energy(rec.curve, (0, 0), (1, 0), 1e-5).total
    assert abs(G / (2 * SIGMA) - 1) <= 0.03
    assert len(rec.centers) == 2


def test_blocks_do_not_fit():
    with pytest.raises(BlocksDoNotFit):
        build_open_recovery(1.0, AtomicIntegerMeasure(1.0, [0.5, 0.52], [1, 1]), 1e-2)


@pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4, 1e-5])
def test_circle_loop(eps):
    base = circle_loop_baseline(1.0, eps)
    G = open_excess_energy(base.curve, (0, 0), (1, 0), eps).total
    assert G == pytest.approx(4 * np.pi, rel=1e-3)
    ext = extract_singularities(to_cs(base), RIGHT, 0.125)
    assert ext.omega.multiplicities == (1,)
    if eps <= 1e-3:
        assert G - key_block_energy(build_key_block(eps))[3] > 0


def test_baseline_gap_limit():
    eps = 1e-5
    gap = (open_excess_energy(circle_loop_baseline(1.0, eps).curve, (0, 0), (1, 0), eps).total
           - key_block_energy(build_key_block(eps))[3])
    assert gap == pytest.approx(4 * np.pi - 8 * np.sqrt(2), abs=0.25)


def to_cs(rec):
    return rec.constant_speed()
