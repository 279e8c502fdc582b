"""Detection of curvature concentration.

The tangent of a low-energy curve stays close to the reference tangent
except on a few short intervals where it winds by a multiple of 2 pi.
:func:`deviation_intervals` finds those intervals, :func:`extract_singularities`
turns each into an atom ``2 pi k delta_x`` and :func:`sweep_diagnostics`
tracks the bounds and flat distances along a sequence of epsilons.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .curves import PlanarCurve, curvature_profile, lift_tangent
from .errors import GridMismatch
from .measures import (OPEN, PERIODIC, AtomicIntegerMeasure, IntervalMeasure, curvature_measure,
                       flat_norm_coarse)

CONFIDENCE_LIMIT = 0.15
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Interval:
    """One deviation interval ``(a, b)``; ``a > b`` marks an interval across the seam."""

    a: float
    b: float
    raw: float
    k: int

    @property
    def confidence(self) -> float:
        """Distance of ``raw / 2 pi`` from its nearest integer (0 is best)."""
        return abs(self.raw / TWO_PI - self.k)


@dataclass(frozen=True)
class DeviationSet:
    rho: float
    D: float
    intervals: tuple
    closed: bool = False

    def lengths(self) -> np.ndarray:
        return np.array([(iv.b - iv.a) % self.D if iv.a > iv.b else iv.b - iv.a for iv in self.intervals])

    @property
    def measure(self) -> float:
        """Total length ``|E_rho|`` in the curve's parameter."""
        return float(self.lengths().sum())

    def midpoints(self) -> np.ndarray:
        return np.array([(iv.a + 0.5 * ((iv.b - iv.a) % self.D)) % self.D if iv.a > iv.b
                         else 0.5 * (iv.a + iv.b) for iv in self.intervals])


@dataclass
class _Field:
    grid: np.ndarray
    deviation: np.ndarray
    winding_angle: np.ndarray
    kappa_abs: np.ndarray
    D: float
    closed: bool


def _field(curve_eps: PlanarCurve, reference) -> _Field:
    lift = lift_tangent(curve_eps)
    grid = lift.grid
    kappa = curvature_profile(lift)
    if isinstance(reference, PlanarCurve):
        if not (curve_eps.closed and reference.closed):
            raise GridMismatch("closed mode needs two closed curves")
        if reference.n != curve_eps.n:
            raise GridMismatch(f"node counts differ: {curve_eps.n} vs {reference.n}")
        ref = lift_tangent(reference)
        dev = np.hypot(*(lift.tangents - ref.tangents).T)
        ang = lift.theta - ref.theta
        return _Field(grid, dev, ang, np.abs(kappa), lift.domain_length, True)
    v = np.asarray(reference, dtype=float)
    if v.shape == (2, 2):  # endpoints (p, q)
        v = v[1] - v[0]
    v = v / np.hypot(*v)
    vel = lift.speed * lift.tangents
    dev = np.hypot(*(vel - v).T)
    base = np.arctan2(v[1], v[0])
    ang = lift.theta - base
    return _Field(grid, dev, ang, np.abs(kappa), lift.domain_length, False)


def _crossings(grid, f):
    """Sub-cell zero crossings of ``f`` by linear interpolation."""
    pos = f > 0
    change = np.flatnonzero(pos[1:] != pos[:-1])
    x0, x1 = grid[change], grid[change + 1]
    f0, f1 = f[change], f[change + 1]
    xc = x0 + (x1 - x0) * f0 / (f0 - f1)
    return change, xc, pos


def _interp(grid, values, x):
    return np.interp(x, grid, values)


def deviation_intervals(curve_eps: PlanarCurve, reference, rho: float, *, _field_cache=None) -> DeviationSet:
    """Maximal intervals where the tangent deviation exceeds ``rho``.

    Args:
        curve_eps: the curve to analyse.  Open curves are compared with a
            direction (a 2-vector ``v`` or endpoint pair ``(p, q)``) through
            the velocity ``speed * t`` in their own parameter; closed curves
            with a reference closed curve node by node.
        reference: direction / endpoints, or a closed :class:`PlanarCurve`.
        rho: threshold in ``(0, 1/2)``.

    Raises:
        GridMismatch: in closed mode when the node counts differ.
    """
    if not (0.0 < rho < 0.5):
        raise ValueError("rho must lie in (0, 1/2)")
    fd = _field_cache or _field(curve_eps, reference)
    f = fd.deviation - rho
    grid = fd.grid
    change, xc, pos = _crossings(grid, f)
    bounds = []
    edges = []
    if pos[0]:
        edges.append(("up", grid[0]))
    for c, x in zip(change, xc):
        edges.append(("up" if pos[c + 1] else "down", x))
    if pos[-1]:
        edges.append(("down", grid[-1]))
    it = iter(edges)
    for up, down in zip(it, it):
        bounds.append([up[1], down[1]])
    # merge an interval ending at D with one starting at 0 across the seam
    if fd.closed and len(bounds) >= 2 and pos[0] and pos[-1]:
        first = bounds.pop(0)
        bounds[-1][1] = first[1]
    intervals = []
    for a, b in bounds:
        if a > b:
            raw = (_interp(grid, fd.winding_angle, grid[-1]) - _interp(grid, fd.winding_angle, a)
                   + _interp(grid, fd.winding_angle, b) - _interp(grid, fd.winding_angle, grid[0]))
        else:
            raw = _interp(grid, fd.winding_angle, b) - _interp(grid, fd.winding_angle, a)
        intervals.append(Interval(float(a), float(b), float(raw), int(np.round(raw / TWO_PI))))
    return DeviationSet(rho=float(rho), D=float(fd.D), intervals=tuple(intervals), closed=fd.closed)


@dataclass(frozen=True)
class Extraction:
    """Atomic measure read off a curve, with intervals that failed classification."""

    omega: AtomicIntegerMeasure
    deviation: DeviationSet
    low_confidence: tuple = field(default=())

    @property
    def count(self) -> int:
        return self.omega.count


def atoms_from_intervals(dev: DeviationSet, where: str = "mid") -> AtomicIntegerMeasure:
    """Atoms at interval midpoints (or left / right ends), multiplicity ``k``."""
    pairs = {}
    for iv, mid in zip(dev.intervals, dev.midpoints()):
        if iv.k == 0:
            continue
        x = {"mid": mid, "left": iv.a, "right": iv.b}[where]
        pairs[float(x)] = pairs.get(float(x), 0) + iv.k
    return AtomicIntegerMeasure.from_pairs(dev.D, pairs.items())


def extract_singularities(curve_eps: PlanarCurve, reference, rho: float) -> Extraction:
    """Candidate limit measure ``2 pi sum k_i delta_{x_i}`` from the deviation intervals.

    Intervals whose winding is further than ``CONFIDENCE_LIMIT`` from an
    integer, and in closed mode intervals with ``|k| > 1``, are reported in
    ``low_confidence`` (their rounded ``k`` is still used).
    """
    dev = deviation_intervals(curve_eps, reference, rho)
    flagged = tuple(iv for iv in dev.intervals
                    if iv.confidence > CONFIDENCE_LIMIT or (dev.closed and abs(iv.k) > 1))
    return Extraction(atoms_from_intervals(dev), dev, flagged)


def concentrated_curvature(curve_eps: PlanarCurve, dev: DeviationSet) -> float:
    """``int_E |kappa| ds`` over the deviation set, by trapezoid on clipped cells."""
    lift = lift_tangent(curve_eps)
    grid = lift.grid
    ka = np.abs(curvature_profile(lift)) * lift.speed  # per unit of the grid parameter
    total = 0.0
    for iv in dev.intervals:
        segs = [(iv.a, grid[-1]), (grid[0], iv.b)] if iv.a > iv.b else [(iv.a, iv.b)]
        for a, b in segs:
            inner = (grid > a) & (grid < b)
            xs = np.concatenate([[a], grid[inner], [b]])
            total += float(np.trapezoid(np.interp(xs, grid, ka), xs))
    return total


@dataclass(frozen=True)
class SweepRow:
    epsilon: float
    E_measure: float
    E_curvature: float
    n_intervals: int
    count: int
    flat_to_extracted: float
    flat_to_target: float
    flat_error_bound: float

    def as_tuple(self) -> tuple:
        return (self.epsilon, self.E_measure, self.E_curvature, self.n_intervals,
                self.flat_to_extracted, self.flat_to_target)


CSV_FIELDS = ("epsilon", "E_measure", "E_curvature", "n_intervals", "flat_to_extracted", "flat_to_target")


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    rho: float
    C_measure: float
    C_curvature: float
    flat_decreasing: bool
    threshold: float | None

    def counts(self) -> list[int]:
        return [r.count for r in self.rows]


def reference_measure(reference, D: float) -> IntervalMeasure | None:
    if isinstance(reference, PlanarCurve):
        return curvature_measure(reference)
    return None


def sweep_diagnostics(builder: Callable[[float], PlanarCurve], eps_list: Sequence[float], reference,
                      rho: float, target_omega: AtomicIntegerMeasure, n_cells: int = 2000) -> SweepResult:
    """Compactness diagnostics along a decreasing epsilon sequence.

    For each epsilon: ``|E_rho|``, ``int_E |kappa|``, the interval count, and
    the flat distances of the curvature measure (minus the reference
    curvature in closed mode) to the extracted measure and to
    ``target_omega``.  The constants ``C`` fitted are the smallest with
    ``|E| rho^2 <= C sqrt(eps)`` and ``int_E |kappa| <= C / rho`` on all rows.
    ``threshold`` is the largest epsilon from which on the extracted count
    equals ``target_omega.count``.
    """
    eps_list = list(eps_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be decreasing")
    rows = []
    mode = PERIODIC if isinstance(reference, PlanarCurve) else OPEN
    ref_mu = None
    for eps in eps_list:
        curve = builder(eps)
        ext = extract_singularities(curve, reference, rho)
        mu = curvature_measure(curve)
        if isinstance(reference, PlanarCurve):
            if ref_mu is None or len(ref_mu.grid) != len(mu.grid):
                ref_mu = curvature_measure(reference)
            mu = IntervalMeasure(mu.D, mu.density - ref_mu.density, (), mu.grid)
        target = target_omega.as_interval_measure()
        d_ext, b1 = flat_norm_coarse(mu - ext.omega.as_interval_measure(), mode, n_cells)
        d_tgt, b2 = flat_norm_coarse(mu - target, mode, n_cells)
        rows.append(SweepRow(float(eps), ext.deviation.measure, concentrated_curvature(curve, ext.deviation),
                             len(ext.deviation.intervals), ext.count, d_ext, d_tgt, max(b1, b2)))
    C_meas = max((r.E_measure * rho**2 / np.sqrt(r.epsilon) for r in rows), default=0.0)
    C_curv = max((r.E_curvature * rho for r in rows), default=0.0)
    d = [r.flat_to_target for r in rows]
    decreasing = all(b < a for a, b in zip(d, d[1:]))
    threshold = None
    for r in reversed(rows):
        if r.count != target_omega.count:
            break
        threshold = r.epsilon
    return SweepResult(tuple(rows), float(rho), float(C_meas), float(C_curv), decreasing, threshold)
