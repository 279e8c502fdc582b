"""Discrete planar curves, tangent-angle liftings and curvature.

A :class:`PlanarCurve` is an ordered list of samples of an immersed planar
curve.  Node parameters are cumulative chord lengths (arclength curves) or
those chord lengths rescaled to ``[0, L]`` (constant-speed curves).  Closed
curves store the seam twice: ``points[-1] == points[0]``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import AmbiguousBranchWarning, CurveFormatError, DegenerateSegment

ARCLENGTH = "arclength"
CONSTANT_SPEED = "constant_speed"

CLOSURE_TOL = 1e-9
BRANCH_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PlanarCurve:
    """Sampled immersed planar curve.

    Args:
        points: ``(n, 2)`` array of samples.
        closed: whether the curve is closed; then the last sample repeats the first.
        param: ``"arclength"`` or ``"constant_speed"``.
        L: domain length for constant-speed curves (ignored for arclength).
    """

    points: np.ndarray
    closed: bool = False
    param: str = ARCLENGTH
    L: float | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise CurveFormatError(f"points must have shape (n, 2), got {pts.shape}")
        if pts.shape[0] < 2:
            raise CurveFormatError("a curve needs at least two samples")
        if self.param not in (ARCLENGTH, CONSTANT_SPEED):
            raise CurveFormatError(f"unknown param kind {self.param!r}")
        if self.param == CONSTANT_SPEED:
            if self.L is None or not self.L > 0:
                raise CurveFormatError("constant_speed curves need a positive L")
        seg = np.hypot(*np.diff(pts, axis=0).T)
        if np.any(seg == 0.0):
            k = int(np.flatnonzero(seg == 0.0)[0])
            raise DegenerateSegment(f"samples {k} and {k + 1} coincide")
        if self.closed:
            scale = max(1.0, float(seg.sum()))
            if np.hypot(*(pts[-1] - pts[0])) > CLOSURE_TOL * scale:
                raise CurveFormatError("closed curve: first and last samples differ")
            pts = pts.copy()
            pts[-1] = pts[0]
        object.__setattr__(self, "points", _readonly(pts))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def segment_lengths(self) -> np.ndarray:
        return np.hypot(*np.diff(self.points, axis=0).T)

    @property
    def arclength(self) -> np.ndarray:
        """Cumulative chord length at every node, starting at 0."""
        return np.concatenate([[0.0], np.cumsum(self.segment_lengths)])

    @property
    def length(self) -> float:
        return float(self.segment_lengths.sum())

    @property
    def domain_length(self) -> float:
        return self.length if self.param == ARCLENGTH else float(self.L)

    @property
    def speed(self) -> float:
        """|d gamma / dx|: 1 for arclength curves, length / L otherwise."""
        return 1.0 if self.param == ARCLENGTH else self.length / float(self.L)

    @property
    def grid(self) -> np.ndarray:
        """Node parameters on ``[0, domain_length]`` (the last one pinned to it exactly)."""
        g = self.arclength / self.speed
        g[-1] = self.domain_length
        return g

    def translated(self, offset) -> PlanarCurve:
        return PlanarCurve(self.points + np.asarray(offset, float), self.closed, self.param, self.L)

    def rotated(self, angle: float, center=(0.0, 0.0)) -> PlanarCurve:
        c, s = np.cos(angle), np.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        ctr = np.asarray(center, float)
        return PlanarCurve((self.points - ctr) @ rot.T + ctr, self.closed, self.param, self.L)

    def to_dict(self) -> dict:
        out = {"param": self.param, "closed": bool(self.closed), "points": self.points.tolist()}
        if self.param == CONSTANT_SPEED:
            out["L"] = float(self.L)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> PlanarCurve:
        try:
            param = data["param"]
            closed = bool(data["closed"])
            points = np.asarray(data["points"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise CurveFormatError(f"malformed curve record: {exc}") from exc
        L = data.get("L")
        curve = cls(points, closed=closed, param=param, L=L)
        if curve.n < 3:
            raise CurveFormatError("a curve file needs at least three samples")
        return curve


def save_curve(curve: PlanarCurve, path) -> None:
    Path(path).write_text(json.dumps(curve.to_dict()))


def load_curve(path) -> PlanarCurve:
    return PlanarCurve.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True, eq=False)
class AngleLifting:
    """Continuous lifting of the unit tangent on a node grid.

    ``speed`` is |d gamma/dx| on the grid (``length / L`` for constant-speed
    curves); curvature is ``(1/speed) d theta/dx``.  ``ambiguous`` lists node
    indices ``k`` where the increment ``theta[k+1] - theta[k]`` was exactly pi.
    """

    grid: np.ndarray
    theta: np.ndarray
    closed: bool = False
    speed: float = 1.0
    ambiguous: tuple = field(default=())

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        theta = np.asarray(self.theta, dtype=float)
        if grid.shape != theta.shape or grid.ndim != 1:
            raise ValueError("grid and theta must be 1-D arrays of equal length")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", _readonly(grid))
        object.__setattr__(self, "theta", _readonly(theta))

    @property
    def basepoint_angle(self) -> float:
        return float(self.theta[0])

    @property
    def domain_length(self) -> float:
        return float(self.grid[-1] - self.grid[0])

    @property
    def winding(self) -> float:
        """(theta(D) - theta(0)) / 2 pi."""
        return float(self.theta[-1] - self.theta[0]) / (2 * np.pi)

    @property
    def tangents(self) -> np.ndarray:
        return np.column_stack([np.cos(self.theta), np.sin(self.theta)])


def _periodic_derivative(values: np.ndarray, grid: np.ndarray, jump: float = 0.0) -> np.ndarray:
    """Second-order derivative of nodal values on a closed grid.

    ``values[-1]`` sits on the duplicated seam node and equals
    ``values[0] + jump``.
    """
    period = grid[-1] - grid[0]
    v_ext = np.concatenate([[values[-2] - jump], values, [values[1] + jump]])
    g_ext = np.concatenate([[grid[-2] - period], grid, [grid[1] + period]])
    hm = g_ext[1:-1] - g_ext[:-2]
    hp = g_ext[2:] - g_ext[1:-1]
    num = hm**2 * v_ext[2:] - hp**2 * v_ext[:-2] + (hp**2 - hm**2) * v_ext[1:-1]
    return num / (hm * hp * (hm + hp))


def nodal_derivative(values: np.ndarray, grid: np.ndarray, closed: bool = False, jump: float = 0.0):
    """Central differences in the interior, one-sided (second order) at open ends."""
    values = np.asarray(values, dtype=float)
    if closed:
        return _periodic_derivative(values, grid, jump)
    return np.gradient(values, grid, axis=0, edge_order=2 if len(grid) > 2 else 1)


def tangent_vectors(curve: PlanarCurve) -> np.ndarray:
    """Unit tangents at every node from second-order differences of the samples."""
    s = curve.arclength
    if curve.closed:
        tx = _periodic_derivative(curve.points[:, 0], s)
        ty = _periodic_derivative(curve.points[:, 1], s)
        t = np.column_stack([tx, ty])
    else:
        t = np.gradient(curve.points, s, axis=0, edge_order=2 if curve.n > 2 else 1)
    norm = np.hypot(t[:, 0], t[:, 1])
    if np.any(norm == 0):
        raise DegenerateSegment("vanishing tangent estimate")
    return t / norm[:, None]


def unwrap_increments(tangents: np.ndarray) -> tuple[np.ndarray, tuple]:
    """Angle increments between consecutive unit vectors, in (-pi, pi]."""
    a, b = tangents[:-1], tangents[1:]
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = np.einsum("ij,ij->i", a, b)
    inc = np.arctan2(cross, dot)
    ambiguous = np.flatnonzero(np.abs(np.abs(inc) - np.pi) <= BRANCH_TOL)
    inc[ambiguous] = np.pi
    inc[inc <= -np.pi] += 2 * np.pi
    return inc, tuple(int(k) for k in ambiguous)


def lift_tangent(curve: PlanarCurve) -> AngleLifting:
    """Minimal lifting of the discrete unit tangent.

    Increments between neighbouring tangents are taken in ``(-pi, pi]``; an
    increment of exactly pi emits :class:`AmbiguousBranchWarning` and takes
    the ``+pi`` branch.
    """
    if curve.n < 3:
        raise ValueError("lift_tangent needs at least three samples")
    t = tangent_vectors(curve)
    inc, ambiguous = unwrap_increments(t)
    if ambiguous:
        warnings.warn(f"tangent increment of exactly pi at nodes {ambiguous}", AmbiguousBranchWarning)
    theta0 = float(np.arctan2(t[0, 1], t[0, 0]))
    theta = theta0 + np.concatenate([[0.0], np.cumsum(inc)])
    return AngleLifting(curve.grid, theta, closed=curve.closed, speed=curve.speed, ambiguous=ambiguous)


def curvature_profile(lifting: AngleLifting) -> np.ndarray:
    """Signed curvature at every node of the lifting's grid."""
    jump = float(lifting.theta[-1] - lifting.theta[0]) if lifting.closed else 0.0
    dtheta = nodal_derivative(lifting.theta, lifting.grid, lifting.closed, jump)
    return dtheta / lifting.speed


def synthesize_from_angle(lifting: AngleLifting, basepoint=(0.0, 0.0), speed: float = 1.0) -> PlanarCurve:
    """Integrate ``speed * (cos theta, sin theta)`` by the cumulative trapezoid rule.

    A lifting flagged closed yields a closed curve; the O(h^2) closure gap is
    removed by a linear drift correction along the grid.
    """
    if not speed > 0:
        raise ValueError("speed must be positive")
    dx = np.diff(lifting.grid)
    c, s = np.cos(lifting.theta), np.sin(lifting.theta)
    steps = 0.5 * speed * np.column_stack([(c[1:] + c[:-1]) * dx, (s[1:] + s[:-1]) * dx])
    pts = np.asarray(basepoint, float) + np.vstack([[0.0, 0.0], np.cumsum(steps, axis=0)])
    if lifting.closed:
        gap = pts[-1] - pts[0]
        frac = (lifting.grid - lifting.grid[0]) / lifting.domain_length
        pts = pts - frac[:, None] * gap
    return PlanarCurve(pts, closed=lifting.closed)


def closure_gap(lifting: AngleLifting, speed: float = 1.0) -> float:
    """Distance between the endpoints of the open trapezoid integration."""
    dx = np.diff(lifting.grid)
    c, s = np.cos(lifting.theta), np.sin(lifting.theta)
    gap = 0.5 * speed * np.array([np.sum((c[1:] + c[:-1]) * dx), np.sum((s[1:] + s[:-1]) * dx)])
    return float(np.hypot(*gap))


def _spline_arclength(spline: CubicSpline, knots: np.ndarray) -> np.ndarray:
    # 5-point Gauss-Legendre per knot interval.
    xg, wg = np.polynomial.legendre.leggauss(5)
    a, b = knots[:-1], knots[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * xg[None, :]
    d = spline(nodes.ravel(), 1).reshape(*nodes.shape, 2)
    speed = np.hypot(d[..., 0], d[..., 1])
    return np.concatenate([[0.0], np.cumsum((speed * wg).sum(axis=1) * half)])


def resample_arclength(curve: PlanarCurve, n: int, method: str = "cubic") -> PlanarCurve:
    """Resample at ``n`` nodes uniformly spaced in arclength.

    ``method="linear"`` walks the polyline itself (exact for polylines whose
    corners land on new nodes); ``method="cubic"`` walks a cubic spline
    through the samples, periodic for closed curves, which preserves the
    length of smooth curves to high order.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    s = curve.arclength
    if method == "linear":
        target = np.linspace(0.0, s[-1], n)
        pts = np.column_stack([np.interp(target, s, curve.points[:, k]) for k in range(2)])
    elif method == "cubic":
        bc = "periodic" if curve.closed else "not-a-knot"
        spline = CubicSpline(s, curve.points, axis=0, bc_type=bc)
        arc = _spline_arclength(spline, s)
        # invert arclength(t) on a refined table, then one Newton polish
        fine_t = np.linspace(0.0, s[-1], 8 * (len(s) - 1) + 1)
        fine_arc = np.interp(fine_t, s, arc)
        fine_arc = _refine_table(spline, s, arc, fine_t)
        target = np.linspace(0.0, arc[-1], n)
        t = np.interp(target, fine_arc, fine_t)
        for _ in range(2):
            cur = _refine_table(spline, s, arc, t)
            d = spline(t, 1)
            t = t - (cur - target) / np.hypot(d[:, 0], d[:, 1])
            t = np.clip(t, 0.0, s[-1])
        pts = spline(t)
    else:
        raise ValueError(f"unknown method {method!r}")
    return PlanarCurve(pts, closed=curve.closed, param=curve.param, L=curve.L)


def _refine_table(spline: CubicSpline, knots: np.ndarray, arc: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Spline arclength from 0 to each ``t`` (Gauss-Legendre on the partial interval)."""
    t = np.asarray(t, dtype=float)
    k = np.clip(np.searchsorted(knots, t, side="right") - 1, 0, len(knots) - 2)
    xg, wg = np.polynomial.legendre.leggauss(5)
    a = knots[k]
    mid, half = 0.5 * (a + t), 0.5 * (t - a)
    nodes = mid[:, None] + half[:, None] * xg[None, :]
    d = spline(nodes.ravel(), 1).reshape(*nodes.shape, 2)
    part = (np.hypot(d[..., 0], d[..., 1]) * wg).sum(axis=1) * half
    return arc[k] + part


def to_constant_speed(curve: PlanarCurve, L: float) -> PlanarCurve:
    """Same samples, reinterpreted on ``[0, L]`` with speed ``length / L``."""
    if curve.closed:
        raise ValueError("to_constant_speed expects an open curve")
    if not L > 0:
        raise ValueError("L must be positive")
    return PlanarCurve(curve.points, closed=False, param=CONSTANT_SPEED, L=float(L))


@dataclass(frozen=True, eq=False)
class PointedCurve:
    """A curve paired with a compatible measure (curvature density plus integer atoms)."""

    curve: PlanarCurve
    mu: object  # measures.IntervalMeasure

    def check_compatible(self, rtol: float = 1e-6) -> bool:
        from .measures import curvature_measure

        ref = curvature_measure(self.curve)
        mu = self.mu
        if mu.density is None or len(mu.density) != len(ref.density):
            return False
        scale = 1.0 + np.max(np.abs(ref.density))
        if np.max(np.abs(mu.density - ref.density)) > rtol * scale:
            return False
        w = np.array([a[1] for a in mu.atoms], dtype=float)
        k = w / (2 * np.pi)
        return bool(np.all(np.abs(k - np.round(k)) <= 1e-9))


def polyline_length(points: Sequence) -> float:
    pts = np.asarray(points, float)
    return float(np.hypot(*np.diff(pts, axis=0).T).sum())
