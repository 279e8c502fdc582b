"""Exact arclength-parametrized paths built from intrinsic pieces.

A piece knows its length and, in a local frame where it starts at the origin
with tangent angle 0, its position, tangent angle and curvature at every
arclength.  A :class:`Path` chains pieces tangentially (each piece starts
where the previous one ends, with the same tangent) and can be rescaled by a
homothety.  Concatenating this way translates later pieces automatically,
so the result is always C^1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from . import elastica as el
from .curves import CONSTANT_SPEED, PlanarCurve, lift_tangent


def _rot(points: np.ndarray, angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.column_stack([c * points[:, 0] - s * points[:, 1], s * points[:, 0] + c * points[:, 1]])


class Piece:
    length: float

    def local(self, u: np.ndarray):
        """Position ``(k, 2)``, angle and curvature at local arclengths ``u``."""
        raise NotImplementedError

    def end(self):
        p, th, _ = self.local(np.array([self.length]))
        return p[0], float(th[0])


@dataclass(frozen=True)
class Straight(Piece):
    length: float

    def local(self, u):
        u = np.asarray(u, float)
        return np.column_stack([u, np.zeros_like(u)]), np.zeros_like(u), np.zeros_like(u)


@dataclass(frozen=True)
class Arc(Piece):
    """Circular arc of signed curvature ``k`` (counterclockwise for ``k > 0``)."""

    length: float
    k: float

    def local(self, u):
        u = np.asarray(u, float)
        a = self.k * u
        if self.k == 0:
            return np.column_stack([u, np.zeros_like(u)]), np.zeros_like(u), np.zeros_like(u)
        x = np.sin(a) / self.k
        y = 2.0 * np.sin(0.5 * a) ** 2 / self.k
        return np.column_stack([x, y]), a, np.full_like(u, self.k)


@dataclass(frozen=True)
class ElasticaPiece(Piece):
    """Borderline elastica between arclengths ``s0 < s1``, mirrored when ``sign = -1``."""

    epsilon: float
    s0: float
    s1: float
    sign: int = 1

    @property
    def length(self) -> float:
        return self.s1 - self.s0

    def local(self, u):
        u = np.asarray(u, float)
        s = self.s0 + u
        th0 = float(el.theta(self.epsilon, self.s0))
        p = el.position(self.epsilon, s) - el.position(self.epsilon, self.s0)
        p = _rot(np.atleast_2d(p), -th0)
        th = el.theta(self.epsilon, s) - th0
        kap = el.curvature(self.epsilon, s)
        if self.sign < 0:
            p = p * np.array([1.0, -1.0])
            th, kap = -th, -kap
        return p, th, kap


@dataclass(frozen=True)
class SplinePiece(Piece):
    """Sub-arc ``[a, b]`` of a sampled curve, through a cubic spline on its arclength grid.

    For closed curves ``a`` and ``b`` may exceed the period; the spline is
    periodic and the angle is lifted continuously.
    """

    curve_spline: object
    a: float
    b: float

    @property
    def length(self) -> float:
        return self.b - self.a

    def local(self, u):
        return self.curve_spline.local(self.a, np.asarray(u, float))


class CurveSpline:
    """Cubic-spline model of a sampled closed or open curve for exact-ish evaluation."""

    def __init__(self, curve: PlanarCurve):
        s = curve.arclength
        bc = "periodic" if curve.closed else "not-a-knot"
        self.closed = curve.closed
        self.period = float(s[-1])
        self.pos = CubicSpline(s, curve.points, axis=0, bc_type=bc)
        lifting = lift_tangent(curve)
        self.winding = lifting.winding
        # the spline's own tangent angle, lifted continuously from the lifting
        d = self.pos(s, 1)
        ang = np.arctan2(d[:, 1], d[:, 0])
        ang = lifting.theta + np.angle(np.exp(1j * (ang - lifting.theta)))
        self.turn = float(ang[-1] - ang[0]) if curve.closed else 0.0
        jumpless = ang - (self.turn / self.period) * s if curve.closed else ang
        self.ang = CubicSpline(s, jumpless, bc_type="periodic" if curve.closed else "not-a-knot")
        self.s = s

    def theta(self, t):
        t = np.asarray(t, float)
        if self.closed:
            k = np.floor(t / self.period)
            r = t - k * self.period
            return self.ang(r) + (self.turn / self.period) * r + k * self.turn
        return self.ang(t)

    def point(self, t):
        t = np.asarray(t, float)
        return self.pos(np.mod(t, self.period) if self.closed else t)

    def curvature(self, t):
        t = np.asarray(t, float)
        d1 = self.pos(np.mod(t, self.period) if self.closed else t, 1)
        d2 = self.pos(np.mod(t, self.period) if self.closed else t, 2)
        sp = np.hypot(d1[..., 0], d1[..., 1])
        return (d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]) / sp**3

    def local(self, a: float, u: np.ndarray):
        t = a + u
        th0 = float(self.theta(a))
        p = self.point(t) - self.point(a)
        return _rot(np.atleast_2d(p), -th0), self.theta(t) - th0, self.curvature(t)


@dataclass
class Path:
    """Tangential chain of pieces, scaled by ``scale`` about the origin.

    The unscaled chain starts at ``start`` with tangent angle ``angle0``;
    the represented curve is ``s -> scale * chain(s / scale)``.
    """

    pieces: list
    start: tuple = (0.0, 0.0)
    angle0: float = 0.0
    scale: float = 1.0
    _offsets: np.ndarray = field(init=False, repr=False)
    _starts: np.ndarray = field(init=False, repr=False)
    _angles: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.pieces = [p for p in self.pieces if p.length > 0]
        lengths = np.array([p.length for p in self.pieces], dtype=float)
        self._offsets = np.concatenate([[0.0], np.cumsum(lengths)])
        starts = [np.asarray(self.start, float)]
        angles = [float(self.angle0)]
        for p in self.pieces:
            dp, dth = p.end()
            starts.append(starts[-1] + _rot(dp[None, :], angles[-1])[0])
            angles.append(angles[-1] + dth)
        self._starts = np.array(starts)
        self._angles = np.array(angles)

    @property
    def base_length(self) -> float:
        return float(self._offsets[-1])

    @property
    def length(self) -> float:
        return self.scale * self.base_length

    @property
    def piece_offsets(self) -> np.ndarray:
        """Start arclength of every piece (and the total), in scaled units."""
        return self.scale * self._offsets

    def scaled(self, lam: float) -> Path:
        return Path(list(self.pieces), self.start, self.angle0, self.scale * lam)

    def end_point(self) -> np.ndarray:
        return self.scale * self._starts[-1]

    def end_angle(self) -> float:
        return float(self._angles[-1])

    def start_point(self) -> np.ndarray:
        return self.scale * self._starts[0]

    def subpieces(self, a: float, b: float) -> list:
        """Intrinsic pieces covering unscaled arclengths ``[a, b]`` of the chain."""
        out = []
        for i, piece in enumerate(self.pieces):
            lo, hi = self._offsets[i], self._offsets[i + 1]
            ua, ub = max(a, lo) - lo, min(b, hi) - lo
            if ub <= ua:
                continue
            out.append(_truncate(piece, ua, ub))
        return out

    def angle_at(self, s) -> np.ndarray:
        """Tangent angle at scaled arclengths ``s``, continued by the total turn beyond the end."""
        s = np.asarray(s, float)
        ell = self.length
        k = np.floor(s / ell)
        r = s - k * ell
        _, th, _ = self.evaluate(np.atleast_1d(r))
        return th.reshape(np.shape(s)) + k * (self.end_angle() - self.angle0)

    def evaluate(self, s: np.ndarray):
        """Points, tangent angles and curvatures at scaled arclengths ``s``."""
        s = np.asarray(s, float) / self.scale
        idx = np.clip(np.searchsorted(self._offsets, s, side="right") - 1, 0, len(self.pieces) - 1)
        pts = np.empty((len(s), 2))
        th = np.empty(len(s))
        kap = np.empty(len(s))
        for i in np.unique(idx):
            sel = idx == i
            u = s[sel] - self._offsets[i]
            p, a, k = self.pieces[i].local(u)
            pts[sel] = self._starts[i] + _rot(p, self._angles[i])
            th[sel] = self._angles[i] + a
            kap[sel] = k
        return self.scale * pts, th, kap / self.scale

    def sample(self, n: int, closed: bool = False, shift: float = 0.0):
        """Sample at ``n`` uniformly spaced arclengths.

        With ``closed=True`` the nodes are ``shift + k * length / (n - 1)``
        taken modulo the length, the last node repeating the first; the
        angle field is lifted continuously across the seam and the curve is
        returned at constant speed over ``[0, length]``, so that samplings of
        different paths of equal length share one grid up to rounding.

        Returns:
            ``(curve, s, theta, kappa)`` with ``s`` the node parameters in
            ``[0, length]`` relative to the sampling origin.
        """
        ell = self.length
        s = np.linspace(0.0, ell, n)
        if closed:
            t = np.mod(s + shift, ell)
            t[-1] = t[0]
            pts, th, kap = self.evaluate(t)
            # continuous angle along the sampling order
            turn = self.end_angle() - self.angle0
            wrap = np.floor((s + shift) / ell)
            wrap = wrap - wrap[0]
            wrap[-1] = wrap[0] + 1
            th = th + turn * wrap
            pts[-1] = pts[0]
            curve = PlanarCurve(pts, closed=True, param=CONSTANT_SPEED, L=ell)
        else:
            pts, th, kap = self.evaluate(s)
            curve = PlanarCurve(pts, closed=False)
        return curve, s, th, kap


def _truncate(piece: Piece, ua: float, ub: float) -> Piece:
    if isinstance(piece, Straight):
        return Straight(ub - ua)
    if isinstance(piece, Arc):
        return Arc(ub - ua, piece.k)
    if isinstance(piece, ElasticaPiece):
        return ElasticaPiece(piece.epsilon, piece.s0 + ua, piece.s0 + ub, piece.sign)
    if isinstance(piece, SplinePiece):
        return SplinePiece(piece.curve_spline, piece.a + ua, piece.a + ub)
    raise TypeError(f"cannot truncate {type(piece).__name__}")


def circle_path(R: float = 1.0) -> Path:
    """Counterclockwise circle of radius ``R`` about the origin, starting at ``(R, 0)``."""
    return Path([Arc(2.0 * np.pi * R, 1.0 / R)], start=(R, 0.0), angle0=0.5 * np.pi)


def spline_path(curve: PlanarCurve) -> Path:
    """Whole sampled curve as a single spline piece."""
    spl = CurveSpline(curve)
    th0 = float(spl.theta(0.0))
    return Path([SplinePiece(spl, 0.0, spl.period)], start=tuple(curve.points[0]), angle0=th0)


def concat_lengths(pieces: Sequence[Piece]) -> float:
    return float(sum(p.length for p in pieces))
