"""Test shapes sampled uniformly in arclength, and a self-intersection counter."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .curves import PlanarCurve

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _panel_lengths(dfun: Callable, t: np.ndarray) -> np.ndarray:
    a, b = t[:-1], t[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    d = dfun(nodes.ravel())
    sp = np.hypot(d[0], d[1]).reshape(nodes.shape)
    return half * (sp @ _GL_W)


def sample_parametric(fun: Callable, dfun: Callable, t0: float, t1: float, n: int, closed: bool = True,
                      panels: int = 4096) -> PlanarCurve:
    """Sample ``fun`` on ``[t0, t1]`` at ``n`` nodes equally spaced in arclength.

    ``fun`` and ``dfun`` map a parameter array to ``(x, y)`` and ``(x', y')``.
    The arclength table uses 16-point Gauss-Legendre panels; the inversion
    is Newton's method started from linear interpolation in the table.
    """
    t = np.linspace(t0, t1, panels + 1)
    arc = np.concatenate([[0.0], np.cumsum(_panel_lengths(dfun, t))])
    L = arc[-1]
    target = np.linspace(0.0, L, n)
    tt = np.interp(target, arc, t)
    for _ in range(30):
        k = np.clip(np.searchsorted(t, tt, side="right") - 1, 0, panels - 1)
        s_now = arc[k] + _partial(dfun, t[k], tt)
        d = dfun(tt)
        step = (s_now - target) / np.hypot(d[0], d[1])
        tt = tt - step
        if np.max(np.abs(step)) < 1e-15 * max(1.0, abs(t1 - t0)):
            break
    x, y = fun(tt)
    pts = np.column_stack([x, y])
    if closed:
        pts[-1] = pts[0]
    return PlanarCurve(pts, closed=closed)


def _partial(dfun, a, b):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    d = dfun(nodes.ravel())
    sp = np.hypot(d[0], d[1]).reshape(nodes.shape)
    return half * (sp @ _GL_W)


def circle(n: int, R: float = 1.0) -> PlanarCurve:
    """Counterclockwise circle starting at ``(R, 0)``."""
    t = np.linspace(0.0, 2.0 * np.pi, n)
    pts = R * np.column_stack([np.cos(t), np.sin(t)])
    pts[-1] = pts[0]
    return PlanarCurve(pts, closed=True)


def ellipse(n: int, a: float = 2.0, b: float = 1.0) -> PlanarCurve:
    return sample_parametric(lambda t: (a * np.cos(t), b * np.sin(t)),
                             lambda t: (-a * np.sin(t), b * np.cos(t)), 0.0, 2.0 * np.pi, n)


def limacon(n: int, a: float = 2.0, b: float = 1.0) -> PlanarCurve:
    """Polar curve ``r = a + b cos t``; convex for ``a >= 2 b``."""
    def fun(t):
        r = a + b * np.cos(t)
        return r * np.cos(t), r * np.sin(t)

    def dfun(t):
        r, dr = a + b * np.cos(t), -b * np.sin(t)
        return dr * np.cos(t) - r * np.sin(t), dr * np.sin(t) + r * np.cos(t)

    return sample_parametric(fun, dfun, 0.0, 2.0 * np.pi, n)


def figure_eight(n: int) -> PlanarCurve:
    """Lemniscate of Gerono ``(sin t, sin t cos t)``; turning number zero."""
    return sample_parametric(lambda t: (np.sin(t), np.sin(t) * np.cos(t)),
                             lambda t: (np.cos(t), np.cos(2.0 * t)), 0.0, 2.0 * np.pi, n)


SHAPES = {"circle": circle, "ellipse": ellipse, "limacon": limacon, "figure_eight": figure_eight}


def self_intersections(curve: PlanarCurve, max_points: int | None = None) -> np.ndarray:
    """Transversal crossing points of the polyline between non-adjacent segments.

    Segments are bucketed on a uniform grid with cell size about the median
    segment length, so the cost is close to linear for well-sampled curves.
    Each crossing is reported once.  ``max_points`` subsamples the polyline
    first (uniformly in node index) when given.
    """
    pts = np.asarray(curve.points, float)
    if max_points is not None and len(pts) > max_points:
        idx = np.unique(np.linspace(0, len(pts) - 1, max_points).round().astype(int))
        pts = pts[idx]
    P, Q = pts[:-1], pts[1:]
    m = len(P)
    if m < 3:
        return np.zeros((0, 2))
    seglen = np.hypot(*(Q - P).T)
    cell = max(float(np.median(seglen)), 1e-300) * 2.0
    lo = np.minimum(P, Q)
    hi = np.maximum(P, Q)
    origin = lo.min(axis=0)
    i0 = np.floor((lo - origin) / cell).astype(np.int64)
    i1 = np.floor((hi - origin) / cell).astype(np.int64)
    span = (i1 - i0 + 1)
    reps = span[:, 0] * span[:, 1]
    seg = np.repeat(np.arange(m), reps)
    local = np.arange(reps.sum()) - np.repeat(np.cumsum(reps) - reps, reps)
    gx = i0[seg, 0] + local % span[seg, 0]
    gy = i0[seg, 1] + local // span[seg, 0]
    key = gx * (int(gy.max()) + 2) + gy
    order = np.lexsort((seg, key))
    key, seg = key[order], seg[order]
    same_run = np.r_[True, key[1:] != key[:-1]]
    run_id = np.cumsum(same_run) - 1
    run_len = np.bincount(run_id)
    ia, ib = [], []
    for d in range(1, int(run_len.max())):
        ok = run_id[d:] == run_id[:-d]
        ia.append(seg[:-d][ok])
        ib.append(seg[d:][ok])
    if not ia:
        return np.zeros((0, 2))
    a = np.concatenate(ia)
    b = np.concatenate(ib)
    a, b = np.minimum(a, b), np.maximum(a, b)
    sel = b - a > 1
    if curve.closed:
        sel &= ~((a == 0) & (b == m - 1))
    pairs = np.unique(np.column_stack([a[sel], b[sel]]), axis=0)
    if len(pairs) == 0:
        return np.zeros((0, 2))
    ij = pairs
    p, r = P[ij[:, 0]], Q[ij[:, 0]] - P[ij[:, 0]]
    q, s = P[ij[:, 1]], Q[ij[:, 1]] - P[ij[:, 1]]
    den = r[:, 0] * s[:, 1] - r[:, 1] * s[:, 0]
    qp = q - p
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / den
        u = (qp[:, 0] * r[:, 1] - qp[:, 1] * r[:, 0]) / den
    # closed parameter intervals; a crossing through a node shows up on both
    # adjacent segments and is merged by its pair of curve parameters
    tol = 1e-9
    hit = (den != 0) & (t >= -tol) & (t <= 1 + tol) & (u >= -tol) & (u <= 1 + tol)
    pa = ij[hit, 0] + np.clip(t[hit], 0.0, 1.0)
    pb = ij[hit, 1] + np.clip(u[hit], 0.0, 1.0)
    if curve.closed:
        pa, pb = np.mod(pa, m), np.mod(pb, m)
    key = np.sort(np.column_stack([pa, pb]), axis=1)
    key = np.round(key / 1e-7).astype(np.int64)
    # adjacent segments meeting at their shared node are not a crossing
    near = np.abs(key[:, 1] - key[:, 0]) <= 1
    if curve.closed:
        near |= np.abs(key[:, 1] - key[:, 0] - round(m / 1e-7)) <= 1
    _, first = np.unique(key[~near], axis=0, return_index=True)
    sel = np.flatnonzero(hit)[~near][np.sort(first)]
    return p[sel] + t[sel, None] * r[sel]

def count_self_intersections(curve: PlanarCurve, max_points: int | None = None) -> int:
    return int(len(self_intersections(curve, max_points)))
