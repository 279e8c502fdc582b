"""Recovery sequences for closed curves of turning number one.

Each singularity at ``s_i`` gets a key block inserted at ``gamma(s_i)``,
rotated to the local tangent ``v``.  The block's chord displaces the rest of
the curve by ``|p - q| v``; a straight segment of that length inserted at a
point ``s_i'`` where the tangent is ``-v`` cancels the displacement, so the
chain closes again.  Finally a homothety restores the length of ``gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .curves import PlanarCurve
from .energies import EnergyReport, closed_excess_energy
from .errors import NotFound, TurningNumberMismatch, WindowsOverlap
from .measures import AtomicIntegerMeasure
from .paths import Path, Straight, spline_path
from .recovery_open import DEFAULT_A, block_pieces, build_key_block, check_parameters

TWO_PI = 2.0 * np.pi


def as_path(gamma) -> Path:
    """Accept a closed :class:`PlanarCurve` (spline model) or a :class:`Path`."""
    if isinstance(gamma, Path):
        return gamma
    if isinstance(gamma, PlanarCurve):
        if not gamma.closed:
            raise TurningNumberMismatch("base curve must be closed")
        return spline_path(gamma)
    raise TypeError("gamma must be a PlanarCurve or a Path")


def turning_number(path: Path) -> float:
    return (path.end_angle() - path.angle0) / TWO_PI


def _require_turning_one(path: Path) -> None:
    w = turning_number(path)
    if abs(w - 1.0) > 1e-6:
        raise TurningNumberMismatch(f"turning number {w:.6f}, expected 1")


def opposite_tangent_candidates(gamma, s1: float, scan: int = 4096) -> list[float]:
    """All ``s2`` with ``theta(s2) = theta(s1) + pi`` on the lifted angle over ``[s1, s1 + length)``.

    For turning number one the lifted angle runs from ``theta(s1)`` to
    ``theta(s1) + 2 pi`` along one period, so at least one crossing exists.
    """
    path = as_path(gamma)
    try:
        _require_turning_one(path)
    except TurningNumberMismatch as exc:
        raise NotFound(str(exc)) from exc
    ell = path.length
    s1 = float(np.mod(s1, ell))
    target = float(path.angle_at(s1)) + np.pi
    ts = s1 + np.linspace(0.0, ell, scan + 1)
    f = path.angle_at(ts) - target
    roots = []
    for i in np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) <= 0):
        if f[i] == 0.0:
            roots.append(ts[i])
            continue
        if f[i + 1] == 0.0:
            continue
        r = brentq(lambda t: float(path.angle_at(t)) - target, ts[i], ts[i + 1], xtol=1e-14, maxiter=200)
        roots.append(r)
    if not roots:
        raise NotFound("no opposite tangent found")
    return sorted(float(np.mod(r, ell)) for r in roots)


def find_opposite_tangent(gamma, s1: float) -> float:
    """A parameter ``s2`` with ``t(s2) = -t(s1)`` (the first one after ``s1``).

    Raises:
        NotFound: if the turning number is not one.
    """
    path = as_path(gamma)
    cands = opposite_tangent_candidates(path, s1)
    ell = path.length
    return min(cands, key=lambda r: np.mod(r - s1, ell))


def tangent_residual(gamma, s1: float, s2: float) -> float:
    """``|t(s2) + t(s1)|`` from the path's tangent angles."""
    path = as_path(gamma)
    a1, a2 = path.angle_at(np.array([s1, s2]))
    return float(abs(np.exp(1j * a1) + np.exp(1j * a2)))


@dataclass(frozen=True)
class Insertion:
    kind: str  # "block" or "segment"
    s: float  # insertion point on gamma
    length: float  # inserted length (before the homothety)
    signs: tuple  # block signs (empty for segments)

    def window(self) -> tuple[float, float]:
        return (self.s - 0.5 * self.length, self.s + 0.5 * self.length)


@dataclass(frozen=True)
class InsertionReport:
    lam: float
    insertions: tuple
    windows: tuple
    junction_gaps: tuple
    closure_gap: float
    length: float
    block_centers: tuple
    shift: float


@dataclass(frozen=True, eq=False)
class ClosedRecovery:
    path: Path
    base: Path
    report: InsertionReport
    epsilon: float
    a: float

    def sample(self, n: int):
        """``(curve_eps, reference)`` on a shared uniform grid of ``n`` nodes.

        The recovery is sampled from the parameter origin ``report.shift``.
        """
        ce, _, _, _ = self.path.sample(n, closed=True, shift=self.report.shift)
        ref, _, _, _ = self.base.sample(n, closed=True)
        return ce, ref

    def energy(self, n: int) -> EnergyReport:
        ce, ref = self.sample(n)
        return closed_excess_energy(ce, ref, self.epsilon)


def default_samples(ell: float, epsilon: float, M: int) -> int:
    """Uniform node count resolving the transition width ``sqrt(2 eps)`` by about 100 cells."""
    if M == 0:
        return 4097
    h = np.sqrt(2.0 * epsilon) / 100.0
    return int(min(max(8193, np.ceil(ell / h)), 2**18)) + 1


def _circ_dist(a: float, b: float, ell: float) -> float:
    d = abs(a - b) % ell
    return min(d, ell - d)


def _overlap(w1, w2, ell) -> bool:
    c1, c2 = 0.5 * (w1[0] + w1[1]), 0.5 * (w2[0] + w2[1])
    return _circ_dist(c1, c2, ell) < 0.5 * ((w1[1] - w1[0]) + (w2[1] - w2[0]))


def _excess_for_shift(path: Path, base: Path, n: int, shift: float) -> float:
    s = np.linspace(0.0, path.length, n)
    th_e = path.angle_at(s + shift)
    th_r = base.angle_at(s)
    phi = th_e - th_r
    phi -= TWO_PI * np.round((phi[0]) / TWO_PI)
    return float(np.trapezoid(2.0 * np.sin(0.5 * phi) ** 2, s))


def build_closed_recovery(gamma, omega: AtomicIntegerMeasure, epsilon: float, a: float = DEFAULT_A,
                          align: str = "tangent") -> ClosedRecovery:
    """Closed recovery of ``gamma`` with singularities ``omega`` (positions in arclength).

    Args:
        gamma: closed base curve of turning number one (Path or PlanarCurve).
        omega: atoms on ``[0, length(gamma)]``.
        epsilon, a: block parameters, ``delta = epsilon**a``.
        align: ``"basepoint"`` keeps the parameter origin at the image of
            ``gamma(0)``; ``"tangent"`` shifts the origin of the recovered
            curve along itself to minimize ``int |t_eps - t|^2`` against
            ``gamma``, a reparametrization that leaves the image unchanged.

    Raises:
        TurningNumberMismatch: if ``gamma`` does not have turning number one.
        WindowsOverlap: if insertion windows cannot be made disjoint.
    """
    check_parameters(epsilon, a)
    base = as_path(gamma)
    if base.scale != 1.0:
        raise ValueError("pass an unscaled base path")
    _require_turning_one(base)
    ell = base.length
    if not np.isclose(omega.D, ell, rtol=1e-9):
        raise ValueError(f"omega lives on [0, {omega.D}], gamma has length {ell}")
    if omega.count == 0:
        rep = InsertionReport(1.0, (), (), (), 0.0, ell, (), 0.0)
        return ClosedRecovery(base, base, rep, epsilon, a)

    blk = build_key_block(epsilon, a, 1, n=257)
    ell_eta, chord = blk.length, blk.chord
    delta = epsilon**a

    insertions = []
    for x, c in zip(omega.positions, omega.multiplicities):
        m = abs(c)
        insertions.append(Insertion("block", float(x), m * ell_eta, tuple([int(np.sign(c))] * m)))
    for ins in list(insertions):
        if _any_overlap(ins, [o for o in insertions if o is not ins], ell):
            raise WindowsOverlap(f"block window at {ins.s:.6g} overlaps another block")
    for blk_ins in [i for i in insertions if i.kind == "block"]:
        seg_len = len(blk_ins.signs) * chord
        cands = opposite_tangent_candidates(base, blk_ins.s)
        best, best_d = None, -np.inf
        for s2 in cands:
            trial = Insertion("segment", s2, seg_len, ())
            if _any_overlap(trial, insertions, ell):
                continue
            dmin = min(_circ_dist(s2, o.s, ell) for o in insertions)
            if dmin > best_d:
                best, best_d = trial, dmin
        if best is None:
            raise WindowsOverlap(f"no opposite-tangent point for s = {blk_ins.s:.6g} clears the other windows")
        insertions.append(best)

    insertions.sort(key=lambda i: (i.s, 0 if i.kind == "block" else 1))
    pieces = []
    cursor = 0.0
    centers = []
    offset = 0.0
    for ins in insertions:
        pieces.extend(base.subpieces(cursor, ins.s))
        offset += ins.s - cursor
        cursor = ins.s
        if ins.kind == "block":
            for sg in ins.signs:
                centers.append(offset + 0.5 * ell_eta)
                pieces.extend(block_pieces(epsilon, delta, sg))
                offset += ell_eta
        else:
            pieces.append(Straight(ins.length))
            offset += ins.length
    pieces.extend(base.subpieces(cursor, ell))
    tilde = Path(pieces, start=tuple(base.start_point()), angle0=base.angle0)
    lam = ell / tilde.length
    path = tilde.scaled(lam)

    closure = float(np.hypot(*(path.end_point() - path.start_point())))
    gaps = _junction_gaps(path)
    shift = 0.0
    if align == "tangent":
        shift = _best_shift(path, base, ell_eta * lam * omega.count + chord * omega.count)
    elif align != "basepoint":
        raise ValueError(f"unknown align {align!r}")
    centers_eps = tuple(float(np.mod(lam * c - shift, ell)) for c in centers)
    windows = tuple(i.window() for i in insertions)
    rep = InsertionReport(float(lam), tuple(insertions), windows, tuple(gaps), closure, path.length,
                          centers_eps, float(shift))
    return ClosedRecovery(path, base, rep, float(epsilon), float(a))


def _junction_gaps(path: Path) -> tuple:
    """Position and angle jumps between the one-sided limits at every piece junction."""
    out = []
    offs = path.piece_offsets
    for k in range(1, len(path.pieces)):
        s = offs[k]
        h = 1e-12 * path.length
        p, th, _ = path.evaluate(np.array([s - h, s + h]))
        out.append(float(max(np.hypot(*(p[1] - p[0])), abs(th[1] - th[0]))))
    return tuple(out)


def _any_overlap(ins: Insertion, others, ell: float) -> bool:
    return any(_overlap(ins.window(), o.window(), ell) for o in others)


def _best_shift(path: Path, base: Path, span: float, n: int = 2**13 + 1) -> float:
    """Origin shift in ``[-span, span]`` minimizing the tangent excess (coarse grid, then Brent)."""
    if span <= 0:
        return 0.0
    # the excess is evaluated on a grid fine enough for the blocks
    n = max(n, int(8 * path.length / max(span, 1e-12)) + 1)
    n = min(n, 2**16 + 1)
    trial = np.linspace(-span, span, 41)
    vals = [_excess_for_shift(path, base, n, t) for t in trial]
    k = int(np.argmin(vals))
    lo, hi = trial[max(k - 1, 0)], trial[min(k + 1, len(trial) - 1)]
    res = minimize_scalar(lambda t: _excess_for_shift(path, base, n, t), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-9 * path.length})
    return float(res.x)
