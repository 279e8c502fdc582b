"""Recovery sequences for a pointed segment.

The building block ("key block") is the borderline elastica restricted to
``[-delta, delta]``, ``delta = eps^a``, prolonged at both ends by circular
arcs of the elastica's end curvature until the tangent is horizontal again.
It turns the tangent by a full ``2 pi`` and costs ``I + II + III`` with
``II = SIGMA tanh(delta / sqrt(2 eps))`` and ``I, III -> 0``.

Open recoveries replace pieces of the segment ``[0, L] x {0}`` by copies of
the block, one per unit of ``sum |c_j|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import elastica as el
from .curves import PlanarCurve, to_constant_speed
from .energies import SIGMA, EnergyReport, open_excess_energy
from .errors import BlocksDoNotFit, ParameterOutOfRange
from .measures import AtomicIntegerMeasure
from .paths import Arc, ElasticaPiece, Path, Straight

DEFAULT_A = 0.375


def check_parameters(epsilon: float, a: float) -> None:
    if not (0.0 < epsilon <= 1.0):
        raise ParameterOutOfRange(f"epsilon must lie in (0, 1], got {epsilon}")
    if not (0.25 < a < 0.5):
        raise ParameterOutOfRange(f"a must lie in (1/4, 1/2), got {a}")


def connector_radius(epsilon: float, delta: float) -> float:
    """``1 / kappa(-delta) = (sqrt(2 eps) / 4) (1 + e^{-2x}) / e^{-x}``, ``x = delta / sqrt(2 eps)``."""
    w = np.sqrt(2.0 * epsilon)
    x = delta / w
    return float(0.25 * w * (1.0 + np.exp(-2.0 * x)) / np.exp(-x))


def block_pieces(epsilon: float, delta: float, sign: int = 1) -> list:
    r = connector_radius(epsilon, delta)
    arc_angle = float(el.theta(epsilon, -delta))
    k = sign / r
    return [Arc(r * arc_angle, k), ElasticaPiece(epsilon, -delta, delta, sign), Arc(r * arc_angle, k)]


@dataclass(frozen=True, eq=False)
class KeyBlock:
    """Arc + borderline elastica on ``[-delta, delta]`` + arc, tangent horizontal at both ends."""

    epsilon: float
    a: float
    delta: float
    sign: int
    r: float
    arc_angle: float
    arc_length: float
    length: float
    chord: float
    p: np.ndarray
    q: np.ndarray
    samples: PlanarCurve
    energy_terms: tuple
    path: Path = field(repr=False)

    @property
    def winding(self) -> float:
        """Tangent turn across the block divided by 2 pi."""
        return (self.path.end_angle() - self.path.angle0) / (2 * np.pi)


def key_block_terms(epsilon: float, delta: float) -> tuple[float, float, float]:
    """Closed-form ``(I, II, III)``.

    ``I`` is the arcs' length excess, ``II`` the elastica's total, ``III``
    the arcs' bending term.  The chord of each arc is ``r sin(arc_angle)``
    with ``arc_angle = theta(-delta)`` in ``(0, pi)``.
    """
    w = np.sqrt(2.0 * epsilon)
    r = connector_radius(epsilon, delta)
    th = float(el.theta(epsilon, -delta))
    se = np.sqrt(epsilon)
    arc_len = r * th
    I = (2.0 * arc_len - 2.0 * r * np.sin(th)) / se
    II = SIGMA * np.tanh(delta / w)
    III = 2.0 * se * th / r
    return float(I), float(II), float(III)


def build_key_block(epsilon: float, a: float = DEFAULT_A, sign: int = 1, n: int = 2**14 + 1) -> KeyBlock:
    """Key block at ``epsilon`` with ``delta = epsilon**a``; ``sign=-1`` mirrors it.

    Raises:
        ParameterOutOfRange: for ``epsilon`` outside ``(0, 1]`` or ``a`` outside ``(1/4, 1/2)``.
    """
    check_parameters(epsilon, a)
    if sign not in (1, -1):
        raise ParameterOutOfRange("sign must be +1 or -1")
    delta = epsilon**a
    w = np.sqrt(2.0 * epsilon)
    r = connector_radius(epsilon, delta)
    arc_angle = float(el.theta(epsilon, -delta))
    path = Path(block_pieces(epsilon, delta, sign))
    curve, _, _, _ = path.sample(n)
    chord = 2.0 * delta - 4.0 * w * np.tanh(delta / w) + 2.0 * r * np.sin(arc_angle)
    return KeyBlock(
        epsilon=float(epsilon), a=float(a), delta=float(delta), sign=int(sign), r=r,
        arc_angle=arc_angle, arc_length=r * arc_angle, length=path.length, chord=float(chord),
        p=path.start_point(), q=path.end_point(), samples=curve,
        energy_terms=key_block_terms(epsilon, delta), path=path,
    )


def key_block_energy(block: KeyBlock) -> tuple[float, float, float, float]:
    """``(I, II, III, G_eps)`` from the closed forms."""
    I, II, III = block.energy_terms
    return I, II, III, I + II + III


def block_report(block: KeyBlock) -> EnergyReport:
    """Direct quadrature of the sampled block, with the closed-form terms attached."""
    rep = open_excess_energy(block.samples, block.p, block.q, block.epsilon)
    return rep.with_block_terms(block.energy_terms)


@dataclass(frozen=True, eq=False)
class OpenRecovery:
    """An open recovery curve with the bookkeeping of its construction.

    ``centers`` are the block centres in the constant-speed parameter on
    ``[0, L]``; ``targets`` the atom position each block belongs to;
    ``signs`` the unit signs; ``windows`` the block parameter windows.
    """

    L: float
    epsilon: float
    a: float
    path: Path
    curve: PlanarCurve
    centers: tuple
    targets: tuple
    signs: tuple
    windows: tuple
    block: KeyBlock | None
    clamp_shift: float

    @property
    def length(self) -> float:
        return self.path.length

    def constant_speed(self) -> PlanarCurve:
        return to_constant_speed(self.curve, self.L)


def default_samples(L: float, epsilon: float, M: int) -> int:
    """Uniform node count resolving the transition width by about 250 cells."""
    if M == 0:
        return 257
    h = np.sqrt(2.0 * epsilon) / 250.0
    return int(min(max(8193, np.ceil((L + M * 0.1) / h)), 400001))


def build_open_recovery(L: float, omega: AtomicIntegerMeasure, epsilon: float, a: float = DEFAULT_A,
                        n: int | None = None) -> OpenRecovery:
    """Segment from ``(0, 0)`` to ``(L, 0)`` with one key block per unit of ``omega``.

    Atoms of multiplicity ``m`` become ``m`` touching blocks of the same sign
    centred on the atom.  Block centres sit exactly at the atoms in the
    constant-speed parameter ``x = s L / length``; flanking straight pieces
    absorb the difference between block length and chord so the endpoints
    are exact.  Atoms too close to the ends are pushed inward just enough to
    fit (the displacement is reported as ``clamp_shift``).

    Raises:
        BlocksDoNotFit: if the windows of neighbouring atoms would overlap.
    """
    check_parameters(epsilon, a)
    if not np.isclose(omega.D, L):
        raise ValueError("omega must live on [0, L]")
    signs, targets = [], []
    groups = []
    for x, c in zip(omega.positions, omega.multiplicities):
        groups.append((x, abs(c), int(np.sign(c))))
    M = sum(g[1] for g in groups)
    if M == 0:
        path = Path([Straight(L)])
        curve, _, _, _ = path.sample(n or 257)
        return OpenRecovery(L, epsilon, a, path, curve, (), (), (), (), None, 0.0)

    block = build_key_block(epsilon, a, 1, n=1025)
    ell_eta, chord = block.length, block.chord
    excess = ell_eta - chord
    ell = L + M * excess
    wpar = ell_eta * L / ell  # block window width in the x parameter
    centers = []
    clamp = 0.0
    for x, m, sg in groups:
        span = m * wpar
        lo, hi = 0.5 * span, L - 0.5 * span
        if lo > hi:
            raise BlocksDoNotFit(f"{m} blocks of parameter width {wpar:.4g} exceed [0, {L}]")
        xc = min(max(x, lo), hi)
        clamp = max(clamp, abs(xc - x))
        for h in range(m):
            centers.append(xc + (h - 0.5 * (m - 1)) * wpar)
            signs.append(sg)
            targets.append(x)
    centers = np.array(centers)
    # horizontal position of each block's chord midpoint
    X = centers * ell / L - (np.arange(M) + 0.5) * excess
    gaps = []
    prev_end = 0.0
    for h in range(M):
        start = X[h] - 0.5 * chord
        gaps.append(start - prev_end)
        prev_end = X[h] + 0.5 * chord
    gaps.append(L - prev_end)
    gaps = np.array(gaps)
    tol = 1e-12 * L
    if np.any(gaps < -tol):
        k = int(np.argmin(gaps))
        raise BlocksDoNotFit(f"block windows overlap by {-gaps[k]:.3e} near piece {k}")
    gaps = np.maximum(gaps, 0.0)
    delta = epsilon**a
    pieces = []
    for h in range(M):
        pieces.append(Straight(float(gaps[h])))
        pieces.extend(block_pieces(epsilon, delta, signs[h]))
    pieces.append(Straight(float(gaps[-1])))
    path = Path(pieces)
    # pin the end exactly at (L, 0): the last straight absorbs rounding
    err = path.end_point() - np.array([L, 0.0])
    if abs(err[0]) > 0:
        pieces[-1] = Straight(max(float(gaps[-1] - err[0]), 0.0))
        path = Path(pieces)
    n = n or default_samples(L, epsilon, M)
    curve, _, _, _ = path.sample(n)
    windows = tuple((c - 0.5 * wpar, c + 0.5 * wpar) for c in centers)
    return OpenRecovery(L, epsilon, a, path, curve, tuple(centers), tuple(targets), tuple(signs),
                        windows, block, float(clamp))


def circle_loop_baseline(L: float, epsilon: float, n: int | None = None) -> OpenRecovery:
    """Segment with one tangent loop of radius ``sqrt(eps)`` at its midpoint.

    The loop adds length ``2 pi sqrt(eps)`` and bending ``2 pi / sqrt(eps)``,
    so both rescaled terms equal ``2 pi`` and ``G_eps = 4 pi``.
    """
    if not (0.0 < epsilon <= (L / 10.0) ** 2):
        raise ParameterOutOfRange("circle loop needs eps <= (L/10)^2")
    rad = np.sqrt(epsilon)
    loop = 2.0 * np.pi * rad
    path = Path([Straight(0.5 * L), Arc(loop, 1.0 / rad), Straight(0.5 * L)])
    ell = L + loop
    if n is None:
        n = int(min(max(4097, np.ceil(ell / (rad / 300.0))), 400001))
    curve, _, _, _ = path.sample(n)
    c = (0.5 * L + 0.5 * loop) * L / ell
    w = loop * L / ell
    return OpenRecovery(L, epsilon, float("nan"), path, curve, (c,), (0.5 * L,), (1,),
                        ((c - 0.5 * w, c + 0.5 * w),), None, 0.0)
