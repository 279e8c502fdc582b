"""Penalized descent on the phase-field form of the open energy.

The unknowns are the nodal tangent angles ``theta_1 .. theta_n`` on a uniform
grid over ``[0, D]`` (``theta_0 = 0`` is held fixed) together with the length
``D`` itself.  With ``h = D / n`` and trapezoid weights ``w_i`` the objective
is ::

    E = sqrt(eps) sum (theta_{i+1} - theta_i)^2 / h
        + (h / sqrt(eps)) sum w_i (1 - cos theta_i)
        + lam [ (theta_n mod 2 pi)^2 + (h sum w_i cos theta_i - L)^2 + (h sum w_i sin theta_i)^2 ]

where ``theta_n mod 2 pi`` is the centred remainder in ``[-pi, pi)``.
Descent directions are preconditioned by the tridiagonal Hessian of the
bending term (an H^1 metric), which keeps the step size independent of the
grid; the line search is Armijo backtracking, so every accepted step lowers
the energy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded

from . import elastica as el
from .curves import AngleLifting, PlanarCurve, synthesize_from_angle
from .energies import SIGMA, TWO_PI, mm_lower_bound, phi_transform
from .errors import LineSearchStall

ARMIJO_C = 1e-4
SHRINK = 0.5
DEFAULT_PENALTIES = (1e2, 1e3, 1e4)


@dataclass(frozen=True)
class RelaxOptions:
    max_iter: int = 400
    tol: float = 1e-8
    penalties: tuple = DEFAULT_PENALTIES
    min_step: float = 1e-14
    log_every: int = 1


@dataclass(frozen=True, eq=False)
class RelaxState:
    """Angle field on ``n + 1`` uniform nodes over ``[0, D]``."""

    theta: np.ndarray
    D: float
    penalty: float = DEFAULT_PENALTIES[0]
    step: int = 0
    history: tuple = field(default=())

    @property
    def n(self) -> int:
        return len(self.theta) - 1

    @property
    def h(self) -> float:
        return self.D / self.n

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.D, self.n + 1)


@dataclass(frozen=True)
class EnergyParts:
    bending: float
    potential: float
    end_angle: float
    cos_residual: float
    sin_residual: float
    penalty: float

    @property
    def phase_field(self) -> float:
        return self.bending + self.potential

    @property
    def total(self) -> float:
        return self.phase_field + self.penalty * (self.end_angle**2 + self.cos_residual**2 + self.sin_residual**2)


def _weights(n: int) -> np.ndarray:
    w = np.ones(n + 1)
    w[0] = w[-1] = 0.5
    return w


def _centred_mod(x: float) -> float:
    return float(x - TWO_PI * np.floor(x / TWO_PI + 0.5))


def energy_parts(theta: np.ndarray, D: float, L: float, epsilon: float, lam: float) -> EnergyParts:
    n = len(theta) - 1
    h = D / n
    w = _weights(n)
    se = np.sqrt(epsilon)
    dth = np.diff(theta)
    bend = se * float(np.sum(dth**2)) / h
    pot = h / se * float(np.sum(w * 2.0 * np.sin(0.5 * theta) ** 2))
    return EnergyParts(bend, pot, _centred_mod(theta[-1]), h * float(np.sum(w * np.cos(theta))) - L,
                       h * float(np.sum(w * np.sin(theta))), float(lam))


def energy_and_gradient(theta: np.ndarray, D: float, L: float, epsilon: float, lam: float,
                        weights=(1.0, 1.0, 1.0)):
    """Objective and its gradient with respect to ``(theta_1 .. theta_n, D)``.

    ``weights`` scales the bending, potential and penalty groups, which lets
    tests isolate each group.
    """
    n = len(theta) - 1
    h = D / n
    w = _weights(n)
    se = np.sqrt(epsilon)
    wb, wp, wc = weights
    dth = np.diff(theta)
    one_minus_cos = 2.0 * np.sin(0.5 * theta) ** 2
    S_b = float(np.sum(dth**2))
    S_p = float(np.sum(w * one_minus_cos))
    C = float(np.sum(w * np.cos(theta)))
    S = float(np.sum(w * np.sin(theta)))
    m = _centred_mod(theta[-1])
    rc = h * C - L
    rs = h * S
    E = wb * se * S_b / h + wp * h / se * S_p + wc * lam * (m**2 + rc**2 + rs**2)

    g = np.zeros(n + 1)
    g[:-1] -= 2.0 * wb * se * dth / h
    g[1:] += 2.0 * wb * se * dth / h
    g += wp * h / se * w * np.sin(theta)
    g += wc * lam * (2.0 * rc * h * w * (-np.sin(theta)) + 2.0 * rs * h * w * np.cos(theta))
    g[-1] += wc * lam * 2.0 * m
    dD = (-wb * se * S_b / h**2 + wp * S_p / se + wc * lam * (2.0 * rc * C + 2.0 * rs * S)) / n
    return float(E), np.concatenate([g[1:], [dD]])


def _precondition(grad: np.ndarray, state: RelaxState, epsilon: float, lam: float) -> np.ndarray:
    """Solve ``P x = grad`` with ``P`` the bending Hessian plus a mass shift (Dirichlet at 0, Neumann at D)."""
    n = state.n
    h = state.h
    se = np.sqrt(epsilon)
    k = 2.0 * se / h
    mass = h / se + 2.0 * lam * h * h
    ab = np.zeros((3, n))
    ab[0, 1:] = -k
    ab[1, :] = 2.0 * k + mass
    ab[1, -1] = k + mass + 2.0 * lam
    ab[2, :-1] = -k
    x = solve_banded((1, 1), ab, grad[:-1])
    dD = grad[-1] / (2.0 * lam + 1.0)
    return np.concatenate([x, [dD]])


def _summary(state: RelaxState, parts: EnergyParts, gnorm: float, stage: int) -> dict:
    return {
        "step": state.step,
        "stage": stage,
        "penalty": state.penalty,
        "D": state.D,
        "energy": parts.total,
        "phase_field": parts.phase_field,
        "end_angle": parts.end_angle,
        "cos_residual": parts.cos_residual,
        "sin_residual": parts.sin_residual,
        "grad_norm": gnorm,
    }


def minimize_open(L: float, epsilon: float, init: RelaxState, opts: RelaxOptions | None = None,
                  log=None) -> list[RelaxState]:
    """Run the penalty continuation; returns the accepted states in order.

    Each accepted state carries in ``history`` the summary dicts of its
    stage so far.  ``log`` may be a writable text stream receiving one JSON
    line per accepted iteration.

    Raises:
        LineSearchStall: if backtracking drops below ``opts.min_step``
            without satisfying the Armijo condition.
    """
    opts = opts or RelaxOptions()
    if abs(init.theta[0]) > 0:
        raise ValueError("init must satisfy theta(0) = 0")
    if not init.D > 0:
        raise ValueError("D must be positive")
    traj = [init]
    state = init
    for stage, lam in enumerate(opts.penalties):
        state = replace(state, penalty=float(lam), history=())
        E, g = energy_and_gradient(state.theta, state.D, L, epsilon, lam)
        history = []
        step = 1.0
        for _ in range(opts.max_iter):
            d = _precondition(g, state, epsilon, lam)
            slope = float(g @ d)
            gnorm = float(np.sqrt(max(slope, 0.0)))
            parts = energy_parts(state.theta, state.D, L, epsilon, lam)
            rec = _summary(state, parts, gnorm, stage)
            history.append(rec)
            if log is not None and state.step % opts.log_every == 0:
                log.write(json.dumps(rec) + "\n")
            if gnorm <= opts.tol:
                break
            step = min(1.0, 2.0 * step)
            while True:
                th_new = np.concatenate([[0.0], state.theta[1:] - step * d[:-1]])
                D_new = state.D - step * d[-1]
                if D_new > 0:
                    E_new, g_new = energy_and_gradient(th_new, D_new, L, epsilon, lam)
                    if E_new <= E - ARMIJO_C * step * slope:
                        break
                step *= SHRINK
                if step < opts.min_step:
                    raise LineSearchStall(f"Armijo backtracking stalled at step {state.step} (energy {E:.12g})",
                                          state=state)
            state = RelaxState(th_new, float(D_new), float(lam), state.step + 1, tuple(history))
            traj.append(state)
            E, g = E_new, g_new
        state = replace(state, history=tuple(history))
        traj[-1] = state
    return traj


def grad_check(state: RelaxState, epsilon: float, L: float = 1.0, rel_step: float = 1e-6,
               weights=(1.0, 1.0, 1.0)) -> float:
    """Largest central-difference discrepancy relative to the gradient's max norm.

    The denominator is floored at one so that an exactly vanishing gradient
    (for instance at the straight segment) is compared in absolute terms.
    """
    lam = state.penalty
    x0 = np.concatenate([state.theta[1:], [state.D]])
    _, g = energy_and_gradient(state.theta, state.D, L, epsilon, lam, weights)
    scale = max(1.0, float(np.max(np.abs(x0))))
    hstep = rel_step * scale
    fd = np.empty_like(g)
    for i in range(len(x0)):
        xp, xm = x0.copy(), x0.copy()
        xp[i] += hstep
        xm[i] -= hstep
        ep, _ = energy_and_gradient(np.concatenate([[0.0], xp[:-1]]), xp[-1], L, epsilon, lam, weights)
        em, _ = energy_and_gradient(np.concatenate([[0.0], xm[:-1]]), xm[-1], L, epsilon, lam, weights)
        fd[i] = (ep - em) / (2.0 * hstep)
    denom = max(float(np.max(np.abs(g))), 1.0)
    return float(np.max(np.abs(fd - g)) / denom)


def is_monotone(history) -> bool:
    """``True`` if the logged energies never increase."""
    e = [r["energy"] for r in history]
    return all(b <= a for a, b in zip(e, e[1:]))


def segment_state(L: float, n: int, lam: float = DEFAULT_PENALTIES[0]) -> RelaxState:
    return RelaxState(np.zeros(n + 1), float(L), float(lam))


def bump_state(L: float, epsilon: float, n: int, loops: int = 1, lam: float = DEFAULT_PENALTIES[0]) -> RelaxState:
    """Initial field with ``loops`` smooth 2 pi rises of width ``sqrt(eps)`` spread over ``[0, L]``.

    The rises use a cosine ramp, not the elastica profile, so that the
    relaxation has something to do.
    """
    s = np.linspace(0.0, L, n + 1)
    width = np.sqrt(epsilon)
    theta = np.zeros_like(s)
    for j in range(loops):
        c = L * (j + 1) / (loops + 1)
        u = np.clip((s - c) / width + 0.5, 0.0, 1.0)
        theta += TWO_PI * 0.5 * (1.0 - np.cos(np.pi * u))
    theta[0] = 0.0
    return RelaxState(theta, float(L), float(lam))


def state_curve(state: RelaxState) -> PlanarCurve:
    """Curve synthesized from the angle field by the trapezoid rule, starting at the origin."""
    lift = AngleLifting(state.grid, state.theta)
    return synthesize_from_angle(lift)


def state_energy(state: RelaxState, L: float, epsilon: float) -> tuple[float, float]:
    """``(phase-field energy, discrete total variation of Phi)`` of a state."""
    parts = energy_parts(state.theta, state.D, L, epsilon, state.penalty)
    lb = mm_lower_bound(AngleLifting(state.grid, state.theta))
    return parts.phase_field, lb


def profile_distance(state: RelaxState, epsilon: float, half_width: float = 5.0) -> float:
    """RMS distance between ``theta / 2 pi`` and the borderline elastica profile.

    The elastica is centred where ``theta`` crosses ``pi``; the comparison
    runs over ``|s - s_c| <= half_width * sqrt(2 eps)``.
    """
    s = state.grid
    th = state.theta
    k = int(np.argmax(th >= np.pi))
    if k == 0 or th[k] < np.pi:
        return float("inf")
    sc = s[k - 1] + (np.pi - th[k - 1]) * (s[k] - s[k - 1]) / (th[k] - th[k - 1])
    w = np.sqrt(2.0 * epsilon)
    sel = np.abs(s - sc) <= half_width * w
    ref = el.theta(epsilon, s[sel] - sc)
    return float(np.sqrt(np.mean(((th[sel] - ref) / TWO_PI) ** 2)))


def dump_trajectory(traj, path) -> None:
    """JSON lines, one summary per accepted state."""
    with open(path, "w") as fh:
        for st in traj:
            rec = st.history[-1] if st.history else {"step": st.step, "D": st.D, "penalty": st.penalty}
            fh.write(json.dumps(rec) + "\n")


__all__ = [
    "RelaxOptions", "RelaxState", "EnergyParts", "energy_parts", "energy_and_gradient", "minimize_open",
    "grad_check", "is_monotone", "segment_state", "bump_state", "state_curve", "state_energy",
    "profile_distance", "dump_trajectory", "SIGMA", "phi_transform",
]
