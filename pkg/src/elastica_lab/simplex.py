"""Dense bounded-variable primal simplex with Bland's rule.

Solves::

    maximize    c @ x
    subject to  A @ x <= b,   0 <= x <= upper

for ``b >= 0``, so the all-slack basis is feasible and no phase one is
needed.  Optimality is certified by the dual vector read off the final
tableau: the weak-duality bound ``b @ y + sum(upper * max(0, c - A.T @ y))``
must match the primal value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LPNumericalFailure

PIVOT_TOL = 1e-9
COST_TOL = 1e-12
# the tableau is rebuilt from the original data this often, and once more before certifying
REINVERT_EVERY = 100


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    value: float
    dual: np.ndarray
    dual_bound: float
    iterations: int


def _weak_dual_bound(A, b, c, upper, y):
    y = np.maximum(y, 0.0)
    red = c - A.T @ y
    if np.any(np.isinf(upper) & (red > 1e-9)):
        return np.inf
    fin = np.isfinite(upper)
    return float(b @ y + np.sum(upper[fin] * np.maximum(red[fin], 0.0)))


def solve_bounded_lp(c, A, b, upper, max_iter: int = 200000, gap_tol: float = 1e-9) -> LPResult:
    """Maximize ``c @ x`` over ``{A x <= b, 0 <= x <= upper}`` with ``b >= 0``.

    Raises:
        LPNumericalFailure: if ``b`` has negative entries, the iteration cap is
            hit, or the final duality gap exceeds ``gap_tol * scale``.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    upper = np.asarray(upper, dtype=float)
    m, n = A.shape
    if np.any(b < 0):
        raise LPNumericalFailure("solve_bounded_lp needs b >= 0")

    K = n + m
    T = np.hstack([A, np.eye(m)])
    U = np.concatenate([upper, np.full(m, np.inf)])
    cost = np.concatenate([c, np.zeros(m)])
    basis = np.arange(n, n + m)
    is_basic = np.zeros(K, dtype=bool)
    is_basic[basis] = True
    at_upper = np.zeros(K, dtype=bool)
    zB = b.copy()
    d = cost.copy()  # reduced costs; the slack basis has c_B = 0

    T0, b0 = T.copy(), b.copy()

    def reinvert():
        B = T0[:, basis]
        up = at_upper & ~is_basic
        rhs = b0 - T0[:, up] @ U[up]
        T[:] = np.linalg.solve(B, T0)
        zB[:] = np.linalg.solve(B, rhs)
        d[:] = cost - cost[basis] @ T

    it = 0
    while True:
        if it and it % REINVERT_EVERY == 0:
            reinvert()
        eligible = ~is_basic & (((~at_upper) & (d > COST_TOL)) | (at_upper & (d < -COST_TOL)))
        cand = np.flatnonzero(eligible)
        if cand.size == 0:
            if it == 0:
                break
            # confirm optimality on a freshly inverted tableau
            reinvert()
            eligible = ~is_basic & (((~at_upper) & (d > COST_TOL)) | (at_upper & (d < -COST_TOL)))
            cand = np.flatnonzero(eligible)
            if cand.size == 0:
                break
        it += 1
        if it > max_iter:
            raise LPNumericalFailure("simplex iteration cap reached")
        j = int(cand[0])  # Bland: lowest index
        sigma = -1.0 if at_upper[j] else 1.0
        a = sigma * T[:, j]

        t_best = U[j]
        leave = -1  # -1 means bound flip of j
        leave_idx = j
        pos = a > PIVOT_TOL
        neg = a < -PIVOT_TOL
        ratios = np.full(m, np.inf)
        ratios[pos] = zB[pos] / a[pos]
        ubB = U[basis]
        fin_neg = neg & np.isfinite(ubB)
        ratios[fin_neg] = (ubB[fin_neg] - zB[fin_neg]) / (-a[fin_neg])
        ratios = np.maximum(ratios, 0.0)
        if ratios.size:
            rmin = ratios.min()
            if rmin < t_best or (rmin == t_best and np.isfinite(rmin)):
                ties = np.flatnonzero(ratios <= rmin + 1e-14 * max(1.0, rmin))
                # Bland tie-break on variable index, the flip of j competes too
                r = int(ties[np.argmin(basis[ties])])
                if rmin < t_best or basis[r] < leave_idx:
                    t_best, leave, leave_idx = rmin, r, int(basis[r])
        if not np.isfinite(t_best):
            raise LPNumericalFailure("LP is unbounded")

        zB -= t_best * a
        if leave < 0:
            at_upper[j] = not at_upper[j]
            continue

        new_val = (U[j] if at_upper[j] else 0.0) + sigma * t_best
        old = int(basis[leave])
        at_upper[old] = bool(a[leave] < 0)
        is_basic[old] = False
        is_basic[j] = True
        at_upper[j] = False
        basis[leave] = j

        piv = T[leave, j]
        T[leave] /= piv
        col = T[:, j].copy()
        col[leave] = 0.0
        T -= np.outer(col, T[leave])
        T[:, j] = 0.0
        T[leave, j] = 1.0
        d -= d[j] * T[leave]
        zB[leave] = new_val

    x_all = np.where(at_upper, U, 0.0)
    x_all[basis] = zB
    x = x_all[:n]
    value = float(c @ x)
    y = -d[n:]
    bound = _weak_dual_bound(A, b, c, upper, y)
    scale = 1.0 + np.sum(np.abs(c)) + abs(value)
    viol = max(float(np.max(A @ x - b, initial=0.0)), float(np.max(-x, initial=0.0)),
               float(np.max(x - upper, initial=0.0)))
    if viol > 1e-9 * scale or not (bound - value <= gap_tol * scale):
        raise LPNumericalFailure(f"cannot certify optimality: gap {bound - value:.3e}, violation {viol:.3e}")
    return LPResult(x=x, value=value, dual=np.maximum(y, 0.0), dual_bound=bound, iterations=it)
