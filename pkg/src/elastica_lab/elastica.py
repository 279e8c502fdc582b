"""Closed-form borderline elastica and Euler-Lagrange residuals.

With ``w = sqrt(2 eps)`` the arclength parametrization is

    alpha_1(s) = s - 2 w tanh(s / w)
    alpha_2(s) = 2 w sech(s / w)
    theta(s)   = 4 arctan(exp(s / w))
    kappa(s)   = (sqrt(2) / sqrt(eps)) sech(s / w)

and the profile satisfies ``1 - cos theta = eps kappa^2`` pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import ARCLENGTH, PlanarCurve, curvature_profile, lift_tangent, nodal_derivative
from .errors import ParameterOutOfRange


def sech(x):
    """Overflow-free hyperbolic secant, ``2 e^{-|x|} / (1 + e^{-2|x|})``."""
    e = np.exp(-np.abs(x))
    return 2.0 * e / (1.0 + e * e)


def _check_eps(epsilon):
    eps = np.asarray(epsilon, dtype=float)
    if np.any(~(eps > 0)) or np.any(eps > 1):
        raise ParameterOutOfRange(f"epsilon must lie in (0, 1], got {epsilon}")
    return eps


def width(epsilon):
    """Transition width ``sqrt(2 eps)``."""
    return np.sqrt(2.0 * np.asarray(epsilon, dtype=float))


def theta(epsilon, s):
    """Tangent angle ``4 arctan(exp(s / sqrt(2 eps)))``, in ``(0, 2 pi)``."""
    x = np.asarray(s, dtype=float) / width(epsilon)
    # arctan(e^x) = pi/2 - arctan(e^-x) keeps the tails accurate
    return np.where(x <= 0, 4.0 * np.arctan(np.exp(np.minimum(x, 0.0))),
                    2.0 * np.pi - 4.0 * np.arctan(np.exp(-np.maximum(x, 0.0))))


def curvature(epsilon, s):
    eps = np.asarray(epsilon, dtype=float)
    return np.sqrt(2.0 / eps) * sech(np.asarray(s, dtype=float) / width(eps))


def position(epsilon, s):
    """``(alpha_1, alpha_2)`` as an array of shape ``s.shape + (2,)``."""
    w = width(epsilon)
    x = np.asarray(s, dtype=float) / w
    return np.stack([np.asarray(s, float) - 2.0 * w * np.tanh(x), 2.0 * w * sech(x)], axis=-1)


def tangent(epsilon, s):
    """Analytic derivative of ``(alpha_1, alpha_2)``."""
    x = np.asarray(s, dtype=float) / width(epsilon)
    sh, th = sech(x), np.tanh(x)
    return np.stack([1.0 - 2.0 * sh * sh, -2.0 * sh * th], axis=-1)


@dataclass(frozen=True)
class BorderlineSample:
    """Closed-form values of the borderline elastica at one arclength."""

    s: float
    point: tuple
    angle: float
    curvature: float
    epsilon: float


def borderline_sample(epsilon: float, s: float) -> BorderlineSample:
    _check_eps(epsilon)
    p = position(epsilon, s)
    return BorderlineSample(
        s=float(s),
        point=(float(p[0]), float(p[1])),
        angle=float(theta(epsilon, s)),
        curvature=float(curvature(epsilon, s)),
        epsilon=float(epsilon),
    )


def equipartition_defect(epsilon, s):
    """``|1 - cos theta - eps kappa^2|`` evaluated from the closed forms.

    ``1 - cos theta`` is computed as ``2 sin^2(theta/2)`` to avoid cancellation.
    """
    th = theta(epsilon, s)
    return np.abs(2.0 * np.sin(0.5 * th) ** 2 - np.asarray(epsilon) * curvature(epsilon, s) ** 2)


def sample_borderline(epsilon: float, s_min: float, s_max: float, n: int) -> PlanarCurve:
    """Borderline elastica sampled at ``n`` uniformly spaced arclengths."""
    _check_eps(epsilon)
    s = np.linspace(s_min, s_max, n)
    return PlanarCurve(position(epsilon, s), closed=False, param=ARCLENGTH)


@dataclass(frozen=True)
class Residual:
    """Nodal residual plus norms taken over ``field[mask]``."""

    field: np.ndarray
    mask: np.ndarray
    max_abs: float
    l2: float


END_TRIM = 4


def el_residual(curve: PlanarCurve, epsilon: float) -> Residual:
    """Residual of ``-kappa + eps (2 kappa_ss + kappa^3)`` on the sampled curve.

    ``kappa_ss`` comes from differencing the curvature twice.  On open curves
    the nested one-sided end stencils are only first order, so the norms
    skip ``END_TRIM`` nodes at each end.

    Args:
        curve: uniformly sampled in arclength.
        epsilon: perturbation parameter.

    Returns:
        The nodal residual field, the mask used for the norms, and the max
        and (trapezoid) L2 norms.
    """
    lifting = lift_tangent(curve)
    kappa = curvature_profile(lifting)
    s = curve.arclength
    k_s = nodal_derivative(kappa, s, curve.closed)
    k_ss = nodal_derivative(k_s, s, curve.closed)
    res = -kappa + epsilon * (2.0 * k_ss + kappa**3)
    mask = np.ones(len(res), dtype=bool)
    if not curve.closed:
        mask[:END_TRIM] = False
        mask[-END_TRIM:] = False
    l2 = float(np.sqrt(np.trapezoid(res[mask] ** 2, s[mask])))
    return Residual(field=res, mask=mask, max_abs=float(np.max(np.abs(res[mask]))), l2=l2)
