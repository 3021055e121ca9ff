"""Closed-form rates and inequality slacks for the proximal gradient method.

Every ``*_slack`` function returns ``LHS - RHS`` oriented so that a
nonnegative value means the inequality holds.  Comparisons against zero
use the relative tolerance ``SLACK_RTOL * scale(terms)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import (DegenerateInterpolationError, IncompleteRecordError,
                     InvalidArgumentError, InvalidConstantsError, SingularCoefficientError)

__all__ = [
    "SLACK_RTOL",
    "scale",
    "rho",
    "RateBound",
    "rate_bound",
    "refined_descent_slack",
    "classic_descent_slack",
    "pl_rate",
    "pl_gap_bound",
    "InterpolationSlacks",
    "interpolation_slacks",
    "interpolation_limit_residual",
    "ChainSlacks",
    "theorem1_chain_slacks",
]

SLACK_RTOL = 1e-10


def scale(*terms) -> float:
    """``max(1, |term|...)``, ignoring None and infinities."""
    vals = [abs(float(v)) for v in terms if v is not None and math.isfinite(v)]
    return max([1.0] + vals)


def _check_constants(t, mu, L):
    if not t > 0:
        raise InvalidArgumentError(f"step must be positive, got {t}")
    if mu < 0 or not L > 0:
        raise InvalidConstantsError(f"need mu >= 0 and L > 0, got mu={mu}, L={L}")
    if mu > L:
        raise InvalidConstantsError(f"mu={mu} exceeds L={L}")


def rho(t: float, mu: float, L: float) -> float:
    """Per-step contraction factor ``max(|1 - L t|, |1 - mu t|)`` of the PG norm."""
    _check_constants(t, mu, L)
    return max(abs(1.0 - L * t), abs(1.0 - mu * t))


@dataclass(frozen=True)
class RateBound:
    rho: float
    descent_coeff_now: float
    descent_coeff_next: float
    pl_rate_new: Optional[float] = None
    pl_rate_baseline: Optional[float] = None


def rate_bound(t: float, mu: float, L: float, eta: Optional[float] = None) -> RateBound:
    """Collect every theoretical constant for step ``t``.

    ``descent_coeff_next`` is ``inf`` when ``mu * t >= 1``.  The PL rates are
    filled only when ``eta`` is given and ``eta * t <= 1``.
    """
    r = rho(t, mu, L)
    nxt = t / (2.0 * (1.0 - mu * t)) if mu * t < 1 else math.inf
    new = base = None
    if eta is not None and eta * t <= 1:
        new, base = pl_rate(eta, t), 1.0 - eta * t
    return RateBound(r, t / 2.0, nxt, new, base)


def refined_descent_slack(phi_x, phi_xp, g_norm, gp_norm, t, mu=0.0) -> float:
    """Slack of ``phi(x) >= phi(x+) + t/2 |G(x)|^2 + t/(2(1 - mu t)) |G(x+)|^2``.

    With ``mu = 0`` this is the merely-convex form; passing gradient norms
    for g = 0 gives the gradient-descent form.
    """
    if not t > 0:
        raise InvalidArgumentError(f"step must be positive, got {t}")
    if mu * t >= 1:
        raise SingularCoefficientError(
            f"mu * t = {mu * t} >= 1; use mu = 0 and check G(x+) = 0 instead")
    return (phi_x - phi_xp - 0.5 * t * g_norm ** 2
            - t / (2.0 * (1.0 - mu * t)) * gp_norm ** 2)


def classic_descent_slack(phi_x, phi_xp, g_norm, t) -> float:
    """Slack of the classic bound ``phi(x) >= phi(x+) + t/2 |G(x)|^2``."""
    return phi_x - phi_xp - 0.5 * t * g_norm ** 2


def pl_rate(eta: float, t: float) -> float:
    """``(1 - eta t) / (1 + eta t)``."""
    return (1.0 - eta * t) / (1.0 + eta * t)


def pl_gap_bound(gap: float, eta: float, t: float):
    """One-step bounds on the optimality gap under a PL inequality.

    Returns ``(new_bound, baseline_bound)`` = ``gap * (1 - eta t)/(1 + eta t)``
    and ``gap * (1 - eta t)``.
    """
    if gap < 0:
        raise InvalidArgumentError(f"gap must be nonnegative, got {gap}")
    if not eta > 0 or not t > 0:
        raise InvalidConstantsError(f"need eta > 0 and t > 0, got eta={eta}, t={t}")
    if eta * t > 1:
        raise InvalidConstantsError(
            f"eta * t = {eta * t} > 1; a PL constant cannot exceed the curvature")
    return gap * pl_rate(eta, t), gap * (1.0 - eta * t)


class InterpolationSlacks(NamedTuple):
    lower_lip: float
    upper_lip: float
    inner_prod: float
    interp: float


def interpolation_slacks(f, x, y) -> InterpolationSlacks:
    """Slacks of the four smooth strongly convex inequalities between x and y.

    (i)   ``|df| - mu |dx|``
    (ii)  ``L |dx| - |df|``
    (iii) ``<df, dx> - mu L/(mu+L) |dx|^2 - 1/(mu+L) |df|^2``
    (iv)  ``f(x) - f(y) - <grad f(y), dx> - |df|^2/(2L) - mu L/(2(L-mu)) |dx - df/L|^2``

    with ``dx = x - y`` and ``df = grad f(x) - grad f(y)``.
    """
    mu, L = f.mu, f.lip
    if mu == L:
        raise DegenerateInterpolationError(
            "mu == L: use interpolation_limit_residual instead of slack (iv)")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gx, gy = f.grad(x), f.grad(y)
    dx, dg = x - y, gx - gy
    ndx, ndg = np.linalg.norm(dx), np.linalg.norm(dg)
    lower = ndg - mu * ndx
    upper = L * ndx - ndg
    inner = np.dot(dg, dx) - mu * L / (mu + L) * ndx ** 2 - ndg ** 2 / (mu + L)
    r = dx - dg / L
    interp = (f.eval(x) - f.eval(y) - np.dot(gy, dx) - ndg ** 2 / (2.0 * L)
              - mu * L / (2.0 * (L - mu)) * np.dot(r, r))
    return InterpolationSlacks(float(lower), float(upper), float(inner), float(interp))


def interpolation_limit_residual(f, x, y) -> float:
    """``|x - y - (grad f(x) - grad f(y)) / L|``, which must vanish when mu == L."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.linalg.norm(x - y - (f.grad(x) - f.grad(y)) / f.lip))


class ChainSlacks(NamedTuple):
    s1: Optional[float]
    s2: float
    s3: Optional[float]


def theorem1_chain_slacks(rec, rec_next, rho_t: float) -> ChainSlacks:
    """Slacks of ``|G(x+)| <= d(x+) <= rho |G(x)| <= rho d(x)`` for one step.

    ``d`` is the distance from 0 to the subdifferential of phi.  Without it
    (nonseparable g) ``s1`` and ``s3`` are None and ``s2`` uses the computable
    upper bound ``|grad f(x+) + s+|`` in place of ``d(x+)``.
    """
    for r in (rec, rec_next):
        if r is None or r.prox_grad_norm is None:
            raise IncompleteRecordError("record is missing prox_grad_norm")
    if rec.residual_grad_norm is None:
        raise IncompleteRecordError("record is missing residual_grad_norm")
    have_dist = rec.subdiff_dist is not None and rec_next.subdiff_dist is not None
    if have_dist:
        s1 = rec_next.subdiff_dist - rec_next.prox_grad_norm
        s2 = rho_t * rec.prox_grad_norm - rec_next.subdiff_dist
        s3 = rho_t * rec.subdiff_dist - rho_t * rec.prox_grad_norm
        return ChainSlacks(s1, s2, s3)
    return ChainSlacks(None, rho_t * rec.prox_grad_norm - rec.residual_grad_norm, None)
