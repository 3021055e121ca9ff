"""Independent brute-force verifiers.

Nothing here imports the closed-form prox operators or rate formulas; these
routines are the ground truth those are tested against.
"""

import math
import warnings

import numpy as np

from .errors import BracketError, InvalidArgumentError

__all__ = ["GoldenSectionWarning", "golden_section", "prox_1d_golden",
           "fd_gradient", "worst_ratio_grid"]

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
MAX_GOLDEN_ITERS = 200


class GoldenSectionWarning(RuntimeWarning):
    """Golden-section search hit its iteration cap before reaching tol."""


def golden_section(fun, a, b, tol=1e-10, max_iters=MAX_GOLDEN_ITERS):
    """Minimize a unimodal scalar function on ``[a, b]``.

    Returns the best point seen, endpoints included.
    """
    if not a <= b:
        raise BracketError(f"empty bracket [{a}, {b}]")
    fa, fb = fun(a), fun(b)
    mid = 0.5 * (a + b)
    fm = fun(mid)
    if fa < fm and fb < fm:
        raise BracketError("both bracket endpoints lie below the midpoint; "
                           "objective is not unimodal on this bracket")
    best_x, best_f = min(((a, fa), (b, fb), (mid, fm)), key=lambda p: p[1])
    lo, hi = a, b
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    it = 0
    while hi - lo > tol and it < max_iters:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = fun(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = fun(x2)
        it += 1
    if hi - lo > tol:
        warnings.warn(f"golden section stopped after {it} iterations with "
                      f"bracket width {hi - lo:g} > tol {tol:g}", GoldenSectionWarning)
    c = 0.5 * (lo + hi)
    for x, fx in ((x1, f1), (x2, f2), (c, fun(c))):
        if fx < best_f:
            best_x, best_f = x, fx
    return best_x


def prox_1d_golden(g_1d, t, x, bracket=None, tol=1e-10, domain=None):
    """Minimize ``t * g_1d(u) + 0.5 * (u - x)^2`` over u by golden section.

    ``domain`` restricts the search to an interval (for indicator functions,
    pass the set here and ``g_1d = lambda u: 0``).  The default bracket is
    ``[x - 10 (1 + t), x + 10 (1 + t)]``.
    """
    if not t > 0:
        raise InvalidArgumentError(f"t must be positive, got {t}")
    if not tol > 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol}")
    x = float(x)
    a, b = bracket if bracket is not None else (x - 10.0 * (1 + t), x + 10.0 * (1 + t))
    if domain is not None:
        a, b = max(a, domain[0]), min(b, domain[1])
        if a > b:
            # the minimizer sits on the domain boundary nearest to the bracket
            return float(domain[0] if b < domain[0] else domain[1])

    def obj(u):
        return t * g_1d(u) + 0.5 * (u - x) ** 2

    return float(golden_section(obj, a, b, tol=tol))


def fd_gradient(f, x, h=1e-6):
    """Central-difference gradient of ``f.eval`` (or of a plain callable)."""
    if not h > 0:
        raise InvalidArgumentError(f"h must be positive, got {h}")
    fun = f.eval if hasattr(f, "eval") else f
    x = np.array(x, dtype=float)
    out = np.empty_like(x)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        out[i] = (fun(xp) - fun(xm)) / (2.0 * h)
    return out


def worst_ratio_grid(mu, L, t, grid_points=101):
    """Worst one-step PG-norm contraction over 1D quadratics with curvature in [mu, L].

    For ``f = c x^2 / 2`` and g = 0 the step multiplies the gradient by
    ``1 - c t``, so this is ``max |1 - c t|`` over a uniform grid on
    ``[mu, L]`` with both endpoints included.
    """
    if grid_points < 2:
        raise InvalidArgumentError(f"need at least 2 grid points, got {grid_points}")
    c = np.linspace(mu, L, grid_points)
    c[0], c[-1] = mu, L
    return float(max(abs(1.0 - ci * t) for ci in c))
