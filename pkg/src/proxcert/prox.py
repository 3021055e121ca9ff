"""Separable nonsmooth convex terms with closed-form proximal operators.

Each oracle also exposes its subdifferential coordinate-wise as a closed
interval ``[lo, hi]`` (endpoints may be infinite).  For separable g that is
enough to compute ``d(0, grad f(x) + dg(x))`` exactly by clamping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DomainError, InvalidArgumentError, InvalidSpecError, UnsupportedStructureError

__all__ = [
    "prox_l1",
    "prox_box",
    "prox_elastic_net",
    "NonsmoothOracle",
    "L1Norm",
    "BoxIndicator",
    "ElasticNet",
    "ZeroFunction",
    "zero_oracle",
    "SubdiffDistance",
    "subdiff_distance",
    "subgradient_violation",
]


def prox_l1(x, tau):
    """Soft-thresholding: ``sign(x) * max(|x| - tau, 0)``, coordinate-wise."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise InvalidArgumentError(f"tau must be nonnegative, got {tau}")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def prox_box(x, lo, hi):
    """Euclidean projection onto the box ``[lo, hi]``."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(lo > hi):
        raise InvalidSpecError("box has lo > hi in some coordinate")
    return np.clip(np.asarray(x, dtype=float), lo, hi)


def prox_elastic_net(x, tau1, tau2):
    """Prox of ``tau1 * |u| + (tau2 / 2) * u^2``: soft-threshold, then shrink."""
    tau1 = np.asarray(tau1, dtype=float)
    tau2 = np.asarray(tau2, dtype=float)
    if np.any(tau1 < 0) or np.any(tau2 < 0):
        raise InvalidArgumentError(
            f"elastic-net parameters must be nonnegative, got {tau1}, {tau2}")
    return prox_l1(x, tau1) / (1.0 + tau2)


def _at(param, i):
    param = np.asarray(param)
    return float(param) if param.ndim == 0 else float(param[i])


class NonsmoothOracle:
    """A closed proper convex g with a cheap prox and interval subdifferentials.

    Subclasses implement ``prox``, ``eval`` and ``subdiff_bounds``.  The
    vectorized ``subdiff_bounds(x)`` returns arrays ``(lo, hi)``; entries are
    NaN where ``x_i`` lies outside the domain.
    """

    kind = "abstract"
    separable = True

    def prox(self, x, step):
        """Return ``argmin_u step * g(u) + 0.5 * ||u - x||^2``."""
        raise NotImplementedError

    def eval(self, x) -> float:
        raise NotImplementedError

    def subdiff_bounds(self, x) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def subdiff_interval(self, i: int, v: float) -> Optional[Tuple[float, float]]:
        """Interval ``dg_i(v)`` for coordinate ``i``, or None if it is empty."""
        lo, hi = self._scalar_bounds(i, float(v))
        if np.isnan(lo):
            return None
        return lo, hi

    def _scalar_bounds(self, i, v):
        raise NotImplementedError

    def config(self) -> dict:
        """Parameters in the experiment-config vocabulary."""
        return {"kind": self.kind}


class ZeroFunction(NonsmoothOracle):
    """g identically zero; the PG method reduces to gradient descent."""

    kind = "zero"

    def prox(self, x, step):
        return np.array(x, dtype=float)

    def eval(self, x):
        return 0.0

    def subdiff_bounds(self, x):
        z = np.zeros(np.shape(x))
        return z, z.copy()

    def _scalar_bounds(self, i, v):
        return 0.0, 0.0


def zero_oracle() -> ZeroFunction:
    return ZeroFunction()


@dataclass(frozen=True, eq=False)
class L1Norm(NonsmoothOracle):
    """``g(x) = sum_i w_i |x_i|``; ``weight`` is a scalar or per-coordinate array."""

    weight: object = 1.0
    kind = "l1"

    def __post_init__(self):
        if np.any(np.asarray(self.weight, dtype=float) < 0):
            raise InvalidSpecError("l1 weight must be nonnegative")

    def prox(self, x, step):
        return prox_l1(x, np.asarray(step, dtype=float) * self.weight)

    def eval(self, x):
        return float(np.sum(np.asarray(self.weight) * np.abs(x)))

    def subdiff_bounds(self, x):
        x = np.asarray(x, dtype=float)
        w = np.broadcast_to(np.asarray(self.weight, dtype=float), x.shape)
        s = np.sign(x) * w
        return np.where(x == 0, -w, s), np.where(x == 0, w, s)

    def _scalar_bounds(self, i, v):
        w = _at(self.weight, i)
        if v == 0:
            return -w, w
        return float(np.sign(v)) * w, float(np.sign(v)) * w

    def config(self):
        return {"kind": self.kind, "weight": np.asarray(self.weight).tolist()}


@dataclass(frozen=True, eq=False)
class BoxIndicator(NonsmoothOracle):
    """Indicator of ``{x : lo <= x <= hi}``; its prox is the projection."""

    lo: object = -1.0
    hi: object = 1.0
    kind = "box"

    def __post_init__(self):
        if np.any(np.asarray(self.lo, dtype=float) > np.asarray(self.hi, dtype=float)):
            raise InvalidSpecError("box has lo > hi in some coordinate")

    def prox(self, x, step):
        return prox_box(x, self.lo, self.hi)

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.all((x >= self.lo) & (x <= self.hi))
        return 0.0 if inside else np.inf

    def subdiff_bounds(self, x):
        x = np.asarray(x, dtype=float)
        lo_b = np.broadcast_to(np.asarray(self.lo, dtype=float), x.shape)
        hi_b = np.broadcast_to(np.asarray(self.hi, dtype=float), x.shape)
        # normal cone: {0} inside, (-inf, 0] at lo, [0, inf) at hi
        lo = np.where(x == lo_b, -np.inf, 0.0)
        hi = np.where(x == hi_b, np.inf, 0.0)
        outside = (x < lo_b) | (x > hi_b)
        lo[outside] = np.nan
        hi[outside] = np.nan
        return lo, hi

    def _scalar_bounds(self, i, v):
        a, b = _at(self.lo, i), _at(self.hi, i)
        if v < a or v > b:
            return np.nan, np.nan
        return (-np.inf if v == a else 0.0), (np.inf if v == b else 0.0)

    def config(self):
        return {"kind": self.kind, "lo": np.asarray(self.lo).tolist(),
                "hi": np.asarray(self.hi).tolist()}


@dataclass(frozen=True, eq=False)
class ElasticNet(NonsmoothOracle):
    """``g(x) = tau1 * ||x||_1 + (tau2 / 2) * ||x||^2``."""

    tau1: float = 1.0
    tau2: float = 1.0
    kind = "elastic_net"

    def __post_init__(self):
        if self.tau1 < 0 or self.tau2 < 0:
            raise InvalidSpecError("elastic-net parameters must be nonnegative")

    def prox(self, x, step):
        step = np.asarray(step, dtype=float)
        return prox_elastic_net(x, step * self.tau1, step * self.tau2)

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        return float(self.tau1 * np.sum(np.abs(x)) + 0.5 * self.tau2 * np.dot(x, x))

    def subdiff_bounds(self, x):
        x = np.asarray(x, dtype=float)
        s = self.tau1 * np.sign(x) + self.tau2 * x
        return np.where(x == 0, -self.tau1, s), np.where(x == 0, self.tau1, s)

    def _scalar_bounds(self, i, v):
        if v == 0:
            return -self.tau1, self.tau1
        s = self.tau1 * float(np.sign(v)) + self.tau2 * v
        return s, s

    def config(self):
        return {"kind": self.kind, "tau1": self.tau1, "tau2": self.tau2}


@dataclass(frozen=True)
class SubdiffDistance:
    """``d(0, df(x) + dg(x))`` and the subgradient of g attaining it."""

    value: float
    attaining_subgradient: np.ndarray


def subdiff_distance(problem, x) -> SubdiffDistance:
    """Exact distance from 0 to the subdifferential of ``f + g`` at x.

    Per coordinate, the minimum-norm element is ``grad_i + clamp(-grad_i, [lo_i, hi_i])``.
    """
    g = problem.nonsmooth
    if not g.separable:
        raise UnsupportedStructureError(
            f"subdifferential distance needs a separable g, got {g.kind!r}")
    x = np.asarray(x, dtype=float)
    if not np.isfinite(g.eval(x)):
        raise DomainError("x lies outside dom g")
    grad = problem.smooth.grad(x)
    lo, hi = g.subdiff_bounds(x)
    s = np.clip(-grad, lo, hi)
    return SubdiffDistance(float(np.linalg.norm(grad + s)), s)


def subgradient_violation(g: NonsmoothOracle, u, s) -> float:
    """Largest distance of ``s_i`` from the interval ``dg_i(u_i)``.

    Zero means ``s`` is a subgradient of g at u; ``inf`` if u is infeasible.
    """
    lo, hi = g.subdiff_bounds(u)
    s = np.asarray(s, dtype=float)
    if np.any(np.isnan(lo)):
        return np.inf
    gap = np.maximum(lo - s, s - hi)
    return float(max(np.max(gap, initial=0.0), 0.0))
