"""Constant-step proximal gradient iteration and trace recording."""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import InvalidArgumentError, InvalidSpecError, NumericError, StartPointError
from .functions import SmoothOracle
from .prox import NonsmoothOracle, ZeroFunction, subdiff_distance

__all__ = [
    "CompositeProblem",
    "IterateRecord",
    "Trace",
    "prox_grad_map",
    "run_pg",
    "phi_value",
    "trace_to_csv",
    "TRACE_COLUMNS",
]

TRACE_COLUMNS = ("k", "phi", "prox_grad_norm", "residual_grad_norm",
                 "subdiff_dist", "ratio_to_prev")

# ratios with a smaller denominator are reported as undefined
RATIO_FLOOR = 1e-14


@dataclass(frozen=True)
class CompositeProblem:
    """``phi = f + g`` with optional known optimal value and PL constant."""

    smooth: SmoothOracle
    nonsmooth: NonsmoothOracle
    known_min: Optional[float] = None
    pl_constant: Optional[float] = None
    name: str = "problem"

    def __post_init__(self):
        if self.pl_constant is not None and not self.pl_constant > 0:
            raise InvalidSpecError(f"PL constant must be positive, got {self.pl_constant}")

    @property
    def dim(self) -> int:
        return self.smooth.dim

    @property
    def eta(self) -> Optional[float]:
        """PL constant: user-supplied, else the closed form from f if any."""
        if self.pl_constant is not None:
            return self.pl_constant
        if isinstance(self.nonsmooth, ZeroFunction):
            return self.smooth.eta_pl
        return None


@dataclass
class IterateRecord:
    k: int
    x: np.ndarray
    phi: float
    prox_grad: np.ndarray
    prox_grad_norm: float
    s_plus: np.ndarray
    residual_grad_norm: float
    subdiff_dist: Optional[float] = None


@dataclass
class Trace:
    step: float
    records: List[IterateRecord] = field(default_factory=list)
    stop_reason: str = "max_iters"
    problem_name: str = ""

    def __len__(self):
        return len(self.records)


def phi_value(problem: CompositeProblem, x) -> float:
    """``f(x) + g(x)``; ``+inf`` outside dom g."""
    gx = problem.nonsmooth.eval(x)
    if not np.isfinite(gx):
        return np.inf
    return problem.smooth.eval(x) + gx


def prox_grad_map(problem: CompositeProblem, x, t: float):
    """One PG step from x.

    Returns
    -------
    g_t : ndarray
        Proximal gradient ``(x - x_plus) / t``.
    x_plus : ndarray
        ``prox_{tg}(x - t grad f(x))``.
    s_plus : ndarray
        The subgradient of g at ``x_plus`` selected by the prox step,
        ``g_t - grad f(x)``.
    """
    if not t > 0:
        raise InvalidArgumentError(f"step must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    grad = np.asarray(problem.smooth.grad(x), dtype=float)
    bad = np.flatnonzero(~np.isfinite(grad))
    if bad.size:
        raise NumericError(f"non-finite gradient at coordinate {bad[0]}: {grad[bad[0]]}")
    x_plus = problem.nonsmooth.prox(x - t * grad, t)
    g_t = (x - x_plus) / t
    return g_t, x_plus, g_t - grad


def _record(problem, k, x, t):
    g_t, x_plus, s_plus = prox_grad_map(problem, x, t)
    residual = np.linalg.norm(problem.smooth.grad(x_plus) + s_plus)
    dist = None
    if problem.nonsmooth.separable:
        dist = subdiff_distance(problem, x).value
    rec = IterateRecord(k=k, x=x, phi=phi_value(problem, x), prox_grad=g_t,
                        prox_grad_norm=float(np.linalg.norm(g_t)), s_plus=s_plus,
                        residual_grad_norm=float(residual), subdiff_dist=dist)
    return rec, x_plus


def run_pg(problem: CompositeProblem, x0, t: float, max_iters: int = 1000,
           tol: float = 1e-10) -> Trace:
    """Run the proximal gradient method with constant step ``t``.

    Stops once ``||G_t(x_k)|| <= tol * max(1, ||G_t(x_0)||)``, after
    ``max_iters`` steps, or when an iterate repeats exactly (a negative
    ``tol`` disables the tolerance test).  Every record
    holds the quantities at ``x_k`` together with ``s_plus`` and the residual
    ``||grad f(x_{k+1}) + s_plus||`` of the step leaving it.

    If ``x0`` is outside dom g it is first mapped into the domain by
    ``prox_{tg}`` and the projected point becomes iterate 0.
    """
    if not t > 0:
        raise InvalidArgumentError(f"step must be positive, got {t}")
    if max_iters < 0:
        raise InvalidArgumentError(f"max_iters must be nonnegative, got {max_iters}")
    if t > 2.0 / problem.smooth.lip:
        warnings.warn(f"step {t:g} exceeds 2/L = {2.0 / problem.smooth.lip:g}; "
                      "the proximal gradient norm need not decrease",
                      RuntimeWarning, stacklevel=2)
    x = np.array(x0, dtype=float).ravel()
    if x.size != problem.dim:
        raise InvalidSpecError(f"x0 has {x.size} entries, problem has dimension {problem.dim}")
    if not np.isfinite(problem.nonsmooth.eval(x)):
        x = problem.nonsmooth.prox(x, t)
    if not np.isfinite(phi_value(problem, x)):
        raise StartPointError("objective is not finite at the starting point")

    trace = Trace(step=float(t), problem_name=problem.name)
    rec, x_next = _record(problem, 0, x, t)
    trace.records.append(rec)
    threshold = tol * max(1.0, rec.prox_grad_norm)
    for k in range(1, max_iters + 1):
        if rec.prox_grad_norm <= threshold:
            trace.stop_reason = "tolerance_met"
            return trace
        if np.array_equal(x_next, rec.x):
            trace.stop_reason = "stalled"
            return trace
        rec, x_next = _record(problem, k, x_next, t)
        trace.records.append(rec)
    trace.stop_reason = "tolerance_met" if rec.prox_grad_norm <= threshold else "max_iters"
    return trace


def _fmt(v) -> str:
    if v is None:
        return ""
    return format(float(v), ".17g")


def trace_to_csv(trace: Trace) -> str:
    """Serialize a trace with 17 significant digits per value."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    prev = None
    for rec in trace.records:
        ratio = None
        if prev is not None and prev.prox_grad_norm >= RATIO_FLOOR:
            ratio = rec.prox_grad_norm / prev.prox_grad_norm
        w.writerow([rec.k, _fmt(rec.phi), _fmt(rec.prox_grad_norm),
                    _fmt(rec.residual_grad_norm), _fmt(rec.subdiff_dist), _fmt(ratio)])
        prev = rec
    return buf.getvalue()
