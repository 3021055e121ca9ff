"""Per-run certification of the PG worst-case inequalities.

``certify_trace`` replays a trace and evaluates, for every consecutive pair
of iterates, the contraction chain of the proximal gradient norm, the
refined descent lemma (three forms), the PL gap contraction and the smooth
strongly convex interpolation inequalities.  Slacks are normalized by
``max(1, largest term)`` so a check passes iff its worst normalized slack is
at least ``-tolerance``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from . import rates
from .errors import ConsistencyError, DegenerateStartError, InvalidArgumentError
from .functions import QuadraticSpec, make_quadratic
from .pg import RATIO_FLOOR, CompositeProblem, Trace, phi_value, run_pg
from .prox import BoxIndicator, ElasticNet, L1Norm, ZeroFunction

__all__ = [
    "CHECK_NAMES",
    "CheckResult",
    "CertificationReport",
    "certify_trace",
    "worst_case_instance",
    "tightness_measurement",
    "trace_ratios",
    "SplitMix64",
    "random_suite",
    "separable_quadratic_minimum",
    "empirical_eta",
]

CHECK_NAMES = ("thm1_chain", "lemma2", "descent_add20", "descent_add21",
               "descent_add22", "pl_add23", "pl_generalized", "interpolation",
               "tightness")

SLACK_TOL = rates.SLACK_RTOL
INTERP_TOL = 1e-9
TIGHTNESS_TOL = 1e-12
# gaps below this fraction of the objective scale are roundoff, not signal
GAP_FLOOR = 1e-12
# t <= 1/L is tested with this relative allowance for symbolic steps like "1/L"
STEP_RTOL = 1e-12


@dataclass
class CheckResult:
    name: str
    worst_slack: Optional[float] = None
    worst_iteration: Optional[int] = None
    tolerance: float = SLACK_TOL
    passed: Optional[bool] = None
    applicable: bool = True
    grade: str = "theorem"
    note: str = ""

    def observe(self, slack: float, k: int):
        if self.worst_slack is None or slack < self.worst_slack:
            self.worst_slack = float(slack)
            self.worst_iteration = int(k)

    def finish(self):
        if not self.applicable:
            self.passed = None
        elif self.worst_slack is None:
            # applicable but nothing to compare (single-record trace)
            self.passed = True
        else:
            self.passed = bool(self.worst_slack >= -self.tolerance)
        return self


@dataclass
class CertificationReport:
    problem_id: str
    step: float
    rho: float
    worst_ratio: Optional[float]
    iterations: int
    stop_reason: str
    checks: List[CheckResult] = field(default_factory=list)
    eta: Optional[float] = None

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks if c.applicable)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        d = {
            "problem_id": self.problem_id,
            "step": self.step,
            "rho": self.rho,
            "worst_ratio": self.worst_ratio,
            "iterations": self.iterations,
            "stop_reason": self.stop_reason,
            "eta": self.eta,
            "overall": "pass" if self.overall else "fail",
            "checks": [asdict(c) for c in self.checks],
        }
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    def checks_csv(self) -> str:
        cols = ("problem_id", "step", "name", "applicable", "grade", "worst_slack",
                "worst_iteration", "tolerance", "passed")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for c in self.checks:
            w.writerow([self.problem_id, format(self.step, ".17g"), c.name,
                        int(c.applicable), c.grade,
                        "" if c.worst_slack is None else format(c.worst_slack, ".17g"),
                        "" if c.worst_iteration is None else c.worst_iteration,
                        format(c.tolerance, ".17g"),
                        "" if c.passed is None else int(c.passed)])
        return buf.getvalue()


def trace_ratios(trace: Trace):
    """Consecutive ratios ``|G(x_{k+1})| / |G(x_k)|``, skipping tiny denominators."""
    out = []
    recs = trace.records
    for a, b in zip(recs, recs[1:]):
        if a.prox_grad_norm >= RATIO_FLOOR:
            out.append(b.prox_grad_norm / a.prox_grad_norm)
    return out


def empirical_eta(problem: CompositeProblem, trace: Trace) -> Optional[float]:
    """Smallest ``0.5 |G_t(x)|^2 / (phi(x) - min phi)`` along the trace.

    Records whose gap is below roundoff level are skipped.  The value is
    capped at ``1/t``, which the descent lemma already implies.
    """
    if problem.known_min is None:
        return None
    floor = GAP_FLOOR * rates.scale(problem.known_min)
    vals = []
    for rec in trace.records:
        gap = rec.phi - problem.known_min
        if gap > floor:
            vals.append(0.5 * rec.prox_grad_norm ** 2 / gap)
    if not vals:
        return None
    return min(min(vals), 1.0 / trace.step)


def _consistency(problem, trace):
    if not trace.records:
        raise ConsistencyError("trace has no records")
    if trace.problem_name and trace.problem_name != problem.name:
        raise ConsistencyError(
            f"trace belongs to {trace.problem_name!r}, not {problem.name!r}")
    x0 = trace.records[0].x
    if x0.size != problem.dim:
        raise ConsistencyError(
            f"trace dimension {x0.size} differs from problem dimension {problem.dim}")
    if phi_value(problem, x0) != trace.records[0].phi:
        raise ConsistencyError("objective at iterate 0 does not match the trace")


def certify_trace(problem: CompositeProblem, trace: Trace, *, witness: bool = False,
                  empirical: bool = False,
                  interpolation: bool = True) -> CertificationReport:
    """Evaluate every applicable inequality along ``trace``.

    Parameters
    ----------
    witness : bool
        Also require the measured worst ratio to equal rho(t) (tightness).
    empirical : bool
        When no PL constant is known, use the trace-minimal empirical one;
        the PL check is then graded ``"empirical-eta"``.
    interpolation : bool
        Check the interpolation inequalities on consecutive iterates.
    """
    _consistency(problem, trace)
    f, g = problem.smooth, problem.nonsmooth
    t, mu, L = trace.step, f.mu, f.lip
    rho_t = rates.rho(t, mu, L)
    recs = trace.records
    pairs = list(zip(recs, recs[1:]))
    short_step = t <= (1.0 / L) * (1.0 + STEP_RTOL)
    is_zero = isinstance(g, ZeroFunction)

    chain = CheckResult("thm1_chain")
    lemma2 = CheckResult("lemma2", applicable=g.separable)
    d20 = CheckResult("descent_add20", applicable=short_step)
    d21 = CheckResult("descent_add21", applicable=short_step)
    d22 = CheckResult("descent_add22", applicable=short_step and is_zero)
    if not short_step:
        for c in (d20, d21, d22):
            c.note = "step exceeds 1/L"
    if not is_zero:
        d22.note = "g is not identically zero"

    for k, (a, b) in enumerate(pairs):
        s = rates.theorem1_chain_slacks(a, b, rho_t)
        resid = rho_t * a.prox_grad_norm - a.residual_grad_norm
        sc = rates.scale(rho_t * a.prox_grad_norm, b.subdiff_dist, a.residual_grad_norm,
                         None if a.subdiff_dist is None else rho_t * a.subdiff_dist)
        chain.observe(min(v for v in (s.s1, s.s2, s.s3, resid) if v is not None) / sc, k)

        if short_step:
            terms = (a.phi, b.phi, 0.5 * t * a.prox_grad_norm ** 2,
                     0.5 * t * b.prox_grad_norm ** 2)
            sc = rates.scale(*terms)
            s21 = rates.refined_descent_slack(a.phi, b.phi, a.prox_grad_norm,
                                              b.prox_grad_norm, t, 0.0)
            d21.observe(s21 / sc, k)
            if mu * t < 1:
                s20 = rates.refined_descent_slack(a.phi, b.phi, a.prox_grad_norm,
                                                  b.prox_grad_norm, t, mu)
                coeff = t / (2.0 * (1.0 - mu * t))
                d20.observe(s20 / rates.scale(*terms, coeff * b.prox_grad_norm ** 2), k)
            else:
                # infinite coefficient: one-step convergence is the finite content
                d20.note = "mu*t = 1: checked G(x+) = 0 with the mu = 0 form"
                zero = -b.prox_grad_norm / rates.scale(a.prox_grad_norm)
                d20.observe(min(s21 / sc, zero), k)
            if is_zero:
                ga = np.linalg.norm(f.grad(a.x))
                gb = np.linalg.norm(f.grad(b.x))
                fa, fb = f.eval(a.x), f.eval(b.x)
                s22 = rates.refined_descent_slack(fa, fb, ga, gb, t, 0.0)
                d22.observe(s22 / rates.scale(fa, fb, 0.5 * t * ga ** 2,
                                              0.5 * t * gb ** 2), k)

    if g.separable:
        for rec in recs:
            lemma2.observe((rec.subdiff_dist - rec.prox_grad_norm)
                           / rates.scale(rec.subdiff_dist), rec.k)
    else:
        lemma2.note = "g is not separable"

    pl = _pl_check(problem, trace, pairs, short_step, is_zero, empirical)
    checks = [chain, lemma2, d20, d21, d22]
    checks.extend(pl[:2])
    eta = pl[2]

    interp = CheckResult("interpolation", tolerance=INTERP_TOL, applicable=interpolation)
    if interpolation:
        for k, (a, b) in enumerate(pairs):
            for x, y in ((a.x, b.x), (b.x, a.x)):
                interp.observe(_interp_worst(f, x, y), k)
    checks.append(interp)

    ratios = trace_ratios(trace)
    worst_ratio = max(ratios) if ratios else None
    tight = CheckResult("tightness", tolerance=TIGHTNESS_TOL, applicable=witness)
    if witness:
        if worst_ratio is None:
            raise DegenerateStartError("no ratio with a nonzero denominator")
        tight.observe(-abs(worst_ratio - rho_t), int(np.argmax(ratios)))
    checks.append(tight)

    for c in checks:
        c.finish()
    return CertificationReport(problem_id=problem.name, step=t, rho=rho_t,
                               worst_ratio=worst_ratio, iterations=len(recs) - 1,
                               stop_reason=trace.stop_reason, checks=checks, eta=eta)


def _pl_check(problem, trace, pairs, short_step, is_zero, empirical):
    add23 = CheckResult("pl_add23", applicable=False)
    gen = CheckResult("pl_generalized", applicable=False)
    target = add23 if is_zero else gen
    other = gen if is_zero else add23
    other.note = "g is not identically zero" if not is_zero else "g is identically zero"
    t = trace.step
    eta = problem.eta
    if problem.known_min is None:
        target.note = "minimum value unknown"
        return add23, gen, None
    if not short_step:
        target.note = "step exceeds 1/L"
        return add23, gen, None
    if eta is None and empirical:
        eta = empirical_eta(problem, trace)
        target.grade = "empirical-eta"
    if eta is None:
        target.note = "no PL constant"
        return add23, gen, None
    if eta * t > 1:
        target.note = "eta * t > 1"
        return add23, gen, eta
    target.applicable = True
    fmin = problem.known_min
    for k, (a, b) in enumerate(pairs):
        gap_a, gap_b = a.phi - fmin, b.phi - fmin
        bound, _ = rates.pl_gap_bound(max(gap_a, 0.0), eta, t)
        target.observe((bound - gap_b) / rates.scale(a.phi, b.phi, fmin), k)
    return add23, gen, eta


def _interp_worst(f, x, y):
    """Worst normalized interpolation slack between two points."""
    dx = np.linalg.norm(x - y)
    dg = np.linalg.norm(f.grad(x) - f.grad(y))
    if f.mu == f.lip:
        return -rates.interpolation_limit_residual(f, x, y) / rates.scale(dx)
    s = rates.interpolation_slacks(f, x, y)
    grad_scale = rates.scale(f.lip * dx, dg)
    val_scale = rates.scale(f.eval(x), f.eval(y), f.lip * dx ** 2, dg * dx)
    return min(s.lower_lip / grad_scale, s.upper_lip / grad_scale,
               s.inner_prod / val_scale, s.interp / val_scale)


def worst_case_instance(mu: float, L: float, t: float):
    """1D quadratic on which one PG step contracts ``|G_t|`` by exactly rho(t).

    The curvature is whichever of mu, L maximizes ``|1 - c t|`` (mu on ties);
    g is zero and the start point is 1.
    """
    rho_t = rates.rho(t, mu, L)
    if not mu > 0:
        raise InvalidArgumentError(f"mu must be positive, got {mu}")
    c = L if abs(1.0 - L * t) > abs(1.0 - mu * t) else mu
    f = make_quadratic(QuadraticSpec(np.array([c])))
    problem = CompositeProblem(f, ZeroFunction(), known_min=0.0,
                               name=f"witness-mu{mu:g}-L{L:g}-t{t:.17g}")
    return problem, np.array([1.0])


def tightness_measurement(problem: CompositeProblem, x0, t: float, steps: int = 50) -> float:
    """Largest observed one-step ratio ``|G_t(x+)| / |G_t(x)|`` over ``steps`` steps."""
    trace = run_pg(problem, x0, t, max_iters=steps, tol=0.0)
    if trace.records[0].prox_grad_norm < RATIO_FLOOR:
        raise DegenerateStartError("proximal gradient vanishes at the start point")
    ratios = trace_ratios(trace)
    return max(ratios) if ratios else 0.0


class SplitMix64:
    """SplitMix64 generator; reproducible across languages.

    state += 0x9E3779B97F4A7C15;
    z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
    out = z ^ (z >> 31)            (all arithmetic mod 2**64)

    Uniforms are ``(out >> 11) * 2**-53``; normals come from Box-Muller on
    two uniforms, using the cosine branch only.
    """

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def normal(self) -> float:
        u1 = 1.0 - self.uniform()  # (0, 1]
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def normals(self, n: int) -> np.ndarray:
        return np.array([self.normal() for _ in range(n)])


G_KINDS = ("zero", "l1", "box", "elastic_net")


def _unit_oracle(kind):
    if kind == "zero":
        return ZeroFunction()
    if kind == "l1":
        return L1Norm(1.0)
    if kind == "box":
        return BoxIndicator(-1.0, 1.0)
    if kind == "elastic_net":
        return ElasticNet(1.0, 1.0)
    raise InvalidArgumentError(f"unknown g kind {kind!r}; expected one of {G_KINDS}")


def separable_quadratic_minimum(f, g) -> Optional[float]:
    """Exact ``min f + g`` for a diagonal quadratic f with positive spectrum.

    Coordinate-wise, ``argmin c u^2/2 + b u + g(u) = prox_{g/c}(-b/c)``.
    """
    c = f.params.get("spectrum")
    if c is None or np.any(c <= 0) or not g.separable:
        return None
    b = f.params["linear"]
    x_star = g.prox(-b / c, 1.0 / c)
    return f.eval(x_star) + g.eval(x_star)


def random_suite(seed: int, count: int, dim: int, mu: float, L: float, g_kind: str):
    """Deterministic list of ``(problem, x0)`` pairs.

    Spectra are log-uniform in ``[mu, L]`` with both endpoints present,
    linear terms and start directions are standard normal, and x0 has norm 10.
    Minimum values are exact; g = 0 instances carry the PL constant mu.
    """
    if count < 1 or dim < 1:
        raise InvalidArgumentError("count and dim must be positive")
    if mu < 0 or not L > 0 or mu > L:
        raise InvalidArgumentError(f"need 0 <= mu <= L, L > 0; got mu={mu}, L={L}")
    g = _unit_oracle(g_kind)
    rng = SplitMix64(seed)
    suite = []
    for i in range(count):
        spec = [mu, L][:dim]
        for _ in range(dim - len(spec)):
            u = rng.uniform()
            spec.append(mu * (L / mu) ** u if mu > 0 else L * u)
        spectrum = np.array(spec)
        b = rng.normals(dim)
        d = rng.normals(dim)
        x0 = 10.0 * d / np.linalg.norm(d)
        f = make_quadratic(QuadraticSpec(spectrum, b))
        pl = mu if g_kind == "zero" and mu > 0 else None
        problem = CompositeProblem(f, g, known_min=separable_quadratic_minimum(f, g),
                                   pl_constant=pl, name=f"{g_kind}-s{seed}-{i:04d}")
        suite.append((problem, x0))
    return suite
