import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proxcert import rates
from proxcert.bruteforce import golden_section
from proxcert.certify import random_suite
from proxcert.errors import (DegenerateInterpolationError, IncompleteRecordError,
                             InvalidConstantsError, SingularCoefficientError)
from proxcert.functions import QuadraticSpec, make_logistic, make_quadratic
from proxcert.pg import CompositeProblem, IterateRecord, phi_value, prox_grad_map, run_pg
from proxcert.prox import L1Norm, ZeroFunction


def test_rho_values():
    assert rates.rho(0.1, 1.0, 10.0) == 0.9
    assert rates.rho(2 / 11, 1.0, 10.0) == pytest.approx(9 / 11, abs=1e-15)
    assert abs(1 - 10 * (2 / 11)) == pytest.approx(abs(1 - 2 / 11), abs=1e-15)
    assert rates.rho(1.0, 1.0, 1.0) == 0.0


def test_rho_rejects_bad_constants():
    with pytest.raises(InvalidConstantsError):
        rates.rho(0.1, 2.0, 1.0)
    with pytest.raises(InvalidConstantsError):
        rates.rho(0.1, -1.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 10.0), st.floats(1.0, 100.0))
def test_rho_minimized_at_balanced_step(mu, ratio):
    L = mu * ratio
    t_star = 2.0 / (L + mu)
    best = rates.rho(t_star, mu, L)
    assert best == pytest.approx((L - mu) / (L + mu), rel=1e-12, abs=1e-15)
    grid = np.linspace(1e-6, 2.5 / L, 2001)
    vals = [rates.rho(t, mu, L) for t in grid]
    assert min(vals) >= best - 1e-12
    # grid minimizer lies within one grid cell of t_star
    assert abs(grid[int(np.argmin(vals))] - t_star) <= grid[1] - grid[0]


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1e-6, 1.0))
def test_rho_at_most_one_without_strong_convexity(L, frac):
    assert rates.rho(frac * 2.0 / L, 0.0, L) <= 1.0


def test_pl_rate_dominates_baseline():
    for a in np.linspace(0.0, 1.0, 10001):
        assert (1 - a) / (1 + a) <= 1 - a + 1e-16


def test_rate_bound():
    b = rates.rate_bound(0.1, 1.0, 10.0, eta=1.0)
    assert b.rho == 0.9
    assert b.descent_coeff_now == 0.05
    assert b.descent_coeff_next == pytest.approx(0.1 / (2 * 0.9))
    assert b.pl_rate_new == pytest.approx(9 / 11)
    assert b.pl_rate_baseline == pytest.approx(0.9)
    b0 = rates.rate_bound(0.1, 0.0, 10.0)
    assert b0.descent_coeff_next == b0.descent_coeff_now
    assert b0.pl_rate_new is None
    assert rates.rate_bound(1.0, 1.0, 1.0).descent_coeff_next == np.inf


def test_refined_descent_equality_case():
    assert rates.refined_descent_slack(0.5, 0.0, 1.0, 0.0, 1.0, 0.0) == 0.0


def test_refined_descent_composite_one_step():
    # phi = (x - 3)^2 / 2 + |x| is minimized at 2
    p = CompositeProblem(make_quadratic(QuadraticSpec(np.array([1.0]), np.array([-3.0]), 4.5)),
                         L1Norm(1.0))
    x_min = golden_section(lambda u: phi_value(p, np.array([u])), -10.0, 10.0)
    assert x_min == pytest.approx(2.0, abs=1e-6)
    g0, x1, _ = prox_grad_map(p, np.zeros(1), 1.0)
    g1, _, _ = prox_grad_map(p, x1, 1.0)
    phi0, phi1 = phi_value(p, np.zeros(1)), phi_value(p, x1)
    assert (phi0, phi1, abs(g0[0]), abs(g1[0])) == (4.5, 2.5, 2.0, 0.0)
    assert rates.refined_descent_slack(phi0, phi1, 2.0, 0.0, 1.0, 0.0) == 0.0


def test_refined_descent_stationary():
    assert rates.refined_descent_slack(3.0, 1.0, 0.0, 0.0, 0.5, 0.3) == 2.0


def test_refined_descent_singular():
    with pytest.raises(SingularCoefficientError):
        rates.refined_descent_slack(1.0, 0.0, 1.0, 0.0, 1.0, 1.0)


def test_refined_exceeds_classic_by_forward_term():
    for gp in (0.0, 0.3, 2.0):
        refined = rates.refined_descent_slack(5.0, 1.0, 1.5, gp, 0.1, 2.0)
        classic = rates.classic_descent_slack(5.0, 1.0, 1.5, 0.1)
        assert classic - refined == pytest.approx(0.1 / (2 * (1 - 0.2)) * gp ** 2, abs=1e-15)


def test_pl_gap_bound_remark_values():
    L, eta = 10.0, 1.0
    new, base = rates.pl_gap_bound(1.0, eta, 1.0 / L)
    assert new == pytest.approx(9 / 11, abs=1e-15)
    assert base == pytest.approx(0.9, abs=1e-15)
    assert new == pytest.approx((L - eta) / (L + eta), abs=1e-15)
    assert base == pytest.approx(1 - eta / L, abs=1e-15)


def test_pl_gap_bound_limits():
    new, base = rates.pl_gap_bound(2.0, 1.0, 1e-12)
    assert new == pytest.approx(2.0) and base == pytest.approx(2.0)
    assert rates.pl_gap_bound(5.0, 1.0, 1.0) == (0.0, 0.0)
    with pytest.raises(InvalidConstantsError):
        rates.pl_gap_bound(1.0, 2.0, 1.0)


def test_interpolation_quadratic_equality():
    f = make_quadratic(QuadraticSpec(np.array([1.0, 2.0])))
    s = rates.interpolation_slacks(f, np.array([1.0, 0.0]), np.zeros(2))
    # 0.5 - 0 - 0 - 1/4 - 1 * 0.25
    assert s.interp == 0.0


def test_interpolation_identical_points():
    f = make_quadratic(QuadraticSpec(np.array([1.0, 3.0]), np.array([1.0, -1.0])))
    x = np.array([0.3, -2.0])
    assert tuple(rates.interpolation_slacks(f, x, x)) == (0.0, 0.0, 0.0, 0.0)


def test_interpolation_quadratic_closed_form():
    # for a diagonal quadratic the slack is sum (L - c)(c - mu) d^2 / (2 (L - mu))
    r = np.random.default_rng(8)
    for _ in range(200):
        c = np.exp(r.uniform(0, 3, 5))
        f = make_quadratic(QuadraticSpec(c, r.standard_normal(5)))
        x, y = r.standard_normal(5) * 3, r.standard_normal(5) * 3
        mu, L = c.min(), c.max()
        expect = np.sum((L - c) * (c - mu) * (x - y) ** 2) / (2 * (L - mu))
        assert rates.interpolation_slacks(f, x, y).interp == pytest.approx(expect, rel=1e-9, abs=1e-9)


def test_interpolation_two_level_quadratics_are_tight():
    r = np.random.default_rng(9)
    for _ in range(200):
        c = np.where(r.uniform(size=6) < 0.5, 1.5, 40.0)
        c[:2] = 1.5, 40.0
        f = make_quadratic(QuadraticSpec(c, r.standard_normal(6)))
        x, y = r.standard_normal(6) * 3, r.standard_normal(6) * 3
        assert abs(rates.interpolation_slacks(f, x, y).interp) <= 1e-9


def test_interpolation_logistic_sweep():
    r = np.random.default_rng(10)
    a = r.standard_normal((10, 3))
    y = np.where(r.standard_normal(10) > 0, 1.0, -1.0)
    f = make_logistic(a, y, 0.0)
    for _ in range(1000):
        x1, x2 = r.standard_normal(3) * 3, r.standard_normal(3) * 3
        s = rates.interpolation_slacks(f, x1, x2)
        assert s.upper_lip >= -1e-9 and s.interp >= -1e-9
        assert min(s) >= -1e-9


def test_interpolation_degenerate():
    f = make_quadratic(QuadraticSpec(np.array([2.0, 2.0])))
    with pytest.raises(DegenerateInterpolationError):
        rates.interpolation_slacks(f, np.ones(2), np.zeros(2))
    assert rates.interpolation_limit_residual(f, np.array([1.0, -3.0]), np.zeros(2)) == 0.0


def test_chain_tightness_witness():
    p = CompositeProblem(make_quadratic(QuadraticSpec(np.array([1.0]))), ZeroFunction())
    tr = run_pg(p, np.array([1.0]), 0.1, max_iters=1, tol=0.0)
    a, b = tr.records
    s = rates.theorem1_chain_slacks(a, b, rates.rho(0.1, 1.0, 10.0))
    assert b.prox_grad_norm / a.prox_grad_norm == pytest.approx(0.9, abs=1e-15)
    assert s.s2 == pytest.approx(0.0, abs=1e-15)
    assert s.s1 == pytest.approx(0.0, abs=1e-15)
    assert s.s3 == pytest.approx(0.0, abs=1e-15)


def test_chain_at_optimum():
    z = np.zeros(1)
    rec = IterateRecord(0, z, 0.0, z, 0.0, z, 0.0, 0.0)
    assert tuple(rates.theorem1_chain_slacks(rec, rec, 0.5)) == (0.0, 0.0, 0.0)


def test_chain_without_distance_uses_residual():
    z = np.zeros(1)
    a = IterateRecord(0, z, 0.0, z, 2.0, z, 1.5, None)
    b = IterateRecord(1, z, 0.0, z, 1.0, z, 0.5, None)
    assert tuple(rates.theorem1_chain_slacks(a, b, 0.9)) == (None, pytest.approx(0.3), None)


def test_chain_incomplete_record():
    z = np.zeros(1)
    a = IterateRecord(0, z, 0.0, z, None, z, 1.0)
    with pytest.raises(IncompleteRecordError):
        rates.theorem1_chain_slacks(a, a, 0.9)


def test_chain_sweep_quadratic_l1():
    (p, x0), = random_suite(21, 1, 10, 1.0, 10.0, "l1")
    tr = run_pg(p, x0, 1.0 / p.smooth.lip, max_iters=500, tol=0.0)
    r = rates.rho(tr.step, p.smooth.mu, p.smooth.lip)
    for a, b in zip(tr.records, tr.records[1:]):
        s = rates.theorem1_chain_slacks(a, b, r)
        sc = rates.scale(r * a.prox_grad_norm, b.subdiff_dist, r * a.subdiff_dist)
        assert min(s) >= -1e-10 * sc
