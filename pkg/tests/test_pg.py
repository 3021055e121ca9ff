import csv
import io

import numpy as np
import pytest

from proxcert.bruteforce import prox_1d_golden
from proxcert.certify import random_suite
from proxcert.errors import InvalidArgumentError, NumericError, StartPointError
from proxcert.functions import QuadraticSpec, SmoothOracle, make_least_squares, make_quadratic
from proxcert.pg import TRACE_COLUMNS, CompositeProblem, phi_value, prox_grad_map, run_pg, trace_to_csv
from proxcert.prox import BoxIndicator, L1Norm, NonsmoothOracle, ZeroFunction, subgradient_violation


def quad(c, b=None):
    c = np.asarray(c, float)
    return make_quadratic(QuadraticSpec(c, None if b is None else np.asarray(b, float)))


def test_map_gradient_step():
    p = CompositeProblem(quad([1.0]), ZeroFunction())
    g_t, x_plus, s_plus = prox_grad_map(p, np.array([1.0]), 0.25)
    assert (g_t[0], x_plus[0], s_plus[0]) == (1.0, 0.75, 0.0)


def test_map_projection_onto_halfline():
    p = CompositeProblem(quad([1.0]), BoxIndicator(1.0, np.inf))
    g_t, x_plus, s_plus = prox_grad_map(p, np.array([2.0]), 1.0)
    assert (g_t[0], x_plus[0], s_plus[0]) == (1.0, 1.0, -1.0)
    assert p.nonsmooth.subdiff_interval(0, 1.0) == (-np.inf, 0.0)


def test_map_soft_threshold_step():
    p = CompositeProblem(quad([1.0], [-3.0]), L1Norm(1.0))
    g_t, x_plus, s_plus = prox_grad_map(p, np.array([0.0]), 1.0)
    assert x_plus[0] == pytest.approx(prox_1d_golden(abs, 1.0, 3.0), abs=1e-6)
    assert (g_t[0], x_plus[0], s_plus[0]) == (-2.0, 2.0, 1.0)


def test_map_rejects_bad_input():
    p = CompositeProblem(quad([1.0]), ZeroFunction())
    with pytest.raises(InvalidArgumentError):
        prox_grad_map(p, np.array([1.0]), 0.0)
    f = SmoothOracle(lambda x: 0.0, lambda x: np.array([0.0, np.nan]), 0.0, 1.0, 2)
    with pytest.raises(NumericError, match="coordinate 1"):
        prox_grad_map(CompositeProblem(f, ZeroFunction()), np.zeros(2), 0.5)


def test_run_one_step_convergence():
    p = CompositeProblem(quad([1.0]), ZeroFunction())
    tr = run_pg(p, np.array([1.0]), 1.0)
    assert [r.prox_grad_norm for r in tr.records] == [1.0, 0.0]
    assert tr.stop_reason == "tolerance_met"


def test_run_diagonal_iteration():
    p = CompositeProblem(quad([1.0, 10.0]), ZeroFunction())
    tr = run_pg(p, np.array([1.0, 1.0]), 0.1, max_iters=30, tol=0.0)
    np.testing.assert_allclose(tr.records[1].x, [0.9, 0.0], atol=1e-15)
    np.testing.assert_allclose(tr.records[2].x, [0.81, 0.0], atol=1e-15)
    ratios = [b.prox_grad_norm / a.prox_grad_norm for a, b in zip(tr.records[1:], tr.records[2:])]
    np.testing.assert_allclose(ratios, 0.9, rtol=1e-12)


def test_run_rank_deficient_least_squares():
    f = make_least_squares(np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([1.0, 0.0]))
    p = CompositeProblem(f, ZeroFunction(), known_min=0.0)
    tr = run_pg(p, np.array([0.0, 5.0]), 1.0, max_iters=5)
    assert tr.records[1].x.tolist() == [1.0, 5.0]
    assert tr.records[1].phi - p.known_min == 0.0


def test_phi_value():
    assert phi_value(CompositeProblem(quad([1.0]), L1Norm(1.0)), np.array([2.0])) == 4.0
    assert phi_value(CompositeProblem(quad([1.0]), BoxIndicator(0.0, 1.0)), np.array([2.0])) == np.inf
    ls = make_least_squares(np.eye(2), np.zeros(2))
    assert phi_value(CompositeProblem(ls, ZeroFunction()), np.array([3.0, 4.0])) == 12.5


def test_fixed_point_is_optimal():
    # argmin x^2 - 4x + |x| is 1.5, and the PG map fixes it exactly
    p = CompositeProblem(quad([2.0], [-4.0]), L1Norm(1.0), known_min=-2.25)
    for t in (0.1, 0.25, 0.5):
        g_t, x_plus, _ = prox_grad_map(p, np.array([1.5]), t)
        assert g_t[0] == 0.0 and x_plus[0] == 1.5
    assert phi_value(p, np.array([1.5])) == pytest.approx(p.known_min, abs=1e-9)


@pytest.mark.parametrize("kind", ["zero", "l1", "box", "elastic_net"])
def test_monotone_descent_and_subgradients(kind):
    for p, x0 in random_suite(4, 10, 6, 1.0, 10.0, kind):
        for t in (0.3 / p.smooth.lip, 1.0 / p.smooth.lip):
            tr = run_pg(p, x0, t, max_iters=80, tol=0.0)
            for a, b in zip(tr.records, tr.records[1:]):
                assert b.phi <= a.phi + 1e-12 * max(1.0, abs(a.phi))
                assert subgradient_violation(p.nonsmooth, b.x, a.s_plus) <= 1e-10 * max(
                    1.0, np.abs(a.s_plus).max())
                # the next iterate is x - t G_t(x) up to rounding
                np.testing.assert_allclose(b.x, a.x - t * a.prox_grad, rtol=0,
                                           atol=8 * np.finfo(float).eps * max(1.0, np.abs(a.x).max()))


def test_rotation_invariance():
    r = np.random.default_rng(1)
    c = np.array([1.0, 6.0])
    b = r.standard_normal(2)
    diag = CompositeProblem(quad(c, b), ZeroFunction())
    for theta in np.linspace(0.1, 3.0, 7):
        rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        q = rot @ np.diag(c) @ rot.T
        f = SmoothOracle(lambda x: 0.5 * x @ q @ x + (rot @ b) @ x,
                         lambda x: q @ x + rot @ b, mu=1.0, lip=6.0, dim=2)
        rotated = CompositeProblem(f, ZeroFunction())
        x = r.standard_normal(2)
        g1, xp1, _ = prox_grad_map(diag, x, 0.15)
        g2, xp2, _ = prox_grad_map(rotated, rot @ x, 0.15)
        np.testing.assert_allclose(g2, rot @ g1, atol=1e-12)
        np.testing.assert_allclose(xp2, rot @ xp1, atol=1e-12)


def test_infeasible_start_is_projected():
    p = CompositeProblem(quad([1.0, 2.0], [1.0, 1.0]), BoxIndicator(-1.0, 1.0))
    tr = run_pg(p, np.array([5.0, -0.5]), 0.25, max_iters=3)
    assert tr.records[0].x.tolist() == [1.0, -0.5]
    assert np.isfinite(tr.records[0].phi)


def test_nonfinite_start_point():
    p = CompositeProblem(quad([1e200]), ZeroFunction())
    with pytest.raises(StartPointError), np.errstate(over="ignore"):
        run_pg(p, np.array([1e200]), 1e-200)


def test_long_step_warns():
    p = CompositeProblem(quad([1.0, 10.0]), ZeroFunction())
    with pytest.warns(RuntimeWarning, match="2/L"):
        run_pg(p, np.ones(2), 0.25, max_iters=2)


def test_stop_reasons():
    p = CompositeProblem(quad([1.0, 10.0]), ZeroFunction())
    assert run_pg(p, np.ones(2), 0.01, max_iters=5).stop_reason == "max_iters"
    # with the tolerance test disabled an exact fixed point is reported as stalled
    tr = run_pg(p, np.zeros(2), 0.05, max_iters=5, tol=-1.0)
    assert tr.stop_reason == "stalled" and len(tr) == 1


def test_trace_csv_roundtrip():
    p = CompositeProblem(quad([1.0, 4.0], [0.3, -0.7]), L1Norm(0.2))
    tr = run_pg(p, np.array([1.0, -2.0]), 0.2, max_iters=10)
    rows = list(csv.reader(io.StringIO(trace_to_csv(tr))))
    assert tuple(rows[0]) == TRACE_COLUMNS
    assert rows[1][-1] == ""
    for rec, row in zip(tr.records, rows[1:]):
        assert int(row[0]) == rec.k
        assert float(row[1]) == rec.phi
        assert float(row[2]) == rec.prox_grad_norm
        assert float(row[4]) == rec.subdiff_dist
    assert float(rows[2][5]) == tr.records[1].prox_grad_norm / tr.records[0].prox_grad_norm


def test_trace_csv_blank_distance_for_nonseparable():
    class Ball(NonsmoothOracle):
        kind, separable = "ball", False

        def prox(self, x, step):
            n = np.linalg.norm(x)
            return x if n <= 1 else x / n

        def eval(self, x):
            return 0.0 if np.linalg.norm(x) <= 1 + 1e-12 else np.inf

    p = CompositeProblem(quad([1.0, 3.0], [-3.0, 0.0]), Ball())
    tr = run_pg(p, np.array([0.0, 0.5]), 0.2, max_iters=3)
    rows = list(csv.reader(io.StringIO(trace_to_csv(tr))))
    assert all(r[4] == "" for r in rows[1:])
