import itertools

import numpy as np
import pytest

from sparse_ou.lp import linprog_simplex, optimality_residual


def vertex_oracle(c, a_ub, b_ub, tol=1e-9):
    """Minimum of c^T x over {A x <= b, x >= 0} by enumerating every basic solution.

    Only valid when the feasible set is nonempty and the minimum is finite (then it is
    attained at a vertex because x >= 0 makes the polyhedron pointed).
    """
    n = len(c)
    g = np.vstack([a_ub, -np.eye(n)])
    h = np.concatenate([b_ub, np.zeros(n)])
    best = np.inf
    for rows in itertools.combinations(range(len(h)), n):
        sub = g[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, h[list(rows)])
        if np.all(g @ x <= h + tol):
            best = min(best, float(c @ x))
    return best


def random_feasible_lp(rng, m, n):
    a = rng.standard_normal((m, n))
    x0 = rng.random(n)
    b = a @ x0 + rng.random(m)
    c = rng.random(n) + 0.1  # positive cost keeps the minimum finite
    return c, a, b


class TestAgainstOracle:
    @pytest.mark.parametrize("seed", range(15))
    def test_random(self, seed):
        rng = np.random.default_rng(seed)
        c, a, b = random_feasible_lp(rng, 5, 4)
        res = linprog_simplex(c, a, b)
        assert res.status == "optimal"
        assert res.objective == pytest.approx(vertex_oracle(c, a, b), abs=1e-8)
        assert res.certificate_residual <= 1e-9

    @pytest.mark.parametrize("seed", range(10))
    def test_negative_rhs_needs_phase_one(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = 3
        a = rng.standard_normal((4, n))
        x0 = rng.random(n) + 0.5
        b = a @ x0 + 0.1
        # force at least one negative right-hand side: -x_0 <= -0.2
        a = np.vstack([a, -np.eye(n)[0]])
        b = np.append(b, -0.2)
        c = rng.random(n) + 0.1
        res = linprog_simplex(c, a, b)
        assert res.status == "optimal"
        assert res.x[0] >= 0.2 - 1e-9
        assert res.objective == pytest.approx(vertex_oracle(c, a, b), abs=1e-8)


class TestSmallCases:
    def test_textbook(self):
        # max x + y s.t. x + 2y <= 4, 3x + y <= 6  ->  x = 8/5, y = 6/5
        res = linprog_simplex([-1.0, -1.0], [[1.0, 2.0], [3.0, 1.0]], [4.0, 6.0])
        np.testing.assert_allclose(res.x, [1.6, 1.2], atol=1e-12)
        assert res.objective == pytest.approx(-2.8)
        np.testing.assert_allclose(res.duals, [-0.4, -0.2], atol=1e-12)

    def test_zero_is_optimal(self):
        res = linprog_simplex([1.0, 1.0], [[1.0, 1.0]], [1.0])
        assert res.status == "optimal" and res.pivots == 0
        assert res.x.tolist() == [0.0, 0.0]

    def test_infeasible(self):
        # x <= -1 with x >= 0
        res = linprog_simplex([1.0], [[1.0]], [-1.0])
        assert res.status == "infeasible"
        assert not res.success

    def test_unbounded(self):
        res = linprog_simplex([-1.0, 0.0], [[0.0, 1.0]], [1.0])
        assert res.status == "unbounded"

    def test_pivot_limit(self):
        res = linprog_simplex([-1.0, -1.0], [[1.0, 2.0], [3.0, 1.0]], [4.0, 6.0], max_pivots=1)
        assert res.status == "pivot_limit"

    def test_degenerate_redundant_rows(self):
        # the same constraint three times plus a degenerate vertex at the origin
        a = np.array([[1.0, 1.0], [1.0, 1.0], [2.0, 2.0], [-1.0, 0.0]])
        b = np.array([1.0, 1.0, 2.0, 0.0])
        res = linprog_simplex([-1.0, -2.0], a, b)
        assert res.status == "optimal"
        assert res.objective == pytest.approx(-2.0)
        assert res.certificate_residual <= 1e-9

    def test_equality_through_two_inequalities(self):
        # x + y = 1 written as <= and >=, minimise x + 2y  ->  (1, 0)
        a = np.array([[1.0, 1.0], [-1.0, -1.0]])
        res = linprog_simplex([1.0, 2.0], a, [1.0, -1.0])
        assert res.status == "optimal"
        np.testing.assert_allclose(res.x, [1.0, 0.0], atol=1e-12)

    def test_beale_cycling_example(self):
        # classic cycling instance under the largest-coefficient rule; Bland terminates
        c = np.array([-0.75, 150.0, -0.02, 6.0])
        a = np.array([
            [0.25, -60.0, -0.04, 9.0],
            [0.5, -90.0, -0.02, 3.0],
            [0.0, 0.0, 1.0, 0.0],
        ])
        b = np.array([0.0, 0.0, 1.0])
        res = linprog_simplex(c, a, b)
        assert res.status == "optimal"
        assert res.objective == pytest.approx(-0.05, abs=1e-12)


def test_residual_flags_bad_point():
    a = np.array([[1.0, 2.0], [3.0, 1.0]])
    b = np.array([4.0, 6.0])
    c = np.array([-1.0, -1.0])
    assert optimality_residual(c, a, b, np.array([1.6, 1.2]), np.array([-0.4, -0.2])) < 1e-12
    assert optimality_residual(c, a, b, np.array([0.0, 0.0]), np.array([0.0, 0.0])) > 0.5
