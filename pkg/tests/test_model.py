import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad_vec

from sparse_ou.exceptions import AssumptionHError
from sparse_ou.model import (
    ErgodicConstants, ModelSpec, check_assumption_h, ergodic_constants, generate_sparse_stable,
    inner_frobenius, lyapunov_residual, norm_frobenius, norm_l0, norm_l1, norm_max,
    solve_lyapunov,
)


def lyapunov_by_quadrature(a):
    """C = int_0^inf exp(-sA) exp(-sA^T) ds, truncated where the integrand is below 1e-16."""
    r0 = np.min(np.linalg.eigvals(a).real)
    upper = 40.0 / r0
    f = lambda s: sla.expm(-s * a) @ sla.expm(-s * a.T)  # noqa: E731
    val, _ = quad_vec(f, 0.0, upper, epsabs=1e-13, epsrel=1e-12, limit=500)
    return val


class TestAssumptionH:
    def test_scalar(self):
        cert = check_assumption_h([[0.5]])
        assert cert.eigenvalues.tolist() == [0.5]
        assert cert.r0 == 0.5 and cert.p0 == 1.0
        assert cert.diagonalizable and cert.holds

    def test_diagonal(self):
        cert = check_assumption_h(np.diag([1.0, 2.0, 3.0]))
        assert cert.r0 == 1.0
        assert cert.p0 == pytest.approx(1.0, abs=1e-14)

    def test_triangular_unstable(self):
        cert = check_assumption_h([[1.0, -2.0], [0.0, -0.5]])
        assert cert.r0 == pytest.approx(-0.5)
        assert not cert.holds

    def test_jordan_block_not_diagonalizable(self):
        cert = check_assumption_h([[1.0, 1.0], [0.0, 1.0]])
        assert not cert.diagonalizable
        assert not cert.holds

    def test_complex_pair(self):
        cert = check_assumption_h([[1.0, -3.0], [3.0, 1.0]])
        assert cert.r0 == pytest.approx(1.0)
        assert cert.holds

    def test_non_square(self):
        with pytest.raises(ValueError, match="square"):
            check_assumption_h(np.ones((2, 3)))

    def test_p0_at_least_one(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            cert = check_assumption_h(rng.standard_normal((4, 4)))
            assert cert.p0 >= 1.0 - 1e-12


class TestLyapunov:
    def test_scalar(self):
        assert solve_lyapunov([[0.5]]) == pytest.approx(np.array([[1.0]]), abs=1e-15)

    def test_diagonal(self):
        np.testing.assert_allclose(solve_lyapunov(np.diag([1.0, 2.0])), np.diag([0.5, 0.25]),
                                   atol=1e-15)

    def test_triangular_against_quadrature(self):
        a = np.array([[1.0, 0.3], [0.0, 2.0]])
        c = solve_lyapunov(a)
        assert lyapunov_residual(a, c) < 1e-10
        np.testing.assert_allclose(c, lyapunov_by_quadrature(a), atol=1e-8)

    @pytest.mark.parametrize("seed", range(6))
    def test_generated_against_quadrature(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 5))
        s = int(rng.integers(d, d * d + 1))
        a = generate_sparse_stable(d, s, 0.5, seed).a0
        np.testing.assert_allclose(solve_lyapunov(a), lyapunov_by_quadrature(a), atol=1e-6)

    def test_residual_and_spd(self):
        for seed in range(20):
            d = 2 + seed % 19
            a = generate_sparse_stable(d, max(d, round(0.3 * d * d)), 0.5, seed).a0
            c = solve_lyapunov(a)
            assert lyapunov_residual(a, c) <= 1e-10 * d
            assert np.array_equal(c, c.T)
            assert np.linalg.eigvalsh(c)[0] > 0

    def test_refuses_unstable(self):
        with pytest.raises(AssumptionHError):
            solve_lyapunov([[1.0, -2.0], [0.0, -0.5]])

    def test_refuses_zero_eigenvalue(self):
        with pytest.raises(AssumptionHError):
            solve_lyapunov(np.diag([1.0, 0.0]))


class TestErgodicConstants:
    def test_scalar(self):
        c = ergodic_constants([[0.5]])
        assert (c.r0, c.p0, c.k_big, c.k_small, c.m_small, c.m_big) == pytest.approx(
            (0.5, 1, 1, 1, 1, 1), abs=1e-14)

    def test_diagonal(self):
        c = ergodic_constants(np.diag([1.0, 2.0]))
        assert c.k_big == pytest.approx(0.5)
        assert c.k_small == pytest.approx(0.25)
        assert c.m_small == pytest.approx(0.5)
        assert c.m_big == pytest.approx(0.5)

    def test_random_sparse_against_second_eigensolver(self):
        a = generate_sparse_stable(5, 8, 0.5, seed=7).a0
        c = ergodic_constants(a)
        # independent route: Bartels-Stewart + LAPACK symmetric eigensolver
        c_ref = sla.solve_continuous_lyapunov(a, np.eye(5))
        w = sla.eigh(c_ref, eigvals_only=True)
        theta, p = sla.eig(a)
        p = p / np.linalg.norm(p, axis=0)
        sv = sla.svdvals(p)
        np.testing.assert_allclose(c.c_inf, c_ref, atol=1e-8)
        assert c.k_big == pytest.approx(w[-1], abs=1e-8)
        assert c.k_small == pytest.approx(w[0], abs=1e-8)
        assert c.m_small == pytest.approx(np.max(np.diag(c_ref)), abs=1e-8)
        assert c.m_big == pytest.approx(np.max(np.abs(c_ref)), abs=1e-8)
        assert c.r0 == pytest.approx(theta.real.min(), abs=1e-8)
        assert c.p0 == pytest.approx(sv[0] / sv[-1], rel=1e-8)

    @given(st.lists(st.floats(0.05, 20.0), min_size=1, max_size=6))
    @settings(max_examples=40, deadline=None)
    def test_diagonal_closed_forms(self, thetas):
        c = ergodic_constants(np.diag(thetas))
        assert c.k_big == pytest.approx(1 / (2 * min(thetas)), rel=1e-12)
        assert c.k_small == pytest.approx(1 / (2 * max(thetas)), rel=1e-12)
        assert c.p0 == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_invariants(self, seed):
        d = 2 + seed
        c = ergodic_constants(generate_sparse_stable(d, max(d, round(0.3 * d * d)), 0.5, seed).a0)
        assert 0 < c.k_small <= c.k_big
        assert c.m_small <= c.m_big + 1e-15
        assert c.m_small <= c.k_big + 1e-12
        assert c.k_small <= c.m_small * d
        assert np.max(np.abs(c.c_inf - c.c_inf.T)) <= 1e-10

    def test_unit(self):
        u = ErgodicConstants.unit()
        assert (u.r0, u.p0, u.k_big, u.k_small, u.m_small, u.m_big) == (1, 1, 1, 1, 1, 1)


class TestGenerator:
    def test_scalar(self):
        m = generate_sparse_stable(1, 1, 0.5, 0)
        assert m.a0.tolist() == [[0.5]]

    def test_sparsity_and_margin(self):
        m = generate_sparse_stable(5, 8, 0.5, 1)
        assert norm_l0(m.a0) == 8 == m.s0
        assert np.min(np.linalg.eigvals(m.a0).real) >= 0.5 - 1e-12

    def test_deterministic(self):
        a = generate_sparse_stable(6, 15, 0.3, 11).a0
        b = generate_sparse_stable(6, 15, 0.3, 11).a0
        assert a.tobytes() == b.tobytes()

    @given(st.integers(1, 12), st.floats(0.0, 1.0), st.floats(0.01, 3.0), st.integers(0, 2**32))
    @settings(max_examples=40, deadline=None)
    def test_gershgorin_guarantee(self, d, frac, margin, seed):
        s = d + int(round(frac * (d * d - d)))
        m = generate_sparse_stable(d, s, margin, seed)
        assert m.s0 == s
        assert np.all(np.diag(m.a0) > 0)
        off = m.a0[~np.eye(d, dtype=bool)]
        nz = off[off != 0]
        assert np.all((np.abs(nz) >= 0.1) & (np.abs(nz) <= 1.0))
        assert np.min(np.linalg.eigvals(m.a0).real) >= margin - 1e-9
        assert m.s0 >= m.d

    @pytest.mark.parametrize("d,s", [(3, 2), (2, 5), (0, 0)])
    def test_rejects_bad_sparsity(self, d, s):
        with pytest.raises(ValueError):
            generate_sparse_stable(d, s, 0.5, 0)

    def test_model_spec_rejects_non_square(self):
        with pytest.raises(ValueError):
            ModelSpec(np.ones((2, 3)))


def naive_norms(a):
    l1 = l0 = sq = 0.0
    mx = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            v = a[i, j]
            l1 += abs(v)
            sq += v * v
            l0 += v != 0
            mx = max(mx, abs(v))
    return l1, int(l0), sq ** 0.5, mx


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_norms_match_double_loop(r, c, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((r, c)) * (rng.random((r, c)) < 0.5)
    l1, l0, fro, mx = naive_norms(a)
    assert norm_l1(a) == pytest.approx(l1, rel=1e-12)
    assert norm_l0(a) == l0
    assert norm_frobenius(a) == pytest.approx(fro, rel=1e-12)
    assert norm_max(a) == mx
    assert inner_frobenius(a, a) == pytest.approx(fro ** 2, rel=1e-12)
