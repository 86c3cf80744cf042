import math

import numpy as np
import pytest
import scipy.linalg as sla
from scipy.integrate import quad_vec

from sparse_ou.model import ModelSpec, ergodic_constants, solve_lyapunov
from sparse_ou.simulate import (
    Path, Scheme, SimConfig, simulate_path, sufficient_stats, transition_kernel,
)


class TestTransitionKernel:
    def test_scalar(self):
        phi, q = transition_kernel([[1.0]], 0.1)
        assert phi[0, 0] == pytest.approx(math.exp(-0.1), rel=1e-14)
        assert q[0, 0] == pytest.approx((1 - math.exp(-0.2)) / 2, rel=1e-12)
        assert phi[0, 0] == pytest.approx(0.9048374, abs=1e-7)
        assert q[0, 0] == pytest.approx(0.0906346, abs=1e-7)

    def test_diagonal(self):
        phi, q = transition_kernel(np.diag([1.0, 2.0]), 0.5)
        np.testing.assert_allclose(phi, np.diag([math.exp(-0.5), math.exp(-1.0)]), atol=1e-15)
        np.testing.assert_allclose(
            q, np.diag([(1 - math.exp(-1)) / 2, (1 - math.exp(-2)) / 4]), atol=1e-15)

    def test_q_against_quadrature(self):
        a = np.array([[1.0, 0.3], [0.0, 2.0]])
        _, q = transition_kernel(a, 0.2)
        f = lambda s: sla.expm(-s * a) @ sla.expm(-s * a.T)  # noqa: E731
        ref, _ = quad_vec(f, 0.0, 0.2, epsabs=1e-14, epsrel=1e-13)
        np.testing.assert_allclose(q, ref, atol=1e-8)

    @pytest.mark.parametrize("seed", range(5))
    def test_identity_and_psd(self, seed):
        from sparse_ou.model import generate_sparse_stable

        a = generate_sparse_stable(6, 12, 0.5, seed).a0
        c = solve_lyapunov(a)
        phi, q = transition_kernel(a, 0.05)
        np.testing.assert_allclose(q, c - phi @ c @ phi.T, atol=1e-12)
        assert np.linalg.eigvalsh(q)[0] >= -1e-12

    def test_rejects_bad_delta(self):
        with pytest.raises(ValueError):
            transition_kernel([[1.0]], 0.0)


class TestSimulatePath:
    def test_euler_single_step(self):
        cfg = SimConfig(1.0, 1, Scheme.EULER, seed=5, retain_brownian=True)
        p = simulate_path(ModelSpec([[0.5]]), cfg)
        x0, w = p.states[0, 0], p.brownian_increments[0, 0]
        assert p.states[1, 0] == x0 + (-0.5 * x0 + w)
        assert p.states[1, 0] == pytest.approx(0.5 * x0 + w, abs=1e-15)

    def test_euler_recursion_from_stored_increments(self):
        a = np.array([[1.0, 0.2], [-0.3, 0.8]])
        p = simulate_path(ModelSpec(a), SimConfig(2.0, 200, "euler", 3, True))
        x = p.states
        recon = x[:-1] + (x[:-1] @ (-p.dt * a).T + p.brownian_increments)
        assert np.array_equal(recon, x[1:])

    def test_exact_stationary_variance(self):
        p = simulate_path(ModelSpec([[0.5]]), SimConfig(2000.0, 200_000, "exact", 11))
        assert abs(np.var(p.states) - 1.0) < 0.05

    def test_deterministic(self):
        a = np.array([[1.0, 0.4], [0.0, 1.5]])
        cfg = SimConfig(5.0, 1000, "exact", 42)
        assert simulate_path(ModelSpec(a), cfg).states.tobytes() == \
            simulate_path(ModelSpec(a), cfg).states.tobytes()

    def test_shapes(self):
        p = simulate_path(ModelSpec(np.eye(3)), SimConfig(1.0, 10, "euler", 0, True))
        assert p.states.shape == (11, 3)
        assert p.brownian_increments.shape == (10, 3)
        assert p.dt == pytest.approx(0.1)
        assert p.t_horizon == pytest.approx(1.0)

    def test_exact_scheme_keeps_no_increments(self):
        p = simulate_path(ModelSpec(np.eye(2)), SimConfig(1.0, 10, "exact", 0, True))
        assert p.brownian_increments is None

    def test_stationarity_monte_carlo(self):
        """|C_hat - C_inf| <= 0.1 K_inf entrywise in at least 95% of 20 runs (T = 1000 / r0)."""
        a = np.array([[1.0, 0.5], [0.0, 1.5]])
        c = ergodic_constants(a)
        ok = 0
        for seed in range(20):
            st = sufficient_stats(simulate_path(ModelSpec(a), SimConfig(1000.0 / c.r0, 50_000,
                                                                        "exact", seed)))
            ok += np.max(np.abs(st.c_hat - c.c_inf)) <= 0.1 * c.k_big
        assert ok >= 19


class TestSufficientStats:
    def test_constant_path(self):
        cvec = np.array([1.0, -2.0, 0.5])
        p = Path(states=np.tile(cvec, (11, 1)), dt=0.1)
        st = sufficient_stats(p)
        np.testing.assert_allclose(st.c_hat, np.outer(cvec, cvec), atol=1e-14)
        assert np.all(st.s_hat == 0)

    def test_two_state(self):
        st = sufficient_stats(Path(states=np.array([[1.0], [1.2]]), dt=0.5))
        assert st.c_hat[0, 0] == pytest.approx(1.0)
        assert st.s_hat[0, 0] == pytest.approx(0.4)
        assert st.t_horizon == 0.5

    def test_too_short(self):
        with pytest.raises(ValueError):
            sufficient_stats(Path(states=np.zeros((1, 2)), dt=0.1))

    @pytest.mark.parametrize("seed", range(5))
    def test_euler_identity(self, seed):
        a = np.array([[1.0, 0.3, 0.0], [0.0, 0.7, -0.2], [0.1, 0.0, 1.2]])
        p = simulate_path(ModelSpec(a), SimConfig(20.0, 20_000, "euler", seed, True))
        st = sufficient_stats(p)
        np.testing.assert_allclose(st.s_hat + a @ st.c_hat, st.eps_hat, rtol=0, atol=1e-10)

    def test_gram_is_psd_and_symmetric(self):
        a = np.array([[1.0, 0.3], [0.2, 1.0]])
        st = sufficient_stats(simulate_path(ModelSpec(a), SimConfig(10.0, 5000, "exact", 1)))
        assert np.array_equal(st.c_hat, st.c_hat.T)
        assert np.linalg.eigvalsh(st.c_hat)[0] >= -1e-10

    def test_martingale_term_centered(self):
        """Across 200 seeds each entry of eps_T has mean within 4 standard errors of 0."""
        a = np.array([[1.0, 0.4], [0.0, 2.0]])
        eps = np.array([
            sufficient_stats(simulate_path(ModelSpec(a), SimConfig(50.0, 2500, "euler", s, True))).eps_hat
            for s in range(200)
        ])
        mean = eps.mean(axis=0)
        se = eps.std(axis=0, ddof=1) / math.sqrt(len(eps))
        assert np.all(np.abs(mean) <= 4 * se)
