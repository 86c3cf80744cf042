"""Drift estimators: maximum likelihood, Lasso (FISTA with restart) and Dantzig (row LPs)."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InfeasibleError, SingularSystemError
from .lp import OPTIMAL, INFEASIBLE, linprog_simplex
from .model import ErgodicConstants, norm_l1, norm_max, plugin_constants

SUPPORT_TAU = 1e-6
MLE_CONDITION_CEILING = 1e12


class Method(str, enum.Enum):
    MLE = "mle"
    LASSO = "lasso"
    DANTZIG = "dantzig"


@dataclass(frozen=True)
class LassoConfig:
    lam: float
    max_iter: int = 20000
    tol: float = 1e-8
    acceleration: bool = True
    step_rule: str = "fixed_lipschitz"

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    @property
    def kkt_slack(self) -> float:
        return 10.0 * self.tol * (1.0 + self.lam)


@dataclass(frozen=True)
class DantzigConfig:
    lam: float
    lp_tol: float = 1e-9
    max_pivots: int | None = None  # per row; default 10 d^2

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if not self.lp_tol > 0:
            raise ValueError("lp_tol must be positive")


@dataclass
class EstimateResult:
    a_hat: np.ndarray
    method: Method
    lam: float
    iterations: int
    objective: float
    kkt_residual: float
    dantzig_feasibility: float
    status: str = "converged"
    meta: dict = field(default_factory=dict)

    @property
    def l1_norm(self) -> float:
        return norm_l1(self.a_hat)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def l0_count_at(self, tau=SUPPORT_TAU) -> int:
        return int(np.count_nonzero(np.abs(self.a_hat) > tau))

    def to_dict(self):
        return {
            "method": self.method.value,
            "lambda": self.lam,
            "a_hat": self.a_hat.tolist(),
            "iterations": self.iterations,
            "objective": self.objective,
            "kkt_residual": self.kkt_residual,
            "dantzig_feasibility": self.dantzig_feasibility,
            "l1_norm": self.l1_norm,
            "status": self.status,
            **({"meta": self.meta} if self.meta else {}),
        }


def soft_threshold(x, tau):
    """Proximal map of tau*|.|, elementwise."""
    if np.any(np.asarray(tau) < 0):
        raise ValueError("tau must be >= 0")
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def lasso_objective(a, stats, lam):
    """tr(S A^T + A C A^T / 2) + lam ||A||_1."""
    a = np.asarray(a, dtype=float)
    if a.shape != stats.c_hat.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {stats.c_hat.shape}")
    smooth = np.sum(stats.s_hat * a) + 0.5 * np.sum((a @ stats.c_hat) * a)
    return float(smooth + lam * np.sum(np.abs(a)))


def lasso_gradient(a, stats):
    return stats.s_hat + np.asarray(a) @ stats.c_hat


def dantzig_feasibility(a, stats):
    """||A C + S||_inf, the gradient residual bounded by lambda in the Dantzig constraint."""
    return norm_max(lasso_gradient(a, stats))


def kkt_residual(a, stats, lam):
    g = lasso_gradient(a, stats)
    on = a != 0
    res = np.where(on, np.abs(g + lam * np.sign(a)), np.maximum(np.abs(g) - lam, 0.0))
    return float(np.max(res))


def mle(stats):
    """A_ML = -S C^{-1}, via a linear solve with C_hat."""
    c = stats.c_hat
    cond = float(np.linalg.cond(c))
    if not cond <= MLE_CONDITION_CEILING:
        raise SingularSystemError(
            f"C_hat is singular or ill-conditioned (condition {cond:.3g}); "
            "the horizon is too short for this dimension",
            condition=cond,
        )
    a_hat = np.linalg.solve(c, -stats.s_hat.T).T
    return EstimateResult(
        a_hat=a_hat,
        method=Method.MLE,
        lam=0.0,
        iterations=0,
        objective=lasso_objective(a_hat, stats, 0.0),
        kkt_residual=kkt_residual(a_hat, stats, 0.0),
        dantzig_feasibility=dantzig_feasibility(a_hat, stats),
        meta={"condition": cond},
    )


def _polish(a, stats, lam):
    """Re-solve each row exactly on its current support and sign pattern.

    Returns the polished matrix, or ``None`` when some row's sign pattern is
    inconsistent with the equality system (FISTA not yet close enough).
    """
    c, s = stats.c_hat, stats.s_hat
    out = np.zeros_like(a)
    for i in range(a.shape[0]):
        supp = np.flatnonzero(a[i])
        if supp.size == 0:
            continue
        sgn = np.sign(a[i, supp])
        try:
            row = np.linalg.solve(c[np.ix_(supp, supp)], -(s[i, supp] + lam * sgn))
        except np.linalg.LinAlgError:
            return None
        if np.any(np.sign(row) != sgn):
            return None
        out[i, supp] = row
    return out


def lasso(stats, cfg):
    """Accelerated proximal gradient with monotone (function-value) restart, started at 0."""
    c, lam = stats.c_hat, cfg.lam
    lip = float(np.linalg.eigvalsh(c)[-1])
    if not lip > 0:
        raise SingularSystemError("C_hat is zero; the Lasso loss is not bounded below")
    step = 1.0 / lip
    obj = lambda m: lasso_objective(m, stats, lam)  # noqa: E731

    a = np.zeros_like(c)
    f = obj(a)
    y, t = a, 1.0
    status = "max_iter"
    it = 0
    restarts = 0
    while it < cfg.max_iter:
        it += 1
        cand = soft_threshold(y - step * lasso_gradient(y, stats), step * lam)
        f_cand = obj(cand)
        if f_cand > f:
            # momentum overshoot: restart from the last accepted iterate
            restarts += 1
            y, t = a, 1.0
            continue
        decrease = f - f_cand
        if cfg.acceleration:
            t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            y = cand + ((t - 1.0) / t_next) * (cand - a)
            t = t_next
        else:
            y = cand
        a, f = cand, f_cand
        if decrease <= cfg.tol * max(abs(f), 1e-300):
            if kkt_residual(a, stats, lam) <= cfg.kkt_slack:
                status = "converged"
                break
            polished = _polish(a, stats, lam)
            if polished is not None and kkt_residual(polished, stats, lam) <= cfg.kkt_slack:
                a, f = polished, obj(polished)
                status = "converged"
                break
            y, t = a, 1.0
    return EstimateResult(
        a_hat=a,
        method=Method.LASSO,
        lam=lam,
        iterations=it,
        objective=f,
        kkt_residual=kkt_residual(a, stats, lam),
        dantzig_feasibility=dantzig_feasibility(a, stats),
        status=status,
        meta={"restarts": restarts, "step": step},
    )


def dantzig_row_lp(c_hat, s_row, lam):
    """LP data (cost, A_ub, b_ub) for one row: min ||a||_1 s.t. ||C a + s||_inf <= lam, a = u - v."""
    d = c_hat.shape[0]
    a_ub = np.block([[c_hat, -c_hat], [-c_hat, c_hat]])
    b_ub = np.concatenate([lam - s_row, lam + s_row])
    return np.ones(2 * d), a_ub, b_ub


def dantzig(stats, cfg):
    """Row-decoupled Dantzig selector: both ||A||_1 and the sup-norm constraint split over rows."""
    c, s, lam = stats.c_hat, stats.s_hat, cfg.lam
    d = c.shape[0]
    budget = cfg.max_pivots if cfg.max_pivots is not None else 10 * d * d
    a_hat = np.zeros((d, d))
    pivots = 0
    cert = 0.0
    status = "converged"
    for i in range(d):
        cost, a_ub, b_ub = dantzig_row_lp(c, s[i], lam)
        res = linprog_simplex(cost, a_ub, b_ub, tol=cfg.lp_tol, max_pivots=budget)
        pivots += res.pivots
        if res.status == INFEASIBLE:
            raise InfeasibleError(
                f"Dantzig LP for row {i} is infeasible at lambda = {lam:g}", row=i
            )
        if res.status != OPTIMAL:
            status = res.status
        a_hat[i] = res.x[:d] - res.x[d:]
        cert = max(cert, res.certificate_residual)
    return EstimateResult(
        a_hat=a_hat,
        method=Method.DANTZIG,
        lam=lam,
        iterations=pivots,
        objective=norm_l1(a_hat),
        kkt_residual=cert,
        dantzig_feasibility=dantzig_feasibility(a_hat, stats),
        status=status,
    )


def lambda_rule(d, t_horizon, eps0, constants):
    """Smallest admissible tuning parameter 2 sqrt((2 m_inf + k_inf) ln(2 d^2 / eps0) / T)."""
    if not 0 < eps0 < 1:
        raise ValueError("eps0 must lie in (0, 1)")
    if not t_horizon > 0:
        raise ValueError("t_horizon must be positive")
    return 2.0 * math.sqrt(
        (2.0 * constants.m_small + constants.k_small) * math.log(2.0 * d * d / eps0) / t_horizon
    )


def lambda_plugin(stats, eps0):
    """lambda_rule with m_inf, k_inf replaced by ||diag C_hat||_inf and lambda_min(C_hat)."""
    return lambda_rule(stats.d, stats.t_horizon, eps0, plugin_constants(stats.c_hat))


def estimate(stats, method, lam=0.0, **kwargs):
    method = Method(method)
    if method is Method.MLE:
        return mle(stats)
    if method is Method.LASSO:
        return lasso(stats, LassoConfig(lam=lam, **kwargs))
    return dantzig(stats, DantzigConfig(lam=lam, **kwargs))


__all__ = [
    "DantzigConfig", "ErgodicConstants", "EstimateResult", "LassoConfig", "Method",
    "dantzig", "dantzig_feasibility", "dantzig_row_lp", "estimate", "kkt_residual",
    "lambda_plugin", "lambda_rule", "lasso", "lasso_gradient", "lasso_objective", "mle",
    "soft_threshold",
]
