"""Closed-form concentration thresholds, oracle constants and cone diagnostics.

Every evaluator takes an explicit ``ErgodicConstants`` so callers decide
whether population constants or plug-in surrogates are used.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .model import ErgodicConstants, norm_l1


@dataclass(frozen=True)
class ConeSpec:
    s: int
    c0: float

    def __post_init__(self):
        if int(self.s) < 1:
            raise ValueError("cone sparsity s must be >= 1")
        if not self.c0 > 0:
            raise ValueError("cone constant c0 must be positive")


def _check_eps0(eps0):
    if not 0 < eps0 < 1:
        raise ValueError("eps0 must lie in (0, 1)")


def _check_common(eps0, s, d):
    _check_eps0(eps0)
    if s < 1:
        raise ValueError("s must be >= 1")
    if d < 2:
        raise ValueError("d must be >= 2")


def h0(x, c):
    """Tail exponent H0(x) = r0 / (8 p0 K) * x^2 / (x + K) of the Gram-matrix deviation."""
    if x < 0:
        raise ValueError("x must be >= 0")
    k = c.k_big
    return (c.r0 / (8.0 * c.p0 * k)) * x * x / (x + k)


def frak_t0(c0, c):
    if not c0 > 0:
        raise ValueError("c0 must be positive")
    w = (c0 + 2.0) ** 2
    return 144.0 * c.p0 * c.k_big * w * (c.k_small + 18.0 * w * c.k_big) / (c.r0 * c.k_small ** 2)


def t0_bracket(eps0, s, d):
    """(4s+1) ln d - 2s (ln(2s/21) - 1) + ln(2/eps0); may be negative for extreme inputs."""
    return (4 * s + 1) * math.log(d) - 2 * s * (math.log(2 * s / 21.0) - 1.0) + math.log(2.0 / eps0)


def t0(eps0, s, c0, c, d):
    """Horizon beyond which the restricted eigenvalue exceeds k_inf / 2 w.p. >= 1 - eps0.

    Returns ``(T0, frak_T0)``.
    """
    _check_common(eps0, s, d)
    frak = frak_t0(c0, c)
    return frak * t0_bracket(eps0, s, d), frak


def t_mart_bracket(eps0, s, d):
    return (2 * s + 1) * math.log(d) - s * (math.log(s) - 1.0) + math.log(4.0 / eps0)


def t_mart(eps0, s, d, c):
    """Horizon for the Bernstein bound on sup_V <eps_T, V>_F / ||V||_1."""
    _check_common(eps0, s, d)
    pre = 48.0 * c.p0 * c.k_big / c.r0
    return pre * (c.k_small + 6.0 * c.k_big) / c.k_small ** 2 * t_mart_bracket(eps0, s, d)


def lasso_oracle_constant(gamma, c):
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return 9.0 * (2.0 + gamma) ** 2 / (2.0 * c.k_small * gamma * (1.0 + gamma))


def sparsity_factor(c):
    return 48.0 * c.m_big / c.k_small + 72.0


def dantzig_oracle_constant(gamma, c):
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    return 18.0 / c.k_small * ((gamma + 2.0) ** 2 / (4.0 * gamma) + sparsity_factor(c))


@dataclass
class BoundsReport:
    s0: int
    lam: float
    gamma: float
    lasso_oracle_const: float
    c_d: float
    error_bounds: dict
    t0: float | None = None
    frak_t0: float | None = None
    t_mart: float | None = None
    lambda_min: float | None = None
    horizons: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)

    def h0_at(self, x):
        return h0(x, _constants_from_dict(self.constants))

    def to_dict(self):
        return asdict(self)

    def rows(self):
        """(label, formula, value) triples for tabular audit output."""
        eb = self.error_bounds
        out = [
            ("lambda_min", "2 sqrt((2 m_inf + k_inf) ln(2 d^2/eps0) / T)", self.lambda_min),
            ("T0", "frak_T0 * ((4s+1) ln d - 2s(ln(2s/21) - 1) + ln(2/eps0))", self.t0),
            ("frak_T0", "144 p0 K (c0+2)^2 (k + 18 (c0+2)^2 K) / (r0 k^2)", self.frak_t0),
            ("T_mart", "48 p0 K/r0 * (k + 6K)/k^2 * ((2s+1) ln d - s(ln s - 1) + ln(4/eps0))",
             self.t_mart),
            ("lasso_oracle_const", "9 (2+gamma)^2 / (2 k gamma (1+gamma))", self.lasso_oracle_const),
            ("C_D", "18/k ((gamma+2)^2/(4 gamma) + 48 M/k + 72)", self.c_d),
            ("pred_l2_sq", "18 s0 lambda^2 / k", eb["l2_pred"]),
            ("frobenius_sq", "36 s0 lambda^2 / k^2", eb["frob"]),
            ("l1", "24 s0 lambda / k", eb["l1"]),
            ("lasso_l0", "(48 M/k + 72) s0", eb["sparsity"]),
        ]
        out += [(f"T_req[{k}]", "T0 at (eps0/2, s, c0) required by this bound", v) for k, v in self.horizons.items()]
        return out


def _constants_from_dict(d):
    return ErgodicConstants(
        c_inf=np.eye(1), k_big=d["K_inf"], k_small=d["k_inf"], m_small=d["m_inf"],
        m_big=d["M_inf"], r0=d["r0"], p0=d["p0"],
    )


def oracle_bounds(s0, lam, gamma, c):
    """Oracle-inequality constants and the four Lasso/Dantzig error bounds."""
    if s0 < 1:
        raise ValueError("s0 must be >= 1")
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    k = c.k_small
    errors = {
        "l2_pred": 18.0 * s0 * lam ** 2 / k,
        "frob": 36.0 * s0 * lam ** 2 / k ** 2,
        "l1": 24.0 * s0 * lam / k,
        "sparsity": sparsity_factor(c) * s0,
    }
    return BoundsReport(
        s0=int(s0),
        lam=float(lam),
        gamma=float(gamma),
        lasso_oracle_const=lasso_oracle_constant(gamma, c),
        c_d=dantzig_oracle_constant(gamma, c),
        error_bounds=errors,
        constants=c.as_dict(),
    )


def bounds_report(d, s0, eps0, c, t_horizon=None, lam=None, gamma=1.0, s=None, c0=3.0):
    """Everything at once: lambda rule, thresholds, oracle constants and horizon requirements.

    ``s``/``c0`` select the cone for the stand-alone T0 value (defaults: s0 and
    the Lasso cone constant 3).
    """
    from .estimate import lambda_rule

    s = s0 if s is None else s
    lam_min = lambda_rule(d, t_horizon, eps0, c) if t_horizon is not None else None
    if lam is None:
        lam = lam_min if lam_min is not None else 0.0
    rep = oracle_bounds(s0, lam, gamma, c)
    rep.lambda_min = lam_min
    rep.t0, rep.frak_t0 = t0(eps0, s, c0, c, d)
    rep.t_mart = t_mart(eps0, s, d, c)
    half = eps0 / 2.0
    sl = math.ceil(sparsity_factor(c) * s0)
    rep.horizons = {
        "lasso_error_bounds": t0(half, s0, 3.0, c, d)[0],
        "lasso_oracle": t0(half, s0, 3.0 + 4.0 / gamma, c, d)[0],
        "dantzig_error_bounds": t0(half, s0, 1.0, c, d)[0],
        "dantzig_oracle": t0(half, sl, 3.0 + 4.0 / gamma, c, d)[0],
    }
    if t0_bracket(eps0, s, d) < 0:
        rep.flags.append("T0 log bracket is negative")
    if t_horizon is not None:
        short = [k for k, v in rep.horizons.items() if t_horizon < v]
        if short:
            rep.flags.append("T below requirement for: " + ", ".join(short))
    rep.inputs = {"d": d, "s0": s0, "s": s, "eps0": eps0, "c0": c0, "gamma": gamma, "T": t_horizon}
    return rep


# cone diagnostics

def top_s_indices(v, s):
    """Flat indices of the s largest |entries|; ties go to the lowest row-major index."""
    flat = np.abs(np.asarray(v, dtype=float)).ravel()
    order = np.argsort(-flat, kind="stable")
    return order[: min(int(s), flat.size)]


def in_cone(v, cone):
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ValueError("the cone excludes the zero matrix")
    top = np.abs(v.ravel()[top_s_indices(v, cone.s)]).sum()
    return bool(norm_l1(v) <= (1.0 + cone.c0) * top + 1e-12)


def quadratic_ratio(v, c_hat):
    """tr(V C V^T) / ||V||_2^2."""
    return float(np.sum((v @ c_hat) * v) / np.sum(v * v))


def sample_cone(d, cone, n_samples, rng):
    """Random members of the cone: s-sparse Gaussian core plus a dense tail.

    The tail's l1 mass is a fraction (1 for half the draws, so the defining
    inequality binds) of c0 times the core's. Any tail entries that overtake
    core entries only enlarge the top-s mass, so membership is preserved.
    """
    size = d * d
    s = min(cone.s, size)
    for k in range(n_samples):
        v = np.zeros(size)
        core = rng.choice(size, size=s, replace=False)
        v[core] = rng.standard_normal(s)
        if s < size:
            rest = np.setdiff1d(np.arange(size), core, assume_unique=True)
            tail = rng.standard_normal(rest.size)
            frac = 1.0 if k % 2 == 0 else rng.random()
            tail *= frac * cone.c0 * np.abs(v[core]).sum() / max(np.abs(tail).sum(), 1e-300)
            v[rest] = tail
        yield v.reshape(d, d)


def _sparse_eigen_candidates(c_hat, s, n, rng):
    """Single-row matrices carrying the bottom eigenvector of a principal submatrix."""
    d = c_hat.shape[0]
    k = min(s, d)
    subsets = [np.arange(d)] if k == d else []
    subsets += [np.sort(rng.choice(d, size=k, replace=False)) for _ in range(n)]
    for cols in subsets:
        w, u = np.linalg.eigh(c_hat[np.ix_(cols, cols)])
        v = np.zeros((d, d))
        v[0, cols] = u[:, 0]
        yield v


def restricted_eigenvalue_empirical(c_hat, cone, n_samples=2000, seed=0):
    """Monte-Carlo upper estimate of inf over the cone of tr(V C V^T) / ||V||_2^2.

    Candidates are random cone members plus sparse bottom-eigenvector
    matrices; each is checked with ``in_cone``. This is an estimate, not a
    certified lower bound.
    """
    c_hat = np.asarray(c_hat, dtype=float)
    d = c_hat.shape[0]
    rng = np.random.Generator(np.random.PCG64(seed))
    best = math.inf
    accepted = 0
    candidates = [
        _sparse_eigen_candidates(c_hat, cone.s, max(1, n_samples // 10), rng),
        sample_cone(d, cone, n_samples, rng),
    ]
    for gen in candidates:
        for v in gen:
            if not np.any(v) or not in_cone(v, cone):
                continue
            accepted += 1
            best = min(best, quadratic_ratio(v, c_hat))
    if accepted == 0:
        raise RuntimeError("no valid cone sample was generated")
    return best
