"""Drift model dX = -A X dt + dW: assumption (H), stationary covariance, ergodic constants.

Matrices are plain ``numpy.ndarray`` of shape (rows, cols), float64.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import AssumptionHError, EigenSolverError, SingularSystemError

DIAGONALIZABILITY_CEILING = 1e12
SYMMETRY_TOL = 1e-10


def as_matrix(a, name="matrix"):
    """Coerce to a finite 2-D float64 array."""
    m = np.array(a, dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if m.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains NaN or Inf")
    return m


def _square(a, name="matrix"):
    m = as_matrix(a, name)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


# entrywise norms (the matrix is treated as a vector of d1*d2 coordinates)

def norm_l1(a):
    return float(np.sum(np.abs(a)))


def norm_l0(a):
    return int(np.count_nonzero(a))


def norm_max(a):
    return float(np.max(np.abs(a)))


def norm_frobenius(a):
    return float(np.sqrt(np.sum(np.square(a))))


def inner_frobenius(a, b):
    return float(np.sum(np.asarray(a) * np.asarray(b)))


@dataclass(frozen=True)
class ModelSpec:
    a0: np.ndarray
    seed: int | None = None
    margin: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "a0", _square(self.a0, "a0"))

    @property
    def d(self) -> int:
        return self.a0.shape[0]

    @property
    def s0(self) -> int:
        return norm_l0(self.a0)


@dataclass(frozen=True)
class HCertificate:
    eigenvalues: np.ndarray
    r0: float
    p0: float
    diagonalizable: bool
    condition_estimate: float

    @property
    def holds(self) -> bool:
        return self.diagonalizable and self.r0 > 0


@dataclass(frozen=True)
class ErgodicConstants:
    c_inf: np.ndarray
    k_big: float
    k_small: float
    m_small: float
    m_big: float
    r0: float
    p0: float

    @classmethod
    def unit(cls, d=1):
        """All scalar constants equal to one (C_inf = I); used for formula audits."""
        return cls(np.eye(d), 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)

    def as_dict(self):
        return {
            "r0": self.r0, "p0": self.p0, "K_inf": self.k_big, "k_inf": self.k_small,
            "m_inf": self.m_small, "M_inf": self.m_big,
        }


def check_assumption_h(a, ceiling=DIAGONALIZABILITY_CEILING):
    """Eigen-decomposition summary of ``a`` used to certify assumption (H).

    The eigenvector matrix returned by LAPACK has unit-norm columns; p0 is its
    2-norm condition number, which is also the diagonalisability test statistic.
    """
    a = _square(a, "drift matrix")
    try:
        theta, p = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigensolver did not converge: {exc}") from exc
    with np.errstate(all="ignore"):
        cond = float(np.linalg.cond(p))
    if not math.isfinite(cond):
        cond = math.inf
    diagonalizable = cond <= ceiling
    r0 = float(np.min(theta.real))
    return HCertificate(
        eigenvalues=theta,
        r0=r0,
        p0=cond,
        diagonalizable=diagonalizable,
        condition_estimate=cond,
    )


def require_assumption_h(a, ceiling=DIAGONALIZABILITY_CEILING):
    cert = check_assumption_h(a, ceiling)
    if not cert.diagonalizable:
        raise AssumptionHError(
            f"drift matrix is numerically non-diagonalisable "
            f"(eigenvector condition {cert.condition_estimate:.3g} > {ceiling:g})"
        )
    if cert.r0 <= 0:
        raise AssumptionHError(
            f"drift matrix has an eigenvalue with non-positive real part (r0 = {cert.r0:.6g}); "
            "no stationary solution exists"
        )
    return cert


def solve_lyapunov(a):
    """Stationary covariance: the solution C of A C + C A^T = I.

    Solved as the d^2 x d^2 system (A (x) I + I (x) A) vec(C) = vec(I) with
    row-major vec, so it is only meant for moderate d.
    """
    a = _square(a, "drift matrix")
    require_assumption_h(a)
    d = a.shape[0]
    eye = np.eye(d)
    kron = np.kron(a, eye) + np.kron(eye, a)
    rhs = eye.ravel()
    try:
        vec = np.linalg.solve(kron, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(
            "Lyapunov operator is singular (an eigenvalue pair sums to zero)"
        ) from exc
    # one step of iterative refinement keeps the residual at roundoff level for d ~ 20
    vec = vec + np.linalg.solve(kron, rhs - kron @ vec)
    c = vec.reshape(d, d)
    c = 0.5 * (c + c.T)
    return c


def lyapunov_residual(a, c):
    a = np.asarray(a)
    return norm_max(a @ c + c @ a.T - np.eye(a.shape[0]))


def ergodic_constants(a, cert=None):
    """Bundle (r0, p0, K_inf, k_inf, m_inf, M_inf, C_inf) of a stable drift."""
    a = _square(a, "drift matrix")
    if cert is None:
        cert = require_assumption_h(a)
    elif not cert.holds:
        raise AssumptionHError("assumption (H) does not hold for this drift matrix")
    c = solve_lyapunov(a)
    eig = np.linalg.eigvalsh(c)
    return ErgodicConstants(
        c_inf=c,
        k_big=float(eig[-1]),
        k_small=float(eig[0]),
        m_small=float(np.max(np.abs(np.diag(c)))),
        m_big=norm_max(c),
        r0=cert.r0,
        p0=cert.p0,
    )


def plugin_constants(c_hat, like=None):
    """Empirical surrogate of the ergodic constants built from the Gram matrix.

    Only the covariance-derived entries are meaningful; r0 and p0 are copied
    from ``like`` when given and set to NaN otherwise.
    """
    c_hat = _square(c_hat, "c_hat")
    eig = np.linalg.eigvalsh(0.5 * (c_hat + c_hat.T))
    return ErgodicConstants(
        c_inf=c_hat,
        k_big=float(eig[-1]),
        k_small=float(eig[0]),
        m_small=float(np.max(np.abs(np.diag(c_hat)))),
        m_big=norm_max(c_hat),
        r0=like.r0 if like is not None else math.nan,
        p0=like.p0 if like is not None else math.nan,
    )


def generate_sparse_stable(d, s, margin=0.5, seed=0):
    """Random drift with exactly ``s`` nonzeros and Gershgorin discs in Re z >= margin.

    The ``s - d`` off-diagonal positions are drawn uniformly without
    replacement; their values are uniform on [-1, -0.1] U [0.1, 1]. Each
    diagonal entry is the absolute off-diagonal row sum plus ``margin``.
    """
    d, s = int(d), int(s)
    if d < 1:
        raise ValueError("d must be >= 1")
    if s < d:
        raise ValueError(f"s = {s} < d = {d}: the diagonal alone needs d nonzeros")
    if s > d * d:
        raise ValueError(f"s = {s} exceeds d^2 = {d * d}")
    if not margin > 0:
        raise ValueError("margin must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    a = np.zeros((d, d))
    off = np.flatnonzero(~np.eye(d, dtype=bool))
    picks = np.sort(rng.choice(off, size=s - d, replace=False))
    mags = rng.uniform(0.1, 1.0, size=s - d)
    signs = np.where(rng.random(s - d) < 0.5, -1.0, 1.0)
    a.flat[picks] = signs * mags
    a[np.diag_indices(d)] = np.sum(np.abs(a), axis=1) + margin
    model = ModelSpec(a0=a, seed=seed, margin=margin)
    require_assumption_h(a)
    return model
