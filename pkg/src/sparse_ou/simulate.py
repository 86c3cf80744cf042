"""Discretised OU trajectories and the sufficient statistics the estimators consume."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .exceptions import CholeskyError, SparseOUError
from .model import ModelSpec, as_matrix, require_assumption_h, solve_lyapunov


class Scheme(str, enum.Enum):
    EXACT = "exact"
    EULER = "euler"


@dataclass(frozen=True)
class SimConfig:
    t_horizon: float
    n_steps: int
    scheme: Scheme = Scheme.EXACT
    seed: int = 0
    retain_brownian: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not self.t_horizon > 0:
            raise ValueError("t_horizon must be positive")
        if int(self.n_steps) < 1:
            raise ValueError("n_steps must be >= 1")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @property
    def dt(self) -> float:
        return self.t_horizon / self.n_steps


@dataclass
class Path:
    states: np.ndarray  # (n_steps + 1, d)
    dt: float
    brownian_increments: np.ndarray | None = None  # (n_steps, d)
    scheme: Scheme | None = None

    @property
    def n_steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def d(self) -> int:
        return self.states.shape[1]

    @property
    def t_horizon(self) -> float:
        return self.dt * self.n_steps

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)


@dataclass
class SufficientStats:
    c_hat: np.ndarray
    s_hat: np.ndarray
    t_horizon: float
    eps_hat: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.c_hat = as_matrix(self.c_hat, "c_hat")
        self.s_hat = as_matrix(self.s_hat, "s_hat")
        if self.c_hat.shape != self.s_hat.shape or self.c_hat.shape[0] != self.c_hat.shape[1]:
            raise ValueError(
                f"c_hat {self.c_hat.shape} and s_hat {self.s_hat.shape} must be equal square shapes"
            )
        if self.eps_hat is not None:
            self.eps_hat = as_matrix(self.eps_hat, "eps_hat")

    @property
    def d(self) -> int:
        return self.c_hat.shape[0]


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(int(seed)))


def _cholesky(m, what):
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise CholeskyError(f"Cholesky factorisation of {what} failed; (H) certificate is broken") from exc


def transition_kernel(a, delta, c_inf=None):
    """Exact one-step law X_{k+1} | X_k ~ N(phi X_k, q).

    phi = exp(-a delta); q = C - phi C phi^T with C the stationary covariance.
    """
    a = as_matrix(a, "drift matrix")
    if not delta > 0:
        raise ValueError("delta must be positive")
    with np.errstate(all="raise"):
        try:
            phi = expm(-a * delta)
        except FloatingPointError as exc:
            raise SparseOUError(f"matrix exponential overflow for delta = {delta}") from exc
    if not np.all(np.isfinite(phi)):
        raise SparseOUError(f"matrix exponential overflow for delta = {delta}")
    c = solve_lyapunov(a) if c_inf is None else c_inf
    q = c - phi @ c @ phi.T
    q = 0.5 * (q + q.T)
    return phi, q


def simulate_path(model, cfg):
    """Simulate one stationary trajectory on the grid 0, dt, ..., T."""
    a = model.a0 if isinstance(model, ModelSpec) else as_matrix(model, "drift matrix")
    d = a.shape[0]
    dt = cfg.dt
    n = cfg.n_steps
    require_assumption_h(a)
    c_inf = solve_lyapunov(a)
    rng = _rng(cfg.seed)

    x0 = _cholesky(c_inf, "C_inf") @ rng.standard_normal(d)
    z = rng.standard_normal((n, d))
    states = np.empty((n + 1, d))
    states[0] = x0
    increments = None

    if cfg.scheme is Scheme.EXACT:
        phi, q = transition_kernel(a, dt, c_inf)
        noise = z @ _cholesky(q, "Q").T
        phi_t = phi.T.copy()
        x = x0.copy()
        for k in range(n):
            x = x @ phi_t
            x += noise[k]
            states[k + 1] = x
        # the exact scheme never samples dW, so there is nothing to retain
    else:
        dw = z * np.sqrt(dt)
        drift_t = (-dt * a).T.copy()
        x = x0.copy()
        for k in range(n):
            x = x + (x @ drift_t + dw[k])
            states[k + 1] = x
        if cfg.retain_brownian:
            increments = dw
    return Path(states=states, dt=dt, brownian_increments=increments, scheme=cfg.scheme)


def sufficient_stats(path):
    """Left-point (Ito) Riemann sums for C_hat, S_hat and, if increments are kept, eps_hat."""
    x = np.asarray(path.states, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("path needs at least two states")
    if not np.all(np.isfinite(x)):
        raise ValueError("path contains non-finite states")
    t = path.dt * (x.shape[0] - 1)
    left = x[:-1]
    c_hat = (left.T @ left) * (path.dt / t)
    c_hat = 0.5 * (c_hat + c_hat.T)
    s_hat = (np.diff(x, axis=0).T @ left) / t
    eps_hat = None
    if path.brownian_increments is not None:
        eps_hat = (np.asarray(path.brownian_increments).T @ left) / t
    meta = {"scheme": path.scheme.value if path.scheme else None, "n_steps": x.shape[0] - 1}
    return SufficientStats(c_hat=c_hat, s_hat=s_hat, t_horizon=t, eps_hat=eps_hat, meta=meta)
