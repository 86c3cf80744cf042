"""Dense two-phase revised simplex for small LPs.

    minimise    c^T x
    subject to  A_ub x <= b_ub,  x >= 0

Pivoting follows Bland's rule throughout (lowest-index entering column,
lowest-index leaving variable among ratio ties), so the method terminates on
degenerate problems. Sizes here are a few dozen rows, so every iteration
refactorises the basis with LU rather than updating an explicit inverse.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve


OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
PIVOT_LIMIT = "pivot_limit"


@dataclass
class LPResult:
    x: np.ndarray
    objective: float
    status: str
    pivots: int
    duals: np.ndarray  # one per inequality row, <= 0 at optimality
    certificate_residual: float

    @property
    def success(self) -> bool:
        return self.status == OPTIMAL


def _run(a, b, c, basis, tol, pivot_budget):
    """Primal simplex from a feasible basis. Returns (basis, status, pivots)."""
    m, n = a.shape
    pivots = 0
    while True:
        lu = lu_factor(a[:, basis])
        xb = lu_solve(lu, b)
        y = lu_solve(lu, c[basis], trans=1)
        reduced = c - a.T @ y
        reduced[basis] = 0.0
        entering = np.flatnonzero(reduced < -tol)
        if entering.size == 0:
            return basis, OPTIMAL, pivots
        if pivots >= pivot_budget:
            return basis, PIVOT_LIMIT, pivots
        j = int(entering[0])
        col = lu_solve(lu, a[:, j])
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            return basis, UNBOUNDED, pivots
        ratios = np.maximum(xb[rows], 0.0) / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        leave = int(min(ties, key=lambda r: basis[r]))
        basis[leave] = j
        pivots += 1


def linprog_simplex(c, a_ub, b_ub, tol=1e-9, max_pivots=None):
    c = np.asarray(c, dtype=float)
    a_ub = np.atleast_2d(np.asarray(a_ub, dtype=float))
    b_ub = np.asarray(b_ub, dtype=float)
    m, n = a_ub.shape
    if max_pivots is None:
        max_pivots = 50 * (m + n)

    # standard form [x | slack | artificial], rows flipped so rhs >= 0
    sign = np.where(b_ub < 0, -1.0, 1.0)
    need_art = np.flatnonzero(sign < 0)
    k = need_art.size
    a = np.zeros((m, n + m + k))
    a[:, :n] = a_ub * sign[:, None]
    a[:, n:n + m] = np.diag(sign)
    for t, i in enumerate(need_art):
        a[i, n + m + t] = 1.0
    b = b_ub * sign
    basis = np.array(
        [n + m + int(np.searchsorted(need_art, i)) if sign[i] < 0 else n + i for i in range(m)]
    )
    pivots = 0

    if k:
        c1 = np.zeros(n + m + k)
        c1[n + m:] = 1.0
        basis, status, p1 = _run(a, b, c1, basis, tol, max_pivots)
        pivots += p1
        if status == PIVOT_LIMIT:
            return _result(a_ub, b_ub, c, a, b, basis, n, m, sign, PIVOT_LIMIT, pivots, tol)
        xb = lu_solve(lu_factor(a[:, basis]), b)
        infeas = float(np.sum(xb[basis >= n + m]))
        if infeas > tol * max(1.0, float(np.max(np.abs(b)))):
            x = np.zeros(n)
            return LPResult(x, np.nan, INFEASIBLE, pivots, np.full(m, np.nan), np.inf)
        # pivot zero-level artificials out of the basis
        for r in np.flatnonzero(basis >= n + m):
            lu = lu_factor(a[:, basis])
            row = lu_solve(lu, np.eye(m)[r], trans=1) @ a[:, :n + m]
            row[basis[basis < n + m]] = 0.0
            cand = np.flatnonzero(np.abs(row) > tol)
            if cand.size:
                basis[r] = int(cand[0])
                pivots += 1
        # artificials left in the basis sit on redundant rows at level zero;
        # keep only those columns so no artificial can re-enter
        stuck = basis[basis >= n + m]
        keep = np.concatenate([np.arange(n + m), np.sort(stuck)])
        remap = {int(old): new for new, old in enumerate(keep)}
        a = a[:, keep]
        basis = np.array([remap[int(j)] for j in basis])

    cost = np.zeros(a.shape[1])
    cost[:n] = c
    basis, status, p2 = _run(a, b, cost, basis, tol, max(max_pivots - pivots, 0))
    pivots += p2
    return _result(a_ub, b_ub, c, a, b, basis, n, m, sign, status, pivots, tol)


def _result(a_ub, b_ub, c, a, b, basis, n, m, sign, status, pivots, tol):
    lu = lu_factor(a[:, basis])
    xb = lu_solve(lu, b)
    full = np.zeros(a.shape[1])
    full[basis] = xb
    x = np.maximum(full[:n], 0.0)
    cost = np.zeros(a.shape[1])
    cost[:n] = c
    y = lu_solve(lu, cost[basis], trans=1)
    duals = y * sign
    return LPResult(
        x=x,
        objective=float(c @ x),
        status=status,
        pivots=pivots,
        duals=duals,
        certificate_residual=optimality_residual(c, a_ub, b_ub, x, duals),
    )


def optimality_residual(c, a_ub, b_ub, x, duals):
    """Largest violation among primal/dual feasibility and complementary slackness.

    ``duals`` uses the sign convention y <= 0 for ``A_ub x <= b_ub``.
    """
    slack = b_ub - a_ub @ x
    reduced = c - a_ub.T @ duals
    parts = [
        np.max(np.maximum(-slack, 0.0), initial=0.0),
        np.max(np.maximum(-x, 0.0), initial=0.0),
        np.max(np.maximum(duals, 0.0), initial=0.0),
        np.max(np.maximum(-reduced, 0.0), initial=0.0),
        np.max(np.abs(duals * slack), initial=0.0),
        np.max(np.abs(x * reduced), initial=0.0),
    ]
    return float(max(parts))
