"""Dense-tableau primal simplex with Bland's anti-cycling rule.

Solves ``max c^T x  s.t.  A x <= b, x >= 0`` for ``b >= 0``, where the
slack basis at the origin is feasible and no phase one is needed.  This is
exactly the shape of the cell-feasibility programs built in
:mod:`relu_invstab.regions`; those are highly degenerate at the origin,
which is why Bland's rule is used for both the entering and the leaving
variable.

The pivot loop is compiled with numba (thousands of tiny programs are
solved per region enumeration).
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import SolverError, UsageError

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"

PIVOT_TOL = 1e-12

_STATUS_OPTIMAL = 0
_STATUS_UNBOUNDED = 1
_STATUS_BUDGET = 2


@dataclass(frozen=True)
class LPResult:
    status: str
    x: np.ndarray
    value: float
    pivots: int


@numba.njit(cache=True)
def _bland_pivot_loop(T, basis, max_pivots, tol):
    rows = T.shape[0] - 1
    width = T.shape[1] - 1
    pivots = 0
    while True:
        j = -1
        for k in range(width):
            if T[rows, k] < -tol:
                j = k
                break
        if j < 0:
            return _STATUS_OPTIMAL, pivots

        best = np.inf
        for r in range(rows):
            if T[r, j] > tol:
                ratio = T[r, width] / T[r, j]
                if ratio < best:
                    best = ratio
        if best == np.inf:
            return _STATUS_UNBOUNDED, pivots
        slack = tol * max(1.0, abs(best))
        i = -1
        for r in range(rows):
            if T[r, j] > tol and T[r, width] / T[r, j] <= best + slack:
                if i < 0 or basis[r] < basis[i]:
                    i = r

        piv = T[i, j]
        for k in range(width + 1):
            T[i, k] /= piv
        for r in range(rows + 1):
            if r != i:
                f = T[r, j]
                if f != 0.0:
                    for k in range(width + 1):
                        T[r, k] -= f * T[i, k]
        for r in range(rows):
            if -tol < T[r, width] < 0.0:
                T[r, width] = 0.0
        basis[i] = j
        pivots += 1
        if pivots > max_pivots:
            return _STATUS_BUDGET, pivots


def run_tableau(T: np.ndarray, basis: np.ndarray, max_pivots: int) -> tuple[str, int]:
    """Pivot a prepared tableau in place.

    ``T`` has the constraint rows ``[A | I | b]`` followed by the objective
    row ``[-c | 0 | 0]``; ``basis`` lists the basic column of each row.
    Returns the status and the number of pivots performed.
    """
    status, pivots = _bland_pivot_loop(T, basis, max_pivots, PIVOT_TOL)
    if status == _STATUS_BUDGET:
        raise SolverError(f"simplex exceeded {max_pivots} pivots")
    return (UNBOUNDED if status == _STATUS_UNBOUNDED else OPTIMAL), pivots


def solve_lp(c, A, b, max_pivots: int | None = None) -> LPResult:
    """Maximize ``c @ x`` subject to ``A @ x <= b`` and ``x >= 0``.

    ``b`` must be entrywise nonnegative.  Raises :class:`SolverError` if the
    pivot budget is exhausted (which Bland's rule rules out in exact
    arithmetic).
    """
    c = np.asarray(c, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    rows, n = A.shape
    if c.shape != (n,) or b.shape != (rows,):
        raise UsageError("inconsistent LP dimensions")
    if np.any(b < 0):
        raise UsageError("solve_lp requires b >= 0 (origin must be feasible)")
    if max_pivots is None:
        max_pivots = 50 * (rows + n) + 100

    width = n + rows
    T = np.zeros((rows + 1, width + 1))
    T[:rows, :n] = A
    T[:rows, n:width] = np.eye(rows)
    T[:rows, -1] = b
    T[rows, :n] = -c
    basis = np.arange(n, width, dtype=np.int64)

    status, pivots = run_tableau(T, basis, max_pivots)
    x = np.zeros(width)
    x[basis] = T[:rows, -1]
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, x[:n], np.inf, pivots)
    return LPResult(OPTIMAL, x[:n], float(T[rows, -1]), pivots)
