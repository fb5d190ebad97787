"""Dense two-phase simplex method for small equality-form linear programs.

    maximize  c @ x   subject to  A @ x = b,  x >= 0

Bland's rule is used for both the entering and the leaving variable, so the
method terminates on degenerate problems.  Intended for problems with at most
a few dozen variables (weights over the atoms of a posterior distribution).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, NumericalError

PIVOT_TOL = 1e-11


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    value: float
    basis: tuple[int, ...]
    iterations: int


def _pivot(T, row, col):
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]


def _run(T, basis, n_cols, max_iter):
    """Maximize the objective whose reduced costs sit in the last row of ``T``.

    The last row stores ``z_j - c_j``; a column enters while that is negative.
    Only the first ``n_cols`` columns may enter the basis.
    """
    m = T.shape[0] - 1
    it = 0
    while True:
        enter = next((j for j in range(n_cols) if T[m, j] < -PIVOT_TOL), -1)
        if enter < 0:
            return it
        leave, best = -1, np.inf
        for r in range(m):
            a = T[r, enter]
            if a > PIVOT_TOL:
                ratio = T[r, -1] / a
                if ratio < best - 1e-14 or (abs(ratio - best) <= 1e-14 and basis[r] < basis[leave]):
                    leave, best = r, ratio
        if leave < 0:
            raise NumericalError("linear program is unbounded")
        _pivot(T, leave, enter)
        basis[leave] = enter
        it += 1
        if it > max_iter:
            raise NumericalError("simplex iteration limit reached", diagnostics={"iterations": it})


def solve_lp(c, A, b, max_iter: int = 10_000, feas_tol: float = 1e-9) -> LPResult:
    """Solve the LP; raise :class:`InfeasibleError` when ``A x = b`` has no ``x >= 0``."""
    c = np.asarray(c, dtype=float).reshape(-1)
    A = np.array(A, dtype=float, ndmin=2)
    b = np.array(b, dtype=float).reshape(-1)
    m, n = A.shape
    if c.size != n or b.size != m:
        raise ValueError("solve_lp: inconsistent dimensions")
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # phase I over [x | artificials], minimizing the sum of artificials
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = list(range(n, n + m))
    iters = _run(T, basis, n, max_iter)
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    if -T[m, -1] > feas_tol * scale:
        raise InfeasibleError(f"linear constraints are infeasible (phase-I residual {-T[m, -1]:.3g})")

    # pivot zero-level artificials out; a row with no usable column is redundant
    keep = []
    for r in range(m):
        if basis[r] >= n:
            col = next((j for j in range(n) if abs(T[r, j]) > PIVOT_TOL), -1)
            if col < 0:
                continue
            _pivot(T, r, col)
            basis[r] = col
        keep.append(r)

    # phase II on the original columns
    T2 = np.zeros((len(keep) + 1, n + 1))
    T2[:-1, :n] = T[keep, :n]
    T2[:-1, -1] = T[keep, -1]
    basis = [basis[r] for r in keep]
    T2[-1, :n] = -c
    for r, j in enumerate(basis):
        if T2[-1, j] != 0.0:
            T2[-1] -= T2[-1, j] * T2[r]
    iters += _run(T2, basis, n, max_iter)

    x = np.zeros(n)
    for r, j in enumerate(basis):
        x[j] = max(T2[r, -1], 0.0)
    return LPResult(x, float(c @ x), tuple(basis), iters)

