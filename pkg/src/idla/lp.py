"""Small dense linear programs via two-phase primal simplex with Bland's rule.

Covers the desk-scale programs used for polyhedron feasibility checks,
relative-interior witnesses, and support-function maximization: tens of dense
rows, free variables.  Bland's pivoting rule makes cycling impossible, so
termination needs no perturbation tricks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-9


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    value: float | None = None


def _pivot(tab: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    for i in range(tab.shape[0]):
        if i != row and tab[i, col] != 0.0:
            tab[i] -= tab[i, col] * tab[row]
    basis[row] = col


def _simplex(tab: np.ndarray, basis: np.ndarray, ncols: int, tol: float) -> str:
    """Minimize the objective encoded in the last tableau row.

    The tableau is kept canonical (basis columns are unit vectors); entering
    and leaving variables follow Bland's smallest-index rule.
    """
    m = len(basis)
    max_iter = 200 * (m + ncols + 10)
    for _ in range(max_iter):
        enter = -1
        for j in range(ncols):
            if tab[-1, j] < -tol:
                enter = j
                break
        if enter < 0:
            return "optimal"
        leave = -1
        best_ratio = np.inf
        for i in range(m):
            aij = tab[i, enter]
            if aij > tol:
                ratio = tab[i, -1] / aij
                if ratio < best_ratio - 1e-12 or (
                    abs(ratio - best_ratio) <= 1e-12
                    and (leave < 0 or basis[i] < basis[leave])
                ):
                    best_ratio = ratio
                    leave = i
        if leave < 0:
            return "unbounded"
        _pivot(tab, basis, leave, enter)
    raise RuntimeError("simplex iteration cap exceeded")


def solve_lp(
    c,
    a_ub=None,
    b_ub=None,
    a_eq=None,
    b_eq=None,
    *,
    maximize: bool = False,
    tol: float = DEFAULT_TOL,
) -> LPResult:
    """Solve min (or max) c.x subject to a_ub x <= b_ub and a_eq x = b_eq.

    Variables are free; internally they are split into positive parts and the
    program is solved in standard form with a phase-1 artificial basis.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    a_ub = np.zeros((0, n)) if a_ub is None else np.atleast_2d(np.asarray(a_ub, float))
    b_ub = np.zeros(0) if b_ub is None else np.atleast_1d(np.asarray(b_ub, float))
    a_eq = np.zeros((0, n)) if a_eq is None else np.atleast_2d(np.asarray(a_eq, float))
    b_eq = np.zeros(0) if b_eq is None else np.atleast_1d(np.asarray(b_eq, float))
    if a_ub.shape != (b_ub.size, n) or a_eq.shape != (b_eq.size, n):
        raise ValueError("inconsistent LP shapes")

    m_ub, m_eq = b_ub.size, b_eq.size
    m = m_ub + m_eq
    nstd = 2 * n + m_ub  # split free vars + slacks
    rows = np.zeros((m, nstd))
    rows[:m_ub, :n] = a_ub
    rows[:m_ub, n : 2 * n] = -a_ub
    rows[:m_ub, 2 * n :] = np.eye(m_ub)
    rows[m_ub:, :n] = a_eq
    rows[m_ub:, n : 2 * n] = -a_eq
    rhs = np.concatenate([b_ub, b_eq])
    neg = rhs < 0
    rows[neg] *= -1.0
    rhs = np.abs(rhs)

    # Phase 1: artificial identity basis, minimize the sum of artificials.
    tab = np.zeros((m + 1, nstd + m + 1))
    tab[:m, :nstd] = rows
    tab[:m, nstd : nstd + m] = np.eye(m)
    tab[:m, -1] = rhs
    tab[-1, nstd : nstd + m] = 1.0
    tab[-1] -= tab[:m].sum(axis=0)
    basis = np.arange(nstd, nstd + m)
    status = _simplex(tab, basis, nstd + m, tol)
    if status != "optimal":  # phase 1 is always bounded below by zero
        raise RuntimeError("phase-1 simplex failed unexpectedly")
    if -tab[-1, -1] > 1e-7 * (1.0 + float(np.abs(rhs).max(initial=0.0))):
        return LPResult(status="infeasible")

    # Drive remaining artificials out of the basis or drop redundant rows.
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] >= nstd:
            pivot_col = -1
            for j in range(nstd):
                if abs(tab[i, j]) > tol:
                    pivot_col = j
                    break
            if pivot_col >= 0:
                _pivot(tab, basis, i, pivot_col)
            else:
                keep[i] = False
    row_idx = np.flatnonzero(keep)
    basis = basis[keep]

    # Phase 2 on the real objective.
    c_std = np.concatenate([c, -c, np.zeros(m_ub)])
    if maximize:
        c_std = -c_std
    tab2 = np.zeros((row_idx.size + 1, nstd + 1))
    tab2[:-1, :nstd] = tab[row_idx, :nstd]
    tab2[:-1, -1] = tab[row_idx, -1]
    tab2[-1, :nstd] = c_std
    for i, bi in enumerate(basis):
        if c_std[bi] != 0.0:
            tab2[-1] -= c_std[bi] * tab2[i]
    status = _simplex(tab2, basis, nstd, tol)
    if status == "unbounded":
        return LPResult(status="unbounded")
    x_std = np.zeros(nstd)
    for i, bi in enumerate(basis):
        x_std[bi] = tab2[i, -1]
    x = x_std[:n] - x_std[n : 2 * n]
    return LPResult(status="optimal", x=x, value=float(c @ x))
