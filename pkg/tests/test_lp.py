import numpy as np
import pytest
import scipy.optimize

from idla.lp import solve_lp
from idla.rng import stream


def scipy_solve(c, a_ub, b_ub, a_eq, b_eq, maximize):
    sign = -1.0 if maximize else 1.0
    res = scipy.optimize.linprog(
        sign * np.asarray(c, float),
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(None, None),
        method="highs",
    )
    if res.status == 0:
        return "optimal", sign * res.fun
    if res.status == 3:
        return "unbounded", None
    if res.status in (2, 4):
        # HiGHS presolve may report "infeasible or unbounded"; disambiguate
        # with a plain feasibility solve
        feas = scipy.optimize.linprog(
            np.zeros(len(c)), A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
            bounds=(None, None), method="highs",
        )
        return ("unbounded", None) if feas.status == 0 else ("infeasible", None)
    raise RuntimeError(res.message)


def test_square_max():
    res = solve_lp(
        [1, 1], a_ub=[[1, 0], [-1, 0], [0, 1], [0, -1]], b_ub=[1, 0, 1, 0],
        maximize=True,
    )
    assert res.status == "optimal"
    assert res.value == pytest.approx(2.0, abs=1e-9)
    assert res.x == pytest.approx([1.0, 1.0], abs=1e-9)


def test_infeasible():
    assert solve_lp([1], a_ub=[[1], [-1]], b_ub=[0, -1]).status == "infeasible"


def test_unbounded():
    assert solve_lp([1], a_ub=[[-1]], b_ub=[0], maximize=True).status == "unbounded"


def test_equality_constraints():
    res = solve_lp(
        [1, 0], a_ub=[[-1, 0], [0, -1]], b_ub=[0, 0], a_eq=[[1, 1]], b_eq=[1]
    )
    assert res.status == "optimal"
    assert res.value == pytest.approx(0.0, abs=1e-9)


def test_redundant_rows():
    res = solve_lp(
        [1, 1],
        a_ub=[[1, 0], [1, 0], [-1, 0], [0, 1], [0, -1]],
        b_ub=[1, 1, 0, 1, 0],
        maximize=True,
    )
    assert res.status == "optimal"
    assert res.value == pytest.approx(2.0, abs=1e-9)


def test_degenerate_vertex():
    # three constraints meeting at one optimal vertex of a 2-D program
    res = solve_lp(
        [0, 1],
        a_ub=[[0, 1], [1, 1], [-1, 1], [-1, 0], [1, 0]],
        b_ub=[1, 1, 1, 1, 1],
        maximize=True,
    )
    assert res.status == "optimal"
    assert res.value == pytest.approx(1.0, abs=1e-9)


def test_random_against_scipy():
    gen = stream(71, 0)
    mismatches = []
    for trial in range(200):
        n = int(gen.integers(1, 6))
        m_ub = int(gen.integers(1, 8))
        m_eq = int(gen.integers(0, min(n, 3) + 1))
        c = gen.normal(size=n)
        a_ub = gen.normal(size=(m_ub, n))
        b_ub = gen.normal(size=m_ub) * 2
        a_eq = gen.normal(size=(m_eq, n)) if m_eq else None
        b_eq = gen.normal(size=m_eq) if m_eq else None
        maximize = bool(gen.integers(2))
        got = solve_lp(c, a_ub, b_ub, a_eq, b_eq, maximize=maximize)
        want_status, want_value = scipy_solve(c, a_ub, b_ub, a_eq, b_eq, maximize)
        if got.status != want_status:
            mismatches.append((trial, got.status, want_status))
            continue
        if got.status == "optimal":
            assert got.value == pytest.approx(want_value, abs=1e-6), trial
            # returned point must be feasible
            assert np.all(a_ub @ got.x <= b_ub + 1e-7)
            if m_eq:
                assert np.allclose(a_eq @ got.x, b_eq, atol=1e-7)
    assert not mismatches
