from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from fairload.simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, solve


def build(c, rows, maximize=False, free=()):
    lp = LinearProgram()
    for i in range(len(c)):
        lp.add_var(f"v{i}", free=i in free)
    for coeffs, sense, rhs in rows:
        lp.add_row(dict(enumerate(coeffs)), sense, rhs)
    lp.set_objective(dict(enumerate(c)), maximize=maximize)
    return lp


def test_textbook_max():
    # max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
    sol = solve(build([3, 5], [([1, 0], "<=", 4), ([0, 2], "<=", 12), ([3, 2], "<=", 18)], maximize=True))
    assert sol.status == OPTIMAL and sol.objective == 36 and sol.values == [2, 6]


def test_exact_fraction():
    sol = solve(build([1, 1], [([3, 1], ">=", 1), ([1, 3], ">=", 1)]))
    assert sol.objective == Fraction(1, 2)


def test_infeasible_and_unbounded():
    assert solve(build([1], [([1], "<=", -1)])).status == INFEASIBLE
    assert solve(build([1], [([1], ">=", 0)], maximize=True)).status == UNBOUNDED


def test_free_variable():
    sol = solve(build([1], [([1], ">=", -5)], free=(0,)))
    assert sol.status == OPTIMAL and sol.objective == -5


def test_degenerate_cycling_example():
    # Beale's example cycles under the largest-coefficient rule
    c = [Fraction(-3, 4), 150, Fraction(-1, 50), 6]
    rows = [([Fraction(1, 4), -60, Fraction(-1, 25), 9], "<=", 0),
            ([Fraction(1, 2), -90, Fraction(-1, 50), 3], "<=", 0),
            ([0, 0, 1, 0], "<=", 1)]
    sol = solve(build(c, rows))
    assert sol.status == OPTIMAL and sol.objective == Fraction(-1, 20)


def test_bad_rows():
    lp = LinearProgram()
    lp.add_var("x")
    with pytest.raises(ValueError):
        lp.add_row({0: 1}, "<", 1)
    with pytest.raises(ValueError):
        lp.add_row({3: 1}, "<=", 1)


small = st.integers(-4, 4)


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(
    st.lists(small, min_size=n, max_size=n),
    st.lists(st.tuples(st.lists(small, min_size=n, max_size=n), st.sampled_from(["<=", ">=", "=="]),
                       st.integers(-6, 6)), min_size=1, max_size=4))))
def test_matches_scipy(data):
    c, rows = data
    rows.append(([1] * len(c), "<=", 20))  # keep it bounded
    sol = solve(build(c, rows))
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for coeffs, sense, rhs in rows:
        if sense == "<=":
            A_ub.append(coeffs); b_ub.append(rhs)
        elif sense == ">=":
            A_ub.append([-v for v in coeffs]); b_ub.append(-rhs)
        else:
            A_eq.append(coeffs); b_eq.append(rhs)
    ref = linprog(c, A_ub=A_ub or None, b_ub=b_ub or None, A_eq=A_eq or None, b_eq=b_eq or None,
                  bounds=[(0, None)] * len(c), method="highs")
    if ref.status == 2:
        assert sol.status == INFEASIBLE
    else:
        assert ref.status == 0 and sol.status == OPTIMAL
        assert abs(float(sol.objective) - ref.fun) < 1e-7
        x = np.array([float(v) for v in sol.values])
        for coeffs, sense, rhs in rows:
            lhs = sum(Fraction(a) * v for a, v in zip(coeffs, sol.values))
            assert {"<=": lhs <= rhs, ">=": lhs >= rhs, "==": lhs == rhs}[sense]
        assert (x >= 0).all()
