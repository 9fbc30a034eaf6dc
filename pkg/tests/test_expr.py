import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fairload import expr as ex
from fairload.errors import FairloadError
from fairload.expr import Max, OddPow, Shift, Sum, Var
from fairload.generate import random_expr
from fairload.rng import SplitMix64

A, B, C = ("u1", "w"), ("u2", "w"), ("u3", "w")


def test_eval_examples():
    f = Sum((Var(A, Fraction(2)), OddPow(Var(B), 3)))
    assert ex.eval_expr(f, {A: Fraction(1), B: Fraction(-2)}) == -6
    g = Max((Shift(Var(A), Fraction(1)), Var(A, Fraction(3))))
    assert ex.eval_expr(g, {A: Fraction(0)}) == 1
    assert ex.eval_expr(g, {A: Fraction(1)}) == 3


def test_check_expr_rejects():
    assert ex.check_expr(Var(A, Fraction(0)))
    assert ex.check_expr(OddPow(Var(A), 2))
    assert ex.check_expr(Max((Var(A), Var(B))))  # a child misses an edge
    assert ex.check_expr(Sum(()))
    assert not ex.check_expr(Max((Sum((Var(A), Var(B))), Shift(Sum((Var(A), Var(B))), Fraction(1)))))


def test_invert_linear_exact():
    f = ex.linear({A: 1, B: 10})
    s = ex.invert_component(f, {A: Fraction(1)}, B, Fraction(21))
    assert s == 2 and isinstance(s, Fraction)


def test_invert_power_exact():
    f = Shift(OddPow(Var(A, Fraction(1, 2)), 3), Fraction(1))
    assert ex.invert_component(f, {}, A, Fraction(9)) == 4


def test_invert_flat_float_plateau():
    # 1 + y**5 = 1 has the single root 0 although every |y| < 1e-3 evaluates flat
    f = Sum((Var(A), OddPow(Var(B), 5)))
    assert ex.invert_component(f, {A: 1.0}, B, 1.0) == 0


def test_invert_two_dependent_children():
    f = Sum((OddPow(Var(A), 3), Var(A)))
    s = ex.invert_component(f, {}, A, 10.0)
    assert abs(s ** 3 + s - 10) < 1e-9
    s2 = ex.invert_component(f, {}, A, 10.0, method="bisect")
    assert abs(s - s2) < 1e-9


def test_invert_requires_fixed_values():
    with pytest.raises(FairloadError) as err:
        ex.invert_component(ex.linear({A: 1, B: 1}), {}, A, 1)
    assert err.value.code == "KEY_MISMATCH"


@pytest.mark.parametrize("v, k, want", [(Fraction(27, 8), 3, Fraction(3, 2)), (Fraction(-32), 5, Fraction(-2))])
def test_odd_root_exact(v, k, want):
    assert ex.odd_root(v, k) == want


@given(st.floats(-1e12, 1e12, allow_nan=False), st.sampled_from([3, 5, 7]))
def test_odd_root_float(v, k):
    r = ex.odd_root(v, k)
    assert math.isclose(r ** k, v, rel_tol=1e-12, abs_tol=1e-300)


@given(st.integers(0, 2 ** 32), st.integers(0, 3))
def test_round_trip_random_expressions(seed, depth):
    rng = SplitMix64(seed)
    edges = [A, B, C][: rng.randint(1, 3)]
    f = random_expr(rng, edges, depth)
    assert not ex.check_expr(f)
    point = {e: Fraction(rng.randint(-20, 20), 4) for e in edges}
    free = rng.choice(edges)
    target = ex.eval_expr(f, point)
    s = ex.invert_component(f, {e: v for e, v in point.items() if e != free}, free, target)
    assert abs(float(s) - float(point[free])) <= 1e-10 * max(1.0, abs(float(point[free])))


@given(st.integers(0, 2 ** 32), st.integers(0, 3))
def test_componentwise_increasing(seed, depth):
    rng = SplitMix64(seed)
    f = random_expr(rng, [A, B], depth)
    base = {A: Fraction(rng.randint(-8, 8), 4), B: Fraction(rng.randint(-8, 8), 4)}
    for e in (A, B):
        up = dict(base)
        up[e] += Fraction(1, 8)
        assert ex.eval_expr(f, up) > ex.eval_expr(f, base)


@given(st.integers(0, 2 ** 32))
def test_g_map_decreasing(seed):
    rng = SplitMix64(seed)
    f = random_expr(rng, [A, B, C], rng.randint(0, 3))
    fixed = {C: Fraction(rng.randint(-4, 4), 2)}
    level = ex.eval_expr(f, {A: Fraction(0), B: Fraction(0), **fixed})
    g = ex.g_map(f, fixed, A, B, level)
    vals = [float(g(Fraction(t, 2))) for t in range(-4, 5)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert abs(float(g(Fraction(0)))) < 1e-9


def test_g_map_same_edge():
    with pytest.raises(ValueError):
        ex.g_map(Var(A), {}, A, A, 0)


@given(st.integers(0, 2 ** 32), st.integers(0, 3))
def test_json_round_trip(seed, depth):
    f = random_expr(SplitMix64(seed), [A, B, C], depth)
    assert ex.expr_from_json(ex.expr_to_json(f)) == f


@pytest.mark.parametrize("obj", [{"op": "nope"}, {"op": "oddpow", "exp": 3, "children": []}, [],
                                 {"op": "var", "edge": "bad"}])
def test_json_errors(obj):
    with pytest.raises(FairloadError) as err:
        ex.expr_from_json(obj)
    assert err.value.code == "PARSE_ERROR"


def test_refine_root_methods():
    h = lambda x: x ** 3
    for m in ("brent", "bisect"):
        r = ex.refine_root(h, 8.0, 0.0, 4.0, method=m)
        assert abs(r - 2.0) < 1e-10
    with pytest.raises(ValueError):
        ex.refine_root(h, 8.0, 0.0, 4.0, method="newton")


def test_bracket_root():
    lo, hi = ex.bracket_root(lambda x: x, 1000.0)
    assert lo <= 1000.0 <= hi
