"""Sanity checks on the independent oracles themselves."""

from fractions import Fraction

from fairload.instance import BipartiteInstance

from oracles import bisect_root, count_integral_bruteforce, lp_oracle, pairs_pareto_bruteforce


def test_lp_oracle_fig1(fig1):
    assert lp_oracle(fig1, "min-spread") == 0
    assert lp_oracle(fig1, "max-min") == 20
    assert lp_oracle(fig1, "min-max") == Fraction(161, 13)


def test_lp_oracle_path():
    inst = BipartiteInstance.linear(["u"], [10], ["w1", "w2"], [("u", "w1"), ("u", "w2")],
                                    worker_weights={("u", "w2"): 3})
    # x1 = 3 x2, x1 + x2 = 10 -> 15/2
    assert lp_oracle(inst, "min-max") == Fraction(15, 2)


def test_count_bruteforce(fig2):
    assert count_integral_bruteforce(fig2) == 3630


def test_bisect_root():
    assert abs(bisect_root(lambda x: x ** 3 + x - 1, 0.0, 1.0) - 0.6823278038280193) < 1e-12


def test_pareto_bruteforce():
    assert pairs_pareto_bruteforce([(1, 0), (2, 2), (2, 1), (3, 2)]) == [(1, 0), (2, 2)]
