"""Exact linear programs over the weighted non-negative feasible set.

Each solver encodes one objective over ``{x >= 0 : a_u . x_delta(u) = d_u}``
with auxiliary free variables for the load bounds and returns an exact
rational optimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from . import simplex
from .errors import FairloadError
from .instance import (Assignment, BipartiteInstance, Mode, assignment_from_json, assignment_to_json,
                       evaluate_loads, load_report_to_json, validate_instance)
from .rational import format_number, to_fraction
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram

MIN_LMAX = "MIN_LMAX"
MAX_LMIN = "MAX_LMIN"
MIN_SPREAD = "MIN_SPREAD"
EQUAL_FEAS = "EQUAL_FEAS"


@dataclass(frozen=True)
class SolveResult:
    status: str
    objective: str
    value: Optional[Fraction] = None
    assignment: Optional[Assignment] = None
    exact: bool = True

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _require_linear(inst: BipartiteInstance) -> None:
    if inst.mode != Mode.LINEAR_NONNEG:
        raise FairloadError("WRONG_MODE", "linear programs need a LINEAR_NONNEG instance")
    # an isolated task is an infeasibility, reported through the LP status
    bad = [v for v in validate_instance(inst).violations if v.code != "ISOLATED_TASK"]
    if bad:
        raise FairloadError("INVALID_INSTANCE", "; ".join(v.message for v in bad))


class _Model:
    """Edge variables plus the task equalities, shared by every objective."""

    def __init__(self, inst: BipartiteInstance):
        self.inst = inst
        self.lp = LinearProgram()
        self.col = {e: self.lp.add_var(f"x[{e[0]}:{e[1]}]") for e in inst.edges}
        tw = inst.task_weights
        for u in inst.tasks:
            self.lp.add_row({self.col[e]: tw[e] for e in inst.delta[u]}, "==", inst.demands[u])

    def load(self, w: str) -> Dict[int, Fraction]:
        ww = self.inst.worker_weights
        return {self.col[e]: ww[e] for e in self.inst.delta[w]}

    def bound_loads(self, t: int, sense: str) -> None:
        """``load_w <= t`` (sense "<=") or ``load_w >= t`` for every worker, written as ``* <= 0``."""
        for w in self.inst.workers:
            row = {k: (c if sense == "<=" else -c) for k, c in self.load(w).items()}
            row[t] = Fraction(-1 if sense == "<=" else 1)
            self.lp.add_row(row, "<=", 0)

    def finish(self, objective: str, value_of=None) -> SolveResult:
        sol = simplex.solve(self.lp)
        if sol.status != OPTIMAL:
            return SolveResult(sol.status, objective)
        x = Assignment({e: sol.values[self.col[e]] for e in self.inst.edges})
        value = sol.objective if value_of is None else value_of(sol.values)
        return SolveResult(OPTIMAL, objective, value, x)


def _all_zero(inst: BipartiteInstance) -> bool:
    return all(d == 0 for d in inst.demands.values())


def _zero_result(inst: BipartiteInstance, objective: str) -> SolveResult:
    return SolveResult(OPTIMAL, objective, Fraction(0), Assignment.zeros(inst))


def solve_min_lmax(inst: BipartiteInstance) -> SolveResult:
    """``min t`` subject to ``load_w <= t`` for all workers."""
    _require_linear(inst)
    if _all_zero(inst):
        return _zero_result(inst, MIN_LMAX)
    m = _Model(inst)
    t = m.lp.add_var("t", free=True)
    m.bound_loads(t, "<=")
    m.lp.set_objective({t: 1})
    return m.finish(MIN_LMAX)


def solve_max_lmin(inst: BipartiteInstance) -> SolveResult:
    """``max t`` subject to ``load_w >= t`` for all workers."""
    _require_linear(inst)
    if _all_zero(inst):
        return _zero_result(inst, MAX_LMIN)
    m = _Model(inst)
    t = m.lp.add_var("t", free=True)
    m.bound_loads(t, ">=")
    m.lp.set_objective({t: 1}, maximize=True)
    return m.finish(MAX_LMIN)


def _window(m: _Model) -> Tuple[int, int]:
    lo = m.lp.add_var("t_min", free=True)
    hi = m.lp.add_var("t_max", free=True)
    m.bound_loads(hi, "<=")
    m.bound_loads(lo, ">=")
    return lo, hi


def solve_min_spread(inst: BipartiteInstance) -> SolveResult:
    """``min t_max - t_min`` subject to ``t_min <= load_w <= t_max``.

    Ties are broken by a second LP that maximises the smallest load among the
    min-spread points, so the witness is the fairest of them (on an instance
    whose equal-load levels form an interval, the top of that interval).
    """
    _require_linear(inst)
    if _all_zero(inst):
        return _zero_result(inst, MIN_SPREAD)
    m = _Model(inst)
    lo, hi = _window(m)
    m.lp.set_objective({hi: 1, lo: -1})
    first = m.finish(MIN_SPREAD)
    if not first.optimal:
        return first
    m = _Model(inst)
    lo, hi = _window(m)
    m.lp.add_row({hi: 1, lo: -1}, "<=", first.value)
    m.lp.set_objective({lo: 1}, maximize=True)
    second = m.finish(MIN_SPREAD)
    return SolveResult(OPTIMAL, MIN_SPREAD, first.value, second.assignment)


def equal_load_feasible(inst: BipartiteInstance) -> SolveResult:
    """Is there a feasible point with every worker load equal?

    OPTIMAL (with the witness and its common load as ``value``) when yes,
    INFEASIBLE otherwise.
    """
    _require_linear(inst)
    if _all_zero(inst):
        return _zero_result(inst, EQUAL_FEAS)
    m = _Model(inst)
    lam = m.lp.add_var("lambda", free=True)
    for w in inst.workers:
        row = m.load(w)
        row[lam] = Fraction(-1)
        m.lp.add_row(row, "==", 0)
    m.lp.set_objective({})
    return m.finish(EQUAL_FEAS, value_of=lambda vals: vals[lam])


def _extreme_load_given_spread(inst: BipartiteInstance, w: str, spread_cap, maximize: bool) -> SolveResult:
    _require_linear(inst)
    if w not in inst.workers:
        raise FairloadError("KEY_MISMATCH", f"unknown worker {w!r}")
    cap = Fraction(spread_cap)
    tag = f"{'MAX' if maximize else 'MIN'}_LOAD_OF({w})"
    if _all_zero(inst):
        if cap < 0:
            return SolveResult(INFEASIBLE, tag)
        return _zero_result(inst, tag)
    m = _Model(inst)
    lo, hi = _window(m)
    m.lp.add_row({hi: 1, lo: -1}, "<=", cap)
    m.lp.set_objective(m.load(w), maximize=maximize)
    return m.finish(tag)


def max_load_of_worker_given_spread(inst: BipartiteInstance, w: str, spread_cap) -> SolveResult:
    """Largest load of ``w`` over feasible points whose loads fit a window of width ``spread_cap``."""
    return _extreme_load_given_spread(inst, w, spread_cap, maximize=True)


def min_load_of_worker_given_spread(inst: BipartiteInstance, w: str, spread_cap) -> SolveResult:
    """Smallest load of ``w`` over feasible points whose loads fit a window of width ``spread_cap``."""
    return _extreme_load_given_spread(inst, w, spread_cap, maximize=False)


def optimize_given_spread(inst: BipartiteInstance, spread_cap, costs, maximize: bool = False) -> SolveResult:
    """Optimise the linear objective ``sum costs[e] * x_e`` over feasible points whose
    loads fit a window of width ``spread_cap``. Used to sample vertices of that face."""
    _require_linear(inst)
    cap = Fraction(spread_cap)
    if _all_zero(inst):
        return SolveResult(INFEASIBLE, "FACE") if cap < 0 else _zero_result(inst, "FACE")
    m = _Model(inst)
    lo, hi = _window(m)
    m.lp.add_row({hi: 1, lo: -1}, "<=", cap)
    m.lp.set_objective({m.col[e]: to_fraction(c) for e, c in costs.items()}, maximize=maximize)
    return m.finish("FACE")


OBJECTIVES = {
    "min-max": solve_min_lmax,
    "max-min": solve_max_lmin,
    "min-spread": solve_min_spread,
    "equal-feas": equal_load_feasible,
}


def solve_result_to_json(res: SolveResult, inst: BipartiteInstance) -> dict:
    out = {"status": res.status, "objective": res.objective, "exact": res.exact,
           "value": None if res.value is None else format_number(res.value)}
    if res.assignment is not None:
        out["assignment"] = assignment_to_json(res.assignment, inst)
        out["loads"] = load_report_to_json(evaluate_loads(inst, res.assignment))
    return out


def solve_result_from_json(obj, inst: Optional[BipartiteInstance] = None) -> SolveResult:
    x = assignment_from_json(obj["assignment"], inst) if obj.get("assignment") else None
    value = None if obj.get("value") is None else to_fraction(obj["value"])
    return SolveResult(obj["status"], obj["objective"], value, x, bool(obj.get("exact", True)))


__all__ = [
    "SolveResult", "solve_min_lmax", "solve_max_lmin", "solve_min_spread", "equal_load_feasible",
    "max_load_of_worker_given_spread", "min_load_of_worker_given_spread", "optimize_given_spread",
    "OBJECTIVES",
    "OPTIMAL", "INFEASIBLE", "UNBOUNDED", "MIN_LMAX", "MAX_LMIN", "MIN_SPREAD", "EQUAL_FEAS",
]
