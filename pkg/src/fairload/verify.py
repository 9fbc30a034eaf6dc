"""Mechanical certification of the min-spread / min-max / max-min results.

Every check produces a ``TheoremReport`` listing the (in)equalities that were
tested, whether each was tested exactly or within a tolerance, and a verdict.
A VIOLATED report carries a witness (the instance and the relevant points)
so that it can be re-checked independently.
"""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

from . import lp
from .errors import FairloadError
from .expr import peak_magnitude
from .generate import GenParams, gen_random_instance, random_start
from .instance import (Assignment, BipartiteInstance, Mode, NumericKind, assignment_to_json,
                       check_membership, evaluate_loads, instance_to_json, require_valid,
                       task_residuals)
from .rational import format_number, to_fraction
from .rng import SplitMix64
from .tree import equalize_connected

GENERAL_TOL = 1e-9


class Verdict(str, enum.Enum):
    CONFIRMED = "CONFIRMED"
    HYPOTHESIS_VOID = "HYPOTHESIS_VOID"
    VIOLATED = "VIOLATED"


@dataclass(frozen=True)
class Check:
    name: str
    lhs: object
    relation: str  # "==", "<", "<=", ">=", ">"
    rhs: object
    exact: bool = True
    tol: float = 0.0

    @property
    def holds(self) -> bool:
        a, b, t = self.lhs, self.rhs, (0 if self.exact else self.tol)
        if self.relation == "==":
            return abs(a - b) <= t
        if self.relation == "<":
            return a + t < b
        if self.relation == "<=":
            return a <= b + t
        if self.relation == ">":
            return a > b + t
        if self.relation == ">=":
            return a + t >= b
        raise ValueError(f"unknown relation {self.relation!r}")

    def to_json(self) -> dict:
        return {"name": self.name, "lhs": format_number(self.lhs), "relation": self.relation,
                "rhs": format_number(self.rhs), "exact": self.exact, "tol": self.tol,
                "holds": self.holds}

    @classmethod
    def from_json(cls, obj: dict) -> "Check":
        def num(v):
            return to_fraction(v) if obj["exact"] else float(v)
        return cls(obj["name"], num(obj["lhs"]), obj["relation"], num(obj["rhs"]), obj["exact"],
                   float(obj["tol"]))


@dataclass
class TheoremReport:
    theorem: str
    digest: str
    hypothesis: str
    checks: List[Check] = field(default_factory=list)
    verdict: Verdict = Verdict.CONFIRMED
    seed: Optional[int] = None
    witness: Optional[dict] = None

    def to_json(self) -> dict:
        out = {"theorem": self.theorem, "seed": self.seed, "digest": self.digest,
               "hypothesis": self.hypothesis, "verdict": self.verdict.value,
               "checks": [c.to_json() for c in self.checks]}
        if self.witness is not None:
            out["witness"] = self.witness
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "TheoremReport":
        return cls(obj["theorem"], obj["digest"], obj["hypothesis"],
                   [Check.from_json(c) for c in obj["checks"]], Verdict(obj["verdict"]),
                   obj.get("seed"), obj.get("witness"))


def _close(report: TheoremReport, witness: Callable[[], dict]) -> TheoremReport:
    if any(not c.holds for c in report.checks):
        report.verdict = Verdict.VIOLATED
        report.witness = witness()
    return report


def _face_checks(inst: BipartiteInstance, trials: int, seed: int) -> List[Check]:
    """Shared core of the linear checks.

    With ``s`` the least spread, the largest load any worker reaches inside
    the spread-``s`` face must be the least possible maximum load, and the
    smallest load must be the greatest possible minimum load. ``trials``
    further vertices of the face, picked by random edge costs, are checked
    pointwise.
    """
    spread = lp.solve_min_spread(inst).value
    lmax = lp.solve_min_lmax(inst).value
    lmin = lp.solve_max_lmin(inst).value
    top = max((lp.max_load_of_worker_given_spread(inst, w, spread).value for w in inst.workers),
              default=Fraction(0))
    bottom = min((lp.min_load_of_worker_given_spread(inst, w, spread).value for w in inst.workers),
                 default=Fraction(0))
    checks = [
        Check("max load over min-spread set == min lmax", top, "==", lmax),
        Check("min load over min-spread set == max lmin", bottom, "==", lmin),
    ]
    rng = SplitMix64(seed)
    for k in range(trials):
        costs = {e: Fraction(rng.randint(-5, 5)) for e in inst.edges}
        face = lp.optimize_given_spread(inst, spread, costs)
        rep = evaluate_loads(inst, face.assignment)
        checks.append(Check(f"face vertex {k}: lmax == min lmax", rep.lmax, "==", lmax))
        checks.append(Check(f"face vertex {k}: lmin == max lmin", rep.lmin, "==", lmin))
    return checks


def _linear_witness(inst: BipartiteInstance) -> Callable[[], dict]:
    def build():
        res = lp.solve_min_spread(inst)
        return {"instance": instance_to_json(inst),
                "min_spread_point": assignment_to_json(res.assignment, inst)}
    return build


def check_theorem1(inst: BipartiteInstance, trials: int = 2, seed: int = 0) -> TheoremReport:
    """Min spread implies min lmax and max lmin, when no equal-load point exists."""
    require_valid(inst, Mode.LINEAR_NONNEG)
    report = TheoremReport("thm1", inst.digest(), "", seed=seed)
    if lp.solve_min_lmax(inst).status != lp.OPTIMAL:
        report.hypothesis = "feasible set is empty"
        report.verdict = Verdict.HYPOTHESIS_VOID
        return report
    eq = lp.equal_load_feasible(inst)
    if eq.optimal:
        report.hypothesis = f"equal loads feasible at {format_number(eq.value)}"
        report.verdict = Verdict.HYPOTHESIS_VOID
        return report
    report.hypothesis = "equal loads infeasible"
    report.checks = _face_checks(inst, trials, seed)
    spread = lp.solve_min_spread(inst).value
    report.checks.append(Check("min spread > 0", spread, ">", Fraction(0)))
    return _close(report, _linear_witness(inst))


def _all_one(inst: BipartiteInstance) -> bool:
    tw, ww = inst.task_weights, inst.worker_weights
    return tw is not None and all(tw[e] == 1 and ww[e] == 1 for e in inst.edges)


def check_prop1(inst: BipartiteInstance, trials: int = 2, seed: int = 0) -> TheoremReport:
    """Unit-weight version: no hypothesis, plus load conservation on every solver output."""
    require_valid(inst, Mode.LINEAR_NONNEG)
    if not _all_one(inst):
        raise FairloadError("WRONG_MODE", "the unit-weight check needs every weight equal to 1")
    report = TheoremReport("prop1", inst.digest(), "", seed=seed)
    results = [lp.solve_min_lmax(inst), lp.solve_max_lmin(inst), lp.solve_min_spread(inst)]
    if any(not r.optimal for r in results):
        report.hypothesis = "feasible set is empty"
        report.verdict = Verdict.HYPOTHESIS_VOID
        return report
    total = sum(inst.demands.values(), Fraction(0))
    eq = lp.equal_load_feasible(inst)
    report.hypothesis = "equal loads feasible" if eq.optimal else "equal loads infeasible"
    report.checks = _face_checks(inst, trials, seed)
    for r in results + ([eq] if eq.optimal else []):
        loads = evaluate_loads(inst, r.assignment).per_worker.values()
        report.checks.append(Check(f"{r.objective}: total load == total demand",
                                   sum(loads, Fraction(0)), "==", total))
    if eq.optimal and inst.workers:
        report.checks.append(Check("common load == total demand / |W|", eq.value, "==",
                                   total / len(inst.workers)))
    return _close(report, _linear_witness(inst))


def check_theorem2(inst: BipartiteInstance, x0: Assignment, tol: float = GENERAL_TOL,
                   seed: Optional[int] = None, method: str = "brent") -> TheoremReport:
    """Equalize from ``x0`` and check the strict sandwich and membership of the result."""
    require_valid(inst, Mode.GENERAL_REAL)
    report = TheoremReport("thm2", inst.digest(), "", seed=seed)
    before = evaluate_loads(inst, x0)
    gap = before.spread if x0.kind == NumericKind.RATIONAL else float(before.spread)
    if gap <= (0 if x0.kind == NumericKind.RATIONAL else tol):
        report.hypothesis = "start point already has equal loads"
        report.verdict = Verdict.HYPOTHESIS_VOID
        return report
    report.hypothesis = "start point has unequal loads"
    out = equalize_connected(inst, x0, tol=tol, method=method)
    after = evaluate_loads(inst, out.x)
    lam = float(out.lam)
    # a demand can only be met to rounding error of the largest term computed
    # on the way, so residuals are measured relative to that magnitude
    res = task_residuals(inst, out.x)
    worst = max((abs(float(r)) / max(1.0, peak_magnitude(inst.task_funcs[u], out.x.values))
                 for u, r in res.items() if u in inst.task_funcs), default=0.0)
    report.checks = [
        Check("equalized lmax - lmin", float(after.spread), "<=", 0.0, exact=False, tol=tol),
        Check("lmin(x0) < common load", float(before.lmin), "<", lam, exact=False, tol=tol),
        Check("common load < lmax(x0)", lam, "<", float(before.lmax), exact=False, tol=tol),
        Check("largest scaled demand residual", worst, "<=", 0.0, exact=False, tol=tol),
    ]

    def witness():
        return {"instance": instance_to_json(inst), "x0": assignment_to_json(x0, inst),
                "x": assignment_to_json(out.x, inst), "tree": [f"{u}:{w}" for u, w in out.tree_edges]}

    return _close(report, witness)


def _exact_point(inst: BipartiteInstance, x: Assignment) -> Assignment:
    try:
        exact = Assignment({e: to_fraction(v) for e, v in x.values.items()})
    except (TypeError, ValueError, OverflowError) as exc:
        raise FairloadError("NOT_IN_XA", f"point has non-finite entries: {exc}") from exc
    if set(exact.values) != set(inst.edges) or not check_membership(inst, exact):
        raise FairloadError("NOT_IN_XA", "point is not in the weighted non-negative feasible set")
    return exact


def improvement_step(inst: BipartiteInstance, x: Assignment) -> Optional[Assignment]:
    """One local move towards a point where the top tasks only reach top workers.

    Picks the first top task ``u'`` (in task order) with a neighbour ``w'``
    below the top, the first such ``w'``, and the first top worker ``w''``
    receiving flow from ``u'``. Flow is moved from ``u'w''`` to ``u'w'`` by the
    largest amount that keeps ``x`` non-negative, keeps ``w''`` at or above the
    minimum and keeps ``w'`` at most halfway to the maximum. The halving makes
    the improvement strict: ``w'`` cannot become a new top worker. When
    ``w''`` is the only top worker both moves are further held to a third of
    its lead over the runner-up, so it stays the only one and the top set
    never grows. Returns None when no move applies.
    """
    require_valid(inst, Mode.LINEAR_NONNEG)
    x = _exact_point(inst, x)
    if all(d == 0 for d in inst.demands.values()):
        return None
    rep = evaluate_loads(inst, x)
    top = rep.wmax_set
    if {w for u in rep.umax_set for w in inst.neighbors(u)} == set(top):
        return None
    tw, ww = inst.task_weights, inst.worker_weights
    for u in inst.tasks:
        if u not in rep.umax_set:
            continue
        low = [e for e in inst.delta[u] if e[1] not in top]
        high = [e for e in inst.delta[u] if e[1] in top and x[e] > 0]
        if low and high:
            up, down = low[0], high[0]
            break
    else:  # unreachable for valid input: a top worker with load > 0 is fed by a top task
        return None
    # moving delta off `down` frees tw[down] * delta demand, carried by `up`
    ratio = tw[down] / tw[up]
    alpha = ww[down]
    kappa = ww[up] * ratio
    delta = min(x[down],
                (rep.per_worker[down[1]] - rep.lmin) / alpha,
                (rep.lmax - rep.per_worker[up[1]]) / (2 * kappa))
    if len(top) == 1:
        # lone top worker: lmax falls, so keep w'' strictly above everyone else
        # by moving each side at most a third of the gap to the runner-up
        gap = rep.lmax - max(v for w, v in rep.per_worker.items() if w not in top)
        delta = min(delta, gap / (3 * alpha), gap / (3 * kappa))
    values = dict(x.values)
    values[down] -= delta
    values[up] += delta * ratio
    return Assignment(values)


def step_checks(inst: BipartiteInstance, x: Assignment, x2: Assignment) -> List[Check]:
    """Exact comparisons between a point and its improvement step."""
    a, b = evaluate_loads(inst, x), evaluate_loads(inst, x2)
    changed = sum(1 for e in inst.edges if x[e] != x2[e])
    strict = int(len(b.wmax_set) < len(a.wmax_set)) + int(b.lmax < a.lmax) + int(b.lmin > a.lmin)
    return [
        Check("top-worker count not increased", len(b.wmax_set), "<=", len(a.wmax_set)),
        Check("lmax not increased", b.lmax, "<=", a.lmax),
        Check("lmin not decreased", b.lmin, ">=", a.lmin),
        Check("strict improvements", strict, ">=", 1),
        Check("edges changed", changed, "==", 2),
        Check("in feasible set", int(check_membership(inst, x2)), "==", 1),
    ]


def interpolate_umax(inst: BipartiteInstance, xbar: Assignment, ystar: Assignment, t) -> Assignment:
    """Blend ``ystar`` into ``xbar`` on the edges of the top tasks of ``xbar``:
    ``t * ystar + (1 - t) * xbar`` there and ``xbar`` elsewhere."""
    require_valid(inst, Mode.LINEAR_NONNEG)
    xbar, ystar = _exact_point(inst, xbar), _exact_point(inst, ystar)
    t = to_fraction(t)
    if not 0 <= t <= 1:
        raise ValueError(f"t = {t} outside [0, 1]")
    top = evaluate_loads(inst, xbar).umax_set
    return Assignment({e: (t * ystar[e] + (1 - t) * xbar[e]) if e[0] in top else xbar[e]
                       for e in inst.edges})


# --- seeded suites -----------------------------------------------------------

SUITE_PARAMS = {
    "thm1": GenParams(tasks=(1, 6), workers=(1, 6), density=0.4, max_edges=12, demands=(0, 10),
                      weights=(1, 5), weight_den=3),
    "prop1": GenParams(tasks=(1, 6), workers=(1, 6), density=0.4, max_edges=12, demands=(0, 10),
                       all_one=True),
    "thm2": GenParams(tasks=(1, 6), workers=(2, 6), density=0.4, max_edges=12, demands=(-5, 5),
                      mode=Mode.GENERAL_REAL, depth=3),
}


def suite_instance(theorem: str, seed: int, base: Optional[GenParams] = None) -> BipartiteInstance:
    if theorem not in SUITE_PARAMS:
        raise ValueError(f"unknown theorem {theorem!r}")
    p = base or SUITE_PARAMS[theorem]
    return gen_random_instance(GenParams(**{**p.__dict__, "seed": seed}))


def run_seed(theorem: str, seed: int, trials: int = 2, tol: float = GENERAL_TOL) -> TheoremReport:
    inst = suite_instance(theorem, seed)
    if theorem == "thm1":
        return check_theorem1(inst, trials, seed)
    if theorem == "prop1":
        return check_prop1(inst, trials, seed)
    try:
        x0 = random_start(inst, seed)
    except FairloadError as exc:
        if exc.code != "NO_START":
            raise
        return TheoremReport("thm2", inst.digest(), "no well-scaled start point exists",
                             verdict=Verdict.HYPOTHESIS_VOID, seed=seed)
    return check_theorem2(inst, x0, tol, seed)


def _run_one(args):
    return run_seed(*args)


def run_suite(theorem: str, seeds: Sequence[int], trials: int = 2, tol: float = GENERAL_TOL,
              jobs: int = 1) -> List[TheoremReport]:
    """Reports for each seed, in seed order whatever the number of processes."""
    work = [(theorem, s, trials, tol) for s in seeds]
    if jobs <= 1:
        return [_run_one(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, work, chunksize=8))


def summarize(reports: Sequence[TheoremReport]) -> Dict[str, int]:
    counts = {v.value: 0 for v in Verdict}
    for r in reports:
        counts[r.verdict.value] += 1
    return counts


__all__ = [
    "Verdict", "Check", "TheoremReport", "check_theorem1", "check_prop1", "check_theorem2",
    "improvement_step", "step_checks", "interpolate_umax", "run_seed", "run_suite", "summarize",
    "suite_instance", "SUITE_PARAMS", "GENERAL_TOL",
]
