"""Brute-force study of the integer points of the weighted feasible set.

Each task's demand is split over its edges in every possible way
(weighted compositions); tasks are nested in task order and each task's
splits come out lexicographically in edge order. Counting uses the
coin-change recurrence so an oversized enumeration is refused up front.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .errors import FairloadError
from .instance import BipartiteInstance, Mode, require_valid

DEFAULT_CAP = 10 ** 7
ARGMIN_LIMIT = 1000


def weighted_compositions(demand: int, weights: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    """All non-negative integer ``x`` with ``sum(w * x) == demand``, lexicographically."""
    k = len(weights)
    if k == 0:
        if demand == 0:
            yield ()
        return
    x = [0] * k

    def rec(i, rest):
        if i == k - 1:
            if rest % weights[i] == 0:
                x[i] = rest // weights[i]
                yield tuple(x)
            return
        for v in range(rest // weights[i] + 1):
            x[i] = v
            yield from rec(i + 1, rest - v * weights[i])

    yield from rec(0, demand)


def count_compositions(demand: int, weights: Sequence[int]) -> int:
    ways = [1] + [0] * demand
    for w in weights:
        for s in range(w, demand + 1):
            ways[s] += ways[s - w]
    return ways[demand] if weights else int(demand == 0)


@dataclass(frozen=True)
class _Plan:
    tasks: Tuple[str, ...]
    demands: Tuple[int, ...]
    task_edges: Tuple[Tuple[int, ...], ...]  # indices into inst.edges
    task_weights: Tuple[Tuple[int, ...], ...]
    worker_of: Tuple[int, ...]  # edge index -> worker index
    worker_coeff: Tuple[object, ...]
    n_workers: int


def _plan(inst: BipartiteInstance) -> _Plan:
    if inst.mode != Mode.LINEAR_NONNEG:
        raise FairloadError("WRONG_MODE", "integer enumeration needs a LINEAR_NONNEG instance")
    require_valid(inst)
    tw, ww = inst.task_weights, inst.worker_weights
    demands = []
    for u in inst.tasks:
        d = inst.demands[u]
        if d.denominator != 1:
            raise FairloadError("NON_INTEGER_DATA", f"demand of {u} is not an integer")
        demands.append(int(d))
    for e in inst.edges:
        if tw[e].denominator != 1:
            raise FairloadError("NON_INTEGER_DATA", f"task weight on {e} is not an integer")
    idx = inst.edge_index
    windex = {w: i for i, w in enumerate(inst.workers)}
    coeffs = tuple(int(ww[e]) if ww[e].denominator == 1 else ww[e] for e in inst.edges)
    return _Plan(
        inst.tasks, tuple(demands),
        tuple(tuple(idx[e] for e in inst.delta[u]) for u in inst.tasks),
        tuple(tuple(int(tw[e]) for e in inst.delta[u]) for u in inst.tasks),
        tuple(windex[e[1]] for e in inst.edges), coeffs, len(inst.workers),
    )


def predicted_count(inst: BipartiteInstance) -> int:
    plan = _plan(inst)
    total = 1
    for d, ws in zip(plan.demands, plan.task_weights):
        total *= count_compositions(d, ws)
    return total


def _walk(plan: _Plan, n_edges: int, prune_above=None):
    """Yield ``(x, loads)`` pairs; with ``prune_above`` (a one-element list holding
    a bound, updated by the caller) partial points whose loads already exceed the
    bound are abandoned."""
    x = [0] * n_edges
    loads = [0] * plan.n_workers
    per_task = [list(weighted_compositions(d, ws)) for d, ws in zip(plan.demands, plan.task_weights)]
    n_tasks = len(plan.tasks)

    def rec(t):
        if t == n_tasks:
            yield tuple(x), tuple(loads)
            return
        edges = plan.task_edges[t]
        for comp in per_task[t]:
            touched = []
            for i, v in zip(edges, comp):
                x[i] = v
                if v:
                    w = plan.worker_of[i]
                    loads[w] += plan.worker_coeff[i] * v
                    touched.append((w, plan.worker_coeff[i] * v))
            if prune_above is None or all(loads[w] <= prune_above[0] for w, _ in touched):
                yield from rec(t + 1)
            for w, add in touched:
                loads[w] -= add
            for i in edges:
                x[i] = 0

    yield from rec(0)


@dataclass
class IntegralSummary:
    count: int
    min_lmax: object
    max_lmin: object
    min_spread: object
    min_spread_witness: Optional[Tuple[int, ...]]
    pareto: List[Tuple[object, object]]


class IntegralSolutionSet:
    """Lazily enumerated integer points of the feasible set."""

    def __init__(self, inst: BipartiteInstance, cap: int = DEFAULT_CAP):
        self.instance = inst
        self._plan = _plan(inst)
        self.predicted = predicted_count(inst)
        if self.predicted > cap:
            raise FairloadError("TOO_LARGE", f"{self.predicted} integer points exceed the cap {cap}")

    def __iter__(self) -> Iterator[Tuple[int, ...]]:
        for x, _ in _walk(self._plan, len(self.instance.edges)):
            yield x

    def with_loads(self) -> Iterator[Tuple[Tuple[int, ...], Tuple[object, ...]]]:
        yield from _walk(self._plan, len(self.instance.edges))

    def summary(self) -> IntegralSummary:
        count = 0
        best_max = best_min = best_spread = witness = None
        pairs = set()
        for x, loads in self.with_loads():
            count += 1
            hi, lo = (max(loads), min(loads)) if loads else (0, 0)
            if best_max is None or hi < best_max:
                best_max = hi
            if best_min is None or lo > best_min:
                best_min = lo
            if best_spread is None or hi - lo < best_spread:
                best_spread, witness = hi - lo, x
            pairs.add((hi, lo))
        return IntegralSummary(count, best_max, best_min, best_spread, witness, pareto_front(pairs))


def enumerate_integral(inst: BipartiteInstance, cap: int = DEFAULT_CAP) -> IntegralSolutionSet:
    return IntegralSolutionSet(inst, cap)


def pareto_front(pairs) -> List[Tuple[object, object]]:
    """Non-dominated ``(lmax, lmin)`` pairs for minimising lmax and maximising lmin,
    sorted by lmax."""
    front = []
    best_lo = None
    for hi, lo in sorted(set(pairs), key=lambda p: (p[0], -p[1])):
        if best_lo is None or lo > best_lo:
            front.append((hi, lo))
            best_lo = lo
    return front


@dataclass
class IntegralOptimum:
    value: object
    argmin: Optional[List[Tuple[int, ...]]]  # None when more than ARGMIN_LIMIT points tie
    argmin_count: int
    min_spread_among_argmin: object


def integral_min_lmax(inst: BipartiteInstance, cap: int = DEFAULT_CAP) -> IntegralOptimum:
    """Exact minimum of the largest load over integer points, with all minimisers."""
    sols = IntegralSolutionSet(inst, cap)
    bound = [float("inf")]
    best = None
    argmin: List[Tuple[int, ...]] = []
    count = 0
    spread = None
    for x, loads in _walk(sols._plan, len(inst.edges), prune_above=bound):
        hi = max(loads) if loads else 0
        lo = min(loads) if loads else 0
        if best is None or hi < best:
            best, argmin, count, spread = hi, [], 0, None
            bound[0] = hi
        if hi == best:
            count += 1
            if len(argmin) <= ARGMIN_LIMIT:
                argmin.append(x)
            if spread is None or hi - lo < spread:
                spread = hi - lo
    return IntegralOptimum(best, argmin if count <= ARGMIN_LIMIT else None, count, spread)


def integral_min_spread(inst: BipartiteInstance, cap: int = DEFAULT_CAP):
    """``(value, witness)``: smallest load spread over integer points and the first point attaining it."""
    s = IntegralSolutionSet(inst, cap).summary()
    return s.min_spread, s.min_spread_witness


def integral_pareto(inst: BipartiteInstance, cap: int = DEFAULT_CAP) -> List[Tuple[object, object]]:
    return IntegralSolutionSet(inst, cap).summary().pareto
