"""Bipartite task/worker instances, assignments and load evaluation."""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from . import expr as ex
from .errors import FairloadError
from .expr import Edge, LoadExpr, edge_key, parse_edge_key
from .rational import format_number, is_exact, parse_number, to_fraction


class Mode(str, enum.Enum):
    LINEAR_NONNEG = "LINEAR_NONNEG"  # positive-linear loads, x >= 0
    GENERAL_REAL = "GENERAL_REAL"  # increasing-bijection loads, x of any sign


class NumericKind(str, enum.Enum):
    RATIONAL = "RATIONAL"
    FLOAT = "FLOAT"


@dataclass(frozen=True)
class BipartiteInstance:
    tasks: Tuple[str, ...]
    demands: Mapping[str, Fraction]
    workers: Tuple[str, ...]
    edges: Tuple[Edge, ...]
    task_funcs: Mapping[str, LoadExpr]
    worker_funcs: Mapping[str, LoadExpr]
    mode: Mode = Mode.LINEAR_NONNEG

    @classmethod
    def linear(cls, tasks, demands, workers, edges, task_weights=None, worker_weights=None,
               mode: Mode = Mode.LINEAR_NONNEG) -> "BipartiteInstance":
        """Build an instance whose loads are weighted sums.

        ``task_weights`` / ``worker_weights`` map edges to coefficients (default 1).
        """
        edges = tuple((str(u), str(w)) for u, w in edges)
        tw = {e: to_fraction((task_weights or {}).get(e, 1)) for e in edges}
        ww = {e: to_fraction((worker_weights or {}).get(e, 1)) for e in edges}
        tasks = tuple(str(u) for u in tasks)
        workers = tuple(str(w) for w in workers)
        if not isinstance(demands, Mapping):
            demands = dict(zip(tasks, demands))
        task_funcs = {u: ex.linear({e: tw[e] for e in edges if e[0] == u}) for u in tasks
                      if any(e[0] == u for e in edges)}
        worker_funcs = {w: ex.linear({e: ww[e] for e in edges if e[1] == w}) for w in workers
                        if any(e[1] == w for e in edges)}
        return cls(tasks, {u: to_fraction(d) for u, d in demands.items()}, workers, edges,
                   task_funcs, worker_funcs, Mode(mode))

    @cached_property
    def delta(self) -> Dict[str, Tuple[Edge, ...]]:
        """Incident edges of every vertex, in edge order."""
        out: Dict[str, List[Edge]] = {v: [] for v in (*self.tasks, *self.workers)}
        for e in self.edges:
            if e[0] in out:
                out[e[0]].append(e)
            if e[1] in out:
                out[e[1]].append(e)
        return {v: tuple(es) for v, es in out.items()}

    @cached_property
    def edge_index(self) -> Dict[Edge, int]:
        return {e: i for i, e in enumerate(self.edges)}

    def neighbors(self, v: str) -> Tuple[str, ...]:
        return tuple(e[1] if e[0] == v else e[0] for e in self.delta[v])

    @cached_property
    def task_weights(self) -> Optional[Dict[Edge, Fraction]]:
        """Edge -> task-side coefficient when every task function is linear."""
        return self._side_weights(self.tasks, self.task_funcs)

    @cached_property
    def worker_weights(self) -> Optional[Dict[Edge, Fraction]]:
        return self._side_weights(self.workers, self.worker_funcs)

    def _side_weights(self, vertices, funcs):
        out: Dict[Edge, Fraction] = {}
        for v in vertices:
            if not self.delta[v]:
                continue
            f = funcs.get(v)
            w = ex.linear_weights(f) if f is not None else None
            if w is None:
                return None
            out.update(w)
        return out

    @cached_property
    def is_linear(self) -> bool:
        return self.task_weights is not None and self.worker_weights is not None

    def func(self, v: str) -> LoadExpr:
        f = self.task_funcs.get(v) if v in self.demands else self.worker_funcs.get(v)
        if f is None:
            raise FairloadError("KEY_MISMATCH", f"vertex {v!r} has no load function")
        return f

    def digest(self) -> str:
        payload = json.dumps(instance_to_json(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Assignment:
    values: Mapping[Edge, object]
    kind: NumericKind = NumericKind.RATIONAL

    @classmethod
    def from_vector(cls, inst: BipartiteInstance, vector: Sequence) -> "Assignment":
        if len(vector) != len(inst.edges):
            raise FairloadError("KEY_MISMATCH", f"{len(vector)} values for {len(inst.edges)} edges")
        return cls.of(dict(zip(inst.edges, vector)))

    @classmethod
    def of(cls, values: Mapping[Edge, object]) -> "Assignment":
        """Wrap ``values``, normalising ints to Fractions and picking the kind."""
        vals = {e: (Fraction(v) if isinstance(v, int) else v) for e, v in values.items()}
        exact = all(is_exact(v) for v in vals.values())
        return cls(vals, NumericKind.RATIONAL if exact else NumericKind.FLOAT)

    @classmethod
    def zeros(cls, inst: BipartiteInstance) -> "Assignment":
        return cls({e: Fraction(0) for e in inst.edges})

    def vector(self, inst: BipartiteInstance) -> tuple:
        return tuple(self.values[e] for e in inst.edges)

    def __getitem__(self, edge: Edge):
        return self.values[edge]


@dataclass(frozen=True)
class LoadReport:
    per_worker: Dict[str, object]
    lmax: object
    lmin: object
    spread: object
    wmax_set: FrozenSet[str]
    wmin_set: FrozenSet[str]
    umax_set: FrozenSet[str]


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def codes(self) -> List[str]:
        return [v.code for v in self.violations]


def validate_instance(inst: BipartiteInstance) -> ValidationReport:
    """Check every structural invariant; never raises, never mutates."""
    bad: List[Violation] = []

    def flag(code, msg):
        bad.append(Violation(code, msg))

    tasks, workers = set(inst.tasks), set(inst.workers)
    if len(tasks) != len(inst.tasks) or len(workers) != len(inst.workers):
        flag("DUPLICATE_VERTEX", "vertex ids repeat")
    if tasks & workers:
        flag("DUPLICATE_VERTEX", f"ids used on both sides: {sorted(tasks & workers)}")
    for v in (*inst.tasks, *inst.workers):
        if ":" in v or not v:
            flag("BAD_ID", f"vertex id {v!r} is empty or contains ':'")
    if len(set(inst.edges)) != len(inst.edges):
        flag("DUPLICATE_EDGE", "edge list has duplicates")
    for u, w in inst.edges:
        if u not in tasks or w not in workers:
            flag("UNKNOWN_VERTEX", f"edge {u}:{w} references an unknown vertex")
    for u in inst.tasks:
        if u not in inst.demands:
            flag("MISSING_DEMAND", f"task {u} has no demand")
    for u in inst.demands:
        if u not in tasks:
            flag("UNKNOWN_VERTEX", f"demand given for unknown task {u}")
    delta = inst.delta
    for u in inst.tasks:
        if not delta.get(u):
            flag("ISOLATED_TASK", f"task {u} has no incident edge")
    linear = inst.mode == Mode.LINEAR_NONNEG
    if linear:
        for u, d in inst.demands.items():
            if d < 0:
                flag("NEGATIVE_DEMAND", f"task {u} has demand {format_number(d)}")
    for side, vertices, funcs in (("task", inst.tasks, inst.task_funcs),
                                   ("worker", inst.workers, inst.worker_funcs)):
        for v in vertices:
            f = funcs.get(v)
            if f is None:
                if delta.get(v):
                    flag("MISSING_FUNC", f"{side} {v} has edges but no load function")
                continue
            for p in ex.check_expr(f):
                code = "NONPOSITIVE_WEIGHT" if "coefficient" in p else "NOT_INCREASING"
                flag(code, f"{side} {v}: {p}")
            if ex.edges_of(f) != set(delta.get(v, ())):
                flag("EXPR_EDGE_MISMATCH", f"{side} {v}: function edges differ from incident edges")
            if linear and ex.linear_weights(f) is None:
                flag("NONLINEAR", f"{side} {v}: LINEAR_NONNEG requires a positive-linear function")
    for v in set(inst.task_funcs) - tasks:
        flag("UNKNOWN_VERTEX", f"task function for unknown task {v}")
    for v in set(inst.worker_funcs) - workers:
        flag("UNKNOWN_VERTEX", f"worker function for unknown worker {v}")
    return ValidationReport(tuple(bad))


def require_valid(inst: BipartiteInstance, mode: Optional[Mode] = None) -> None:
    report = validate_instance(inst)
    if not report.ok:
        raise FairloadError("INVALID_INSTANCE", "; ".join(v.message for v in report.violations))
    if mode is not None and inst.mode != mode:
        raise FairloadError("WRONG_MODE", f"operation requires {mode.value}, instance is {inst.mode.value}")


def _check_keys(inst: BipartiteInstance, x: Assignment) -> None:
    if set(x.values) != set(inst.edges):
        raise FairloadError("KEY_MISMATCH", "assignment is not keyed on the instance edges")


def worker_load(inst: BipartiteInstance, x: Assignment, w: str):
    f = inst.worker_funcs.get(w)
    if f is None or not inst.delta[w]:
        return Fraction(0)
    return ex._eval(f, x.values)


def evaluate_loads(inst: BipartiteInstance, x: Assignment) -> LoadReport:
    _check_keys(inst, x)
    loads = {w: worker_load(inst, x, w) for w in inst.workers}
    if not loads:
        zero = Fraction(0)
        return LoadReport({}, zero, zero, zero, frozenset(), frozenset(), frozenset())
    lmax, lmin = max(loads.values()), min(loads.values())
    wmax = frozenset(w for w, v in loads.items() if v == lmax)
    wmin = frozenset(w for w, v in loads.items() if v == lmin)
    umax = frozenset(u for (u, w) in inst.edges if w in wmax and x.values[(u, w)] > 0)
    return LoadReport(loads, lmax, lmin, lmax - lmin, wmax, wmin, umax)


def task_residuals(inst: BipartiteInstance, x: Assignment) -> Dict[str, object]:
    """``f_u(x) - d_u`` for every task; isolated tasks give ``-d_u``."""
    out = {}
    for u in inst.tasks:
        f = inst.task_funcs.get(u)
        value = ex._eval(f, x.values) if f is not None and inst.delta[u] else Fraction(0)
        out[u] = value - inst.demands[u]
    return out


def check_membership(inst: BipartiteInstance, x: Assignment, tol=0) -> bool:
    """Whether ``x`` satisfies every task equation (and ``x >= 0`` in LINEAR_NONNEG) within ``tol``."""
    if tol == 0 and x.kind != NumericKind.RATIONAL:
        raise ValueError("tol = 0 requires rational values")
    if tol < 0:
        raise ValueError("tol must be non-negative")
    _check_keys(inst, x)
    if any(abs(r) > tol for r in task_residuals(inst, x).values()):
        return False
    if inst.mode == Mode.LINEAR_NONNEG and any(v < -tol for v in x.values.values()):
        return False
    return True


def is_connected(inst: BipartiteInstance) -> bool:
    vertices = (*inst.tasks, *inst.workers)
    if not vertices:
        return True
    seen = {vertices[0]}
    stack = [vertices[0]]
    while stack:
        v = stack.pop()
        for n in inst.neighbors(v):
            if n not in seen:
                seen.add(n)
                stack.append(n)
    return len(seen) == len(vertices)


# -- JSON ------------------------------------------------------------------

def _parse_rational(value, where: str) -> Fraction:
    try:
        return to_fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise FairloadError("PARSE_ERROR", f"{where}: {value!r} is not a rational") from exc


def instance_from_json(obj) -> BipartiteInstance:
    if not isinstance(obj, dict):
        raise FairloadError("PARSE_ERROR", "instance must be a JSON object")
    try:
        mode = Mode(obj.get("mode", "LINEAR_NONNEG"))
    except ValueError as exc:
        raise FairloadError("PARSE_ERROR", f"unknown mode {obj.get('mode')!r}") from exc
    try:
        tasks, demands = [], {}
        for t in obj["tasks"]:
            tid = str(t["id"])
            tasks.append(tid)
            demands[tid] = _parse_rational(t.get("demand", "0"), f"demand of {tid}")
        workers = [str(w) for w in obj["workers"]]
        edges, tw, ww = [], {}, {}
        for e in obj.get("edges", []):
            edge = (str(e["task"]), str(e["worker"]))
            edges.append(edge)
            tw[edge] = _parse_rational(e.get("weight_task", "1"), f"weight_task of {edge_key(edge)}")
            ww[edge] = _parse_rational(e.get("weight_worker", "1"), f"weight_worker of {edge_key(edge)}")
    except (KeyError, TypeError) as exc:
        raise FairloadError("PARSE_ERROR", f"malformed instance: missing or bad field {exc}") from exc
    base = BipartiteInstance.linear(tasks, demands, workers, edges, tw, ww, mode)
    task_funcs, worker_funcs = dict(base.task_funcs), dict(base.worker_funcs)
    for key, target in (("task_funcs", task_funcs), ("worker_funcs", worker_funcs)):
        given = obj.get(key) or {}
        if not isinstance(given, dict):
            raise FairloadError("PARSE_ERROR", f"'{key}' must map vertex ids to expressions")
        for v, e in given.items():
            target[str(v)] = ex.expr_from_json(e)
    return BipartiteInstance(base.tasks, base.demands, base.workers, base.edges,
                             task_funcs, worker_funcs, mode)


def instance_to_json(inst: BipartiteInstance) -> dict:
    """Linear vertex functions are written as edge weights, the rest as expressions."""
    def side(vertices, funcs):
        weights, custom = {}, {}
        for v in vertices:
            f = funcs.get(v)
            if f is None:
                continue
            w = ex.linear_weights(f)
            if w is not None and list(w) == list(inst.delta[v]) and f == ex.linear(w):
                weights.update(w)
            else:
                custom[v] = ex.expr_to_json(f)
        return weights, custom

    tw, tcustom = side(inst.tasks, inst.task_funcs)
    ww, wcustom = side(inst.workers, inst.worker_funcs)
    edges = []
    for e in inst.edges:
        item = {"task": e[0], "worker": e[1]}
        if e in tw and tw[e] != 1:
            item["weight_task"] = format_number(tw[e])
        if e in ww and ww[e] != 1:
            item["weight_worker"] = format_number(ww[e])
        edges.append(item)
    out = {
        "mode": inst.mode.value,
        "tasks": [{"id": u, "demand": format_number(inst.demands[u])} for u in inst.tasks],
        "workers": list(inst.workers),
        "edges": edges,
    }
    if tcustom:
        out["task_funcs"] = tcustom
    if wcustom:
        out["worker_funcs"] = wcustom
    return out


def assignment_to_json(x: Assignment, inst: Optional[BipartiteInstance] = None) -> dict:
    order = inst.edges if inst is not None else list(x.values)
    return {"kind": x.kind.value, "values": {edge_key(e): format_number(x.values[e]) for e in order}}


def assignment_from_json(obj, inst: Optional[BipartiteInstance] = None) -> Assignment:
    if not isinstance(obj, dict) or not isinstance(obj.get("values"), dict):
        raise FairloadError("PARSE_ERROR", "assignment must be an object with a 'values' map")
    values = {}
    for k, v in obj["values"].items():
        try:
            values[parse_edge_key(k)] = parse_number(v)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise FairloadError("PARSE_ERROR", f"value of {k}: {exc}") from exc
    kind = obj.get("kind")
    if kind == NumericKind.FLOAT.value:
        values = {e: float(v) for e, v in values.items()}
    x = Assignment.of(values)
    if inst is not None:
        _check_keys(inst, x)
        x = Assignment({e: x.values[e] for e in inst.edges}, x.kind)
    return x


def load_report_to_json(rep: LoadReport) -> dict:
    return {
        "per_worker": {w: format_number(v) for w, v in rep.per_worker.items()},
        "lmax": format_number(rep.lmax),
        "lmin": format_number(rep.lmin),
        "spread": format_number(rep.spread),
        "wmax": sorted(rep.wmax_set),
        "wmin": sorted(rep.wmin_set),
        "umax": sorted(rep.umax_set),
    }


def load_report_from_json(obj) -> LoadReport:
    return LoadReport({w: parse_number(v) for w, v in obj["per_worker"].items()},
                      parse_number(obj["lmax"]), parse_number(obj["lmin"]), parse_number(obj["spread"]),
                      frozenset(obj["wmax"]), frozenset(obj["wmin"]), frozenset(obj["umax"]))
