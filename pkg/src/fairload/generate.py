"""Seeded random instances, load functions and feasible points."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import expr as ex
from .errors import FairloadError
from .expr import Edge, LoadExpr
from .instance import Assignment, BipartiteInstance, Mode, evaluate_loads, task_residuals
from .rng import SplitMix64
from .tree import fix_loads, rooted_view

# salts separating the streams drawn from one seed
START_SALT = 0x632BE59BD9B4E019
POINT_SALT = 0x8CB92BA72F3D8DD7
START_BOUND = 1e3

Range = Tuple[int, int]


def _as_range(v) -> Range:
    if isinstance(v, int):
        return (v, v)
    lo, hi = v
    return (int(lo), int(hi))


@dataclass(frozen=True)
class GenParams:
    tasks: Range = (1, 4)
    workers: Range = (1, 4)
    density: float = 0.5
    max_edges: Optional[int] = None
    demands: Range = (0, 10)
    weights: Range = (1, 5)
    weight_den: int = 1  # weights are k / q with q drawn from 1..weight_den
    all_one: bool = False
    mode: Mode = Mode.LINEAR_NONNEG
    depth: int = 0  # nesting depth of random load functions (GENERAL_REAL)
    seed: int = 1

    def __post_init__(self):
        object.__setattr__(self, "tasks", _as_range(self.tasks))
        object.__setattr__(self, "workers", _as_range(self.workers))
        object.__setattr__(self, "demands", _as_range(self.demands))
        object.__setattr__(self, "weights", _as_range(self.weights))
        object.__setattr__(self, "mode", Mode(self.mode))

    def check(self) -> None:
        problems = []
        if self.tasks[0] < 0 or self.tasks[0] > self.tasks[1]:
            problems.append(f"bad task range {self.tasks}")
        if self.workers[0] < 0 or self.workers[0] > self.workers[1]:
            problems.append(f"bad worker range {self.workers}")
        if self.tasks[0] > 0 and self.workers[1] == 0:
            problems.append("tasks need at least one worker")
        if not 0 <= self.density <= 1:
            problems.append(f"density {self.density} outside [0, 1]")
        if self.weights[0] <= 0 or self.weights[0] > self.weights[1]:
            problems.append(f"weights must be a positive range, got {self.weights}")
        if self.weight_den < 1:
            problems.append("weight_den must be >= 1")
        if self.demands[0] > self.demands[1]:
            problems.append(f"bad demand range {self.demands}")
        if self.mode == Mode.LINEAR_NONNEG and self.demands[0] < 0:
            problems.append("LINEAR_NONNEG demands must be non-negative")
        if self.max_edges is not None and self.max_edges < self.tasks[0]:
            problems.append(f"max_edges {self.max_edges} cannot cover {self.tasks[0]} tasks")
        if self.depth < 0:
            problems.append("depth must be >= 0")
        if problems:
            raise FairloadError("UNSATISFIABLE_PARAMS", "; ".join(problems))

    def to_json(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        for k in ("tasks", "workers", "demands", "weights"):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "GenParams":
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise FairloadError("PARSE_ERROR", f"unknown generator parameters {sorted(unknown)}")
        return cls(**obj)


def _weight(rng: SplitMix64, p: GenParams) -> Fraction:
    if p.all_one:
        return Fraction(1)
    q = rng.randint(1, p.weight_den)
    return Fraction(rng.randint(p.weights[0] * q, p.weights[1] * q), q)


def random_expr(rng: SplitMix64, edges: Sequence[Edge], depth: int) -> LoadExpr:
    """A random componentwise-increasing bijection over ``edges``.

    ``Max`` children each cover all of ``edges``; ``Sum`` may split them.
    Coefficients lie in [1/4, 2], shifts in [-2, 2], exponents are 3 or 5.
    A power is never applied directly to another power, which keeps the
    functions from getting too steep for double precision.
    """
    return _random_expr(rng, list(edges), depth, True)


def _random_expr(rng: SplitMix64, edges: List[Edge], depth: int, pow_ok: bool) -> LoadExpr:
    if depth <= 0:
        return ex.linear({e: Fraction(rng.randint(1, 8), 4) for e in edges})
    ops = ("sum", "max", "oddpow", "shift", "linear") if pow_ok else ("sum", "max", "shift", "linear")
    op = rng.choice(ops)
    sub = lambda es, ok=True: _random_expr(rng, es, depth - 1, ok)
    if op == "linear":
        return _random_expr(rng, edges, 0, pow_ok)
    if op == "sum":
        if len(edges) > 1 and rng.random() < 0.7:
            pool = list(edges)
            rng.shuffle(pool)
            cut = rng.randint(1, len(pool) - 1)
            groups = [pool[:cut], pool[cut:]]
        else:
            groups = [edges, edges]
        return ex.Sum(tuple(sub(sorted(g, key=edges.index)) for g in groups))
    if op == "max":
        return ex.Max((sub(edges), sub(edges)))
    if op == "oddpow":
        return ex.OddPow(sub(edges, False), rng.choice((3, 5)))
    return ex.Shift(sub(edges, pow_ok), Fraction(rng.randint(-4, 4), 2))


def _components(vertices: Sequence[str], edges: Sequence[Edge]) -> List[List[str]]:
    parent = {v: v for v in vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for u, w in edges:
        parent[find(u)] = find(w)
    groups: Dict[str, List[str]] = {}
    for v in vertices:
        groups.setdefault(find(v), []).append(v)
    return list(groups.values())


def gen_random_instance(p: GenParams) -> BipartiteInstance:
    """Deterministic function of ``p`` (including its seed)."""
    p.check()
    return _generate(p, SplitMix64(p.seed))


def _generate(p: GenParams, rng: SplitMix64) -> BipartiteInstance:
    n_u = rng.randint(*p.tasks)
    n_w = rng.randint(*p.workers)
    tasks = [f"u{i + 1}" for i in range(n_u)]
    workers = [f"w{j + 1}" for j in range(n_w)]
    general = p.mode == Mode.GENERAL_REAL
    if general and n_u == 0 and n_w > 1:
        raise FairloadError("UNSATISFIABLE_PARAMS", "workers cannot be connected without tasks")
    edges = {(u, w) for u in tasks for w in workers if rng.random() < p.density}
    for u in tasks:
        if not any(e[0] == u for e in edges):
            edges.add((u, rng.choice(workers)))
    if general:
        comps = _components(tasks + workers, sorted(edges))
        main = next((c for c in comps if tasks and tasks[0] in c), comps[0])
        for comp in comps:
            if comp is main:
                continue
            comp_tasks = [v for v in comp if v in tasks]
            if comp_tasks:
                edges.add((rng.choice(comp_tasks), rng.choice([v for v in main if v in workers])))
            else:
                edges.add((rng.choice([v for v in main if v in tasks]), comp[0]))
    if p.max_edges is not None and len(edges) > p.max_edges:
        edges = _trim(rng, tasks, workers, edges, p.max_edges, general)
    order = {v: i for i, v in enumerate(tasks + workers)}
    edge_list = sorted(edges, key=lambda e: (order[e[0]], order[e[1]]))
    demands = {u: Fraction(rng.randint(*p.demands)) for u in tasks}
    if not general:
        tw = {e: _weight(rng, p) for e in edge_list}
        ww = {e: _weight(rng, p) for e in edge_list}
        return BipartiteInstance.linear(tasks, demands, workers, edge_list, tw, ww, p.mode)
    delta = {v: [e for e in edge_list if v in e] for v in tasks + workers}
    task_funcs = {u: random_expr(rng, delta[u], p.depth) for u in tasks if delta[u]}
    worker_funcs = {w: random_expr(rng, delta[w], p.depth) for w in workers if delta[w]}
    return BipartiteInstance(tuple(tasks), demands, tuple(workers), tuple(edge_list),
                             task_funcs, worker_funcs, p.mode)


def _trim(rng, tasks, workers, edges, cap, connected):
    pool = sorted(edges)
    rng.shuffle(pool)
    kept = set(edges)
    for e in pool:
        if len(kept) <= cap:
            break
        trial = kept - {e}
        if not any(f[0] == e[0] for f in trial):
            continue
        if connected and len(_components(tasks + workers, sorted(trial))) > 1:
            continue
        kept = trial
    if len(kept) > cap:
        raise FairloadError("UNSATISFIABLE_PARAMS", f"cannot meet max_edges={cap}")
    return kept


def random_spanning_tree(inst: BipartiteInstance, rng: SplitMix64, root: str) -> Tuple[Edge, ...]:
    seen = {root}
    frontier = [root]
    kept = set()
    while frontier:
        v = frontier.pop(rng.randint(0, len(frontier) - 1))
        nbrs = list(inst.delta[v])
        rng.shuffle(nbrs)
        for e in nbrs:
            n = e[1] if e[0] == v else e[0]
            if n not in seen:
                seen.add(n)
                kept.add(e)
                frontier.append(n)
    return tuple(e for e in inst.edges if e in kept)


def random_start(inst: BipartiteInstance, seed: int, tries: int = 32,
                 bound: float = START_BOUND) -> Assignment:
    """A point satisfying every demand exactly (or to root-finding precision), built by
    fixing loads on a random spanning tree with random worker targets and random
    values on the other edges.

    Draws are repeated (up to ``tries`` times) while the loads are all equal,
    some entry or load exceeds ``bound`` in magnitude, some intermediate
    value of a vertex function exceeds ``bound**2`` (so that float rounding
    stays far below 1e-9), or a demand is missed by more than ``1e-12 * bound``. A well-scaled draw with equal loads is
    returned if that is all there is (a single worker, say). Otherwise
    NO_START is raised: the instance is too badly scaled for double precision."""
    rng = SplitMix64(seed ^ START_SALT)
    flat = None
    for _ in range(tries):
        root = rng.choice(inst.workers)
        tree = random_spanning_tree(inst, rng, root)
        pinned = {e: Fraction(rng.randint(-8, 8), 4) for e in inst.edges if e not in set(tree)}
        view = rooted_view(inst, tree, root, pinned)
        targets = {w: Fraction(rng.randint(-12, 12), 4) for w in inst.workers if w != root}
        x = fix_loads(view, targets)
        rep = evaluate_loads(inst, x)
        big = max(abs(float(v)) for v in list(x.values.values()) + list(rep.per_worker.values()))
        peak = max(ex.peak_magnitude(f, x.values) for f in (*inst.task_funcs.values(),
                                                             *inst.worker_funcs.values()))
        worst = max((abs(float(r)) for r in task_residuals(inst, x).values()), default=0.0)
        if big <= bound and peak <= bound ** 2 and worst <= 1e-12 * bound:
            if rep.spread != 0:
                return x
            flat = flat or x
    if flat is not None:
        return flat
    raise FairloadError("NO_START", f"no well-scaled start point with unequal loads in {tries} draws")


def random_point_xa(inst: BipartiteInstance, seed: int) -> Assignment:
    """A random exact point of the weighted non-negative feasible set, with
    zeros sprinkled in so that supports vary."""
    rng = SplitMix64(seed ^ POINT_SALT)
    tw = inst.task_weights
    values = {}
    for u in inst.tasks:
        es = inst.delta[u]
        r = [rng.randint(0, 3) for _ in es]
        if not any(r):
            r[rng.randint(0, len(es) - 1)] = 1
        total = sum(tw[e] * k for e, k in zip(es, r))
        for e, k in zip(es, r):
            values[e] = inst.demands[u] * k / total
    return Assignment({e: values[e] for e in inst.edges})
