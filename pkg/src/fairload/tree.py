"""Equal-load points for increasing-bijection loads via spanning trees.

On a tree rooted at a worker ``w0``, prescribing the load of every other
worker pins down the whole assignment: each non-root vertex solves for the
edge to its parent once the edges to its children are known. Equalization
then looks for the level ``lam`` at which the root's resulting load equals
``lam``. The root load is non-increasing in ``lam`` (every worker-to-worker
path has even length, so pushes alternate sign), which makes the fixed point
unique and findable by bracketing.

On a general connected graph the non-tree edges of a spanning tree are
frozen at their current values and the tree problem is solved.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from . import expr as ex
from .errors import FairloadError
from .expr import Edge, bracket_root, refine_root
from .instance import (Assignment, BipartiteInstance, NumericKind, evaluate_loads, is_connected,
                       task_residuals, validate_instance, worker_load)
from .rational import is_exact

TREE_RTOL = 4 * ex.EPS  # machine precision; brentq refuses anything tighter
TREE_MAXITER = 200


@dataclass(frozen=True)
class RootedTreeView:
    instance: BipartiteInstance
    root: str
    tree_edges: Tuple[Edge, ...]
    parent_edge: Mapping[str, Edge]
    order: Tuple[str, ...]  # non-root vertices, children before parents
    pinned: Mapping[Edge, object]

    @cached_property
    def _plan(self):
        inst = self.instance
        plan = []
        for v in self.order:
            f = inst.func(v)
            plan.append((v, self.parent_edge[v], f, ex.affine_form(f), v in inst.demands))
        return plan

    @cached_property
    def is_affine(self) -> bool:
        inst = self.instance
        return all(p[3] is not None for p in self._plan) and ex.affine_form(inst.func(self.root)) is not None

    def children(self, v: str) -> List[str]:
        return [c for c in self.order if self._parent_vertex(c) == v]

    def _parent_vertex(self, v: str) -> str:
        u, w = self.parent_edge[v]
        return w if u == v else u


def bfs_tree(inst: BipartiteInstance, root: Optional[str] = None) -> Tuple[Edge, ...]:
    """Breadth-first spanning tree from ``root`` (default: smallest worker id).

    Neighbours are visited in edge order. Edges are returned in edge order.
    """
    if root is None:
        if not inst.workers:
            raise FairloadError("NOT_A_TREE", "instance has no worker to root the tree at")
        root = min(inst.workers)
    seen = {root}
    queue = deque([root])
    kept = set()
    while queue:
        v = queue.popleft()
        for e in inst.delta[v]:
            n = e[1] if e[0] == v else e[0]
            if n not in seen:
                seen.add(n)
                kept.add(e)
                queue.append(n)
    return tuple(e for e in inst.edges if e in kept)


def rooted_view(inst: BipartiteInstance, tree_edges: Sequence[Edge], root: Optional[str] = None,
                pinned: Optional[Mapping[Edge, object]] = None) -> RootedTreeView:
    """Orient ``tree_edges`` towards ``root``; every other edge must be pinned."""
    if root is None:
        root = min(inst.workers) if inst.workers else None
    if root not in inst.workers:
        raise FairloadError("NOT_A_TREE", f"root {root!r} is not a worker")
    tree = tuple(e for e in inst.edges if e in set(tree_edges))
    if len(tree) != len(set(tree_edges)):
        raise FairloadError("NOT_A_TREE", "tree edges are not all instance edges")
    if not tree:
        raise FairloadError("NOT_A_TREE", "tree needs at least one edge")
    pinned = dict(pinned or {})
    off_tree = set(inst.edges) - set(tree)
    if set(pinned) != off_tree:
        raise FairloadError("NOT_A_TREE", "pinned values must cover exactly the non-tree edges")
    vertices = set(inst.tasks) | set(inst.workers)
    if len(tree) != len(vertices) - 1:
        raise FairloadError("NOT_A_TREE", f"{len(tree)} edges cannot span {len(vertices)} vertices")
    adj: Dict[str, List[Edge]] = {v: [] for v in vertices}
    for e in tree:
        adj[e[0]].append(e)
        adj[e[1]].append(e)
    parent: Dict[str, Edge] = {}
    seen = {root}
    bfs = [root]
    for v in bfs:
        for e in adj[v]:
            n = e[1] if e[0] == v else e[0]
            if n in seen:
                continue
            seen.add(n)
            parent[n] = e
            bfs.append(n)
    if len(seen) != len(vertices):
        raise FairloadError("NOT_A_TREE", "tree edges do not connect every vertex")
    return RootedTreeView(inst, root, tree, parent, tuple(reversed(bfs[1:])), pinned)


def fix_loads(view: RootedTreeView, targets: Mapping[str, object], tol: float = TREE_RTOL,
              method: str = "brent") -> Assignment:
    """The unique assignment meeting every demand and every non-root worker target.

    Exact when the vertex functions are affine and the data rational.
    """
    inst = view.instance
    for w in inst.workers:
        if w != view.root and w not in targets:
            raise FairloadError("MISSING_TARGET", f"no target load for worker {w}")
    values = dict(view.pinned)
    for v, p, f, form, is_task in view._plan:
        target = inst.demands[v] if is_task else targets[v]
        fixed = {e: values[e] for e in inst.delta[v] if e != p}
        values[p] = ex.solve_for(f, form, fixed, p, target, tol, method)
    return Assignment.of({e: values[e] for e in inst.edges})


def _root_load_map(view: RootedTreeView, tol: float, method: str) -> Callable:
    inst = view.instance
    others = [w for w in inst.workers if w != view.root]

    def F(lam):
        x = fix_loads(view, {w: lam for w in others}, tol, method)
        return worker_load(inst, x, view.root)

    return F


def fixed_point_bisect(F: Callable[[float], float], tol: float = TREE_RTOL, start: float = 0.0,
                       step: float = 1.0, method: str = "brent", maxiter: int = TREE_MAXITER,
                       samples: int = 8) -> float:
    """Unique ``lam`` with ``F(lam) = lam`` for continuous non-increasing ``F``.

    The crossing is bracketed by doubling steps from ``start`` (BRACKET_FAIL past
    2**64) and refined to relative width ``tol``. Every evaluation made on the
    way, plus ``samples`` evenly spaced probes of the bracket, is checked for
    monotonicity; an increase raises NOT_MONOTONE.
    """
    seen: List[Tuple[float, float]] = []

    def h(lam):
        v = float(F(lam))
        seen.append((lam, v))
        return lam - v

    try:
        lo, hi = bracket_root(h, 0.0, start=float(start), step=step)
    except FairloadError as exc:
        raise FairloadError("BRACKET_FAIL", exc.message) from exc
    for k in range(1, samples + 1):
        h(lo + (hi - lo) * k / (samples + 1))
    lam = refine_root(h, 0.0, lo, hi, method=method, rtol=tol, maxiter=maxiter, polish=True)
    _check_non_increasing(seen)
    return lam


def _check_non_increasing(points: List[Tuple[float, float]]) -> None:
    pts = sorted(set(points))
    for (l1, v1), (l2, v2) in zip(pts, pts[1:]):
        if l2 > l1 and v2 > v1 + 1e-9 * max(1.0, abs(v1), abs(v2)):
            raise FairloadError("NOT_MONOTONE", f"F({l1!r}) = {v1!r} < F({l2!r}) = {v2!r}")


def _exact_data(view: RootedTreeView) -> bool:
    inst = view.instance
    return (view.is_affine and all(is_exact(v) for v in view.pinned.values())
            and all(is_exact(d) for d in inst.demands.values()))


def equalize_tree(view: RootedTreeView, tol: float = TREE_RTOL, start=None, step: float = 1.0,
                  method: str = "brent") -> Tuple[Assignment, object]:
    """The unique point of the tree problem at which every worker has the same load.

    Returns the assignment and the common load. Affine rational data is solved
    exactly from two probes of the (then affine) root-load map.
    """
    inst = view.instance
    F = _root_load_map(view, tol, method)
    others = [w for w in inst.workers if w != view.root]
    if _exact_data(view):
        alpha = F(Fraction(0))
        beta = alpha - F(Fraction(1))
        if beta < 0:
            raise FairloadError("NOT_MONOTONE", "root load increases with the common target")
        lam = alpha / (1 + beta)
    else:
        lam = fixed_point_bisect(F, tol, start=0.0 if start is None else float(start), step=step,
                                 method=method)
    x = fix_loads(view, {w: lam for w in others}, tol, method)
    return x, lam


@dataclass(frozen=True)
class EqualizeOutcome:
    x: Assignment
    lam: object
    improved: bool
    root: Optional[str] = None
    tree_edges: Tuple[Edge, ...] = ()
    warn_negative: bool = False


def equalize_connected(inst: BipartiteInstance, x0: Assignment, tree_policy: str = "bfs",
                       tree: Optional[Sequence[Edge]] = None, root: Optional[str] = None,
                       tol: float = 1e-9, method: str = "brent") -> EqualizeOutcome:
    """Move ``x0`` to a point with all worker loads equal, strictly inside its load range.

    Edges outside the spanning tree keep their ``x0`` values, so the result
    depends on the tree. ``tree_policy`` is ``"bfs"`` (from ``root``, default
    the smallest worker id) or ``"given"`` (use ``tree``).
    """
    report = validate_instance(inst)
    if not report.ok:
        raise FairloadError("INVALID_INSTANCE", "; ".join(v.message for v in report.violations))
    if not inst.edges or not inst.workers:
        raise FairloadError("NOT_CONNECTED", "need at least one edge")
    if not is_connected(inst):
        raise FairloadError("NOT_CONNECTED", "graph is not connected")
    if set(x0.values) != set(inst.edges):
        raise FairloadError("KEY_MISMATCH", "start point is not keyed on the instance edges")
    worst = max((abs(r) for r in task_residuals(inst, x0).values()), default=0)
    if worst > tol:
        raise FairloadError("NOT_IN_XF", f"start point misses a demand by {float(worst):g}")
    rep = evaluate_loads(inst, x0)
    if rep.spread <= (0 if x0.kind == NumericKind.RATIONAL else tol):
        return EqualizeOutcome(x0, rep.lmax, False, root)
    if root is None:
        root = min(inst.workers)
    if tree_policy == "bfs":
        tree = bfs_tree(inst, root)
    elif tree_policy == "given":
        if tree is None:
            raise FairloadError("NOT_A_TREE", "tree_policy 'given' needs tree edges")
    else:
        raise ValueError(f"unknown tree policy {tree_policy!r}")
    kept = set(tree)
    pinned = {e: x0.values[e] for e in inst.edges if e not in kept}
    view = rooted_view(inst, tree, root, pinned)
    width = rep.spread if math.isfinite(float(rep.spread)) and rep.spread > 0 else 1
    x, lam = equalize_tree(view, start=(rep.lmax + rep.lmin) / 2, step=float(width), method=method)
    warn = any(v < 0 for v in x.values.values())
    return EqualizeOutcome(x, lam, True, root, view.tree_edges, warn)
