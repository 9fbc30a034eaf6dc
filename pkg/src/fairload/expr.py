"""Componentwise increasing load functions.

A load function maps the values on a vertex's incident edges to a real
number and, restricted to any single edge, is an increasing bijection of the
reals. Such functions are built here from a small grammar:

    Var(edge, coeff)        coeff * x_edge, coeff > 0
    Sum(children)           sum of children
    Max(children)           pointwise max; every child must cover all edges
    OddPow(child, exp)      child ** exp, exp odd
    Shift(child, offset)    child + offset

Every node is exact on rational inputs. Inversion in one coordinate peels
the expression from the top (closed form for affine pieces, shifts and odd
powers) and only brackets numerically where several summands depend on the
free coordinate.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

import gmpy2
from scipy.optimize import brentq

from .errors import FairloadError
from .rational import format_number, is_exact, to_fraction

Edge = Tuple[str, str]

MAX_BRACKET = 2.0 ** 64
ROOT_RTOL = 1e-12
ROOT_MAXITER = 200
EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class Var:
    edge: Edge
    coeff: Fraction = Fraction(1)


@dataclass(frozen=True)
class Sum:
    children: Tuple["LoadExpr", ...]


@dataclass(frozen=True)
class Max:
    children: Tuple["LoadExpr", ...]


@dataclass(frozen=True)
class OddPow:
    child: "LoadExpr"
    exp: int


@dataclass(frozen=True)
class Shift:
    child: "LoadExpr"
    offset: Fraction


LoadExpr = Union[Var, Sum, Max, OddPow, Shift]


def linear(weights: Mapping[Edge, object]) -> LoadExpr:
    """The positive-linear map ``x -> a . x`` for ``weights`` = a."""
    leaves = tuple(Var(e, to_fraction(c)) for e, c in weights.items())
    if len(leaves) == 1:
        return leaves[0]
    return Sum(leaves)


@lru_cache(maxsize=4096)
def edges_of(expr: LoadExpr) -> FrozenSet[Edge]:
    if isinstance(expr, Var):
        return frozenset([expr.edge])
    if isinstance(expr, (Sum, Max)):
        out = frozenset()
        for c in expr.children:
            out |= edges_of(c)
        return out
    return edges_of(expr.child)


def check_expr(expr: LoadExpr) -> List[str]:
    """Structural reasons why ``expr`` is not componentwise an increasing bijection.

    Empty list means the expression is valid.
    """
    problems: List[str] = []

    def walk(node) -> FrozenSet[Edge]:
        if isinstance(node, Var):
            if not node.coeff > 0:
                problems.append(f"non-positive coefficient {format_number(node.coeff)} on {node.edge}")
            return frozenset([node.edge])
        if isinstance(node, (Sum, Max)):
            if not node.children:
                problems.append(f"empty {type(node).__name__}")
                return frozenset()
            sets = [walk(c) for c in node.children]
            union = frozenset().union(*sets)
            if isinstance(node, Max) and any(s != union for s in sets):
                # max(f(x1, x2), g(x1)) is flat in x2 wherever g dominates
                problems.append("max child does not depend on every edge of the max")
            return union
        if isinstance(node, OddPow):
            if not (isinstance(node.exp, int) and node.exp > 0 and node.exp % 2 == 1):
                problems.append(f"exponent {node.exp!r} is not an odd positive integer")
            return walk(node.child)
        if isinstance(node, Shift):
            return walk(node.child)
        problems.append(f"unknown node {node!r}")
        return frozenset()

    walk(expr)
    return problems


def _pow(v, n: int):
    try:
        return v ** n
    except OverflowError:
        return math.copysign(math.inf, v)


def eval_expr(expr: LoadExpr, point: Mapping[Edge, object]):
    """Value of ``expr`` at ``point``; exact when all point values are rational."""
    missing = edges_of(expr) - set(point)
    if missing:
        raise FairloadError("KEY_MISMATCH", f"point lacks edges {sorted(missing)}")
    return _eval(expr, point)


def _eval(node, point):
    if isinstance(node, Var):
        v = point[node.edge]
        return node.coeff * v if is_exact(v) else float(node.coeff) * v
    if isinstance(node, Sum):
        return sum((_eval(c, point) for c in node.children[1:]), _eval(node.children[0], point))
    if isinstance(node, Max):
        return max(_eval(c, point) for c in node.children)
    if isinstance(node, OddPow):
        return _pow(_eval(node.child, point), node.exp)
    v = _eval(node.child, point)
    return v + node.offset if is_exact(v) else v + float(node.offset)


def peak_magnitude(expr: LoadExpr, point: Mapping[Edge, object]) -> float:
    """Largest absolute value of any node of ``expr`` at ``point``.

    Rounding error of a float evaluation scales with this, not with the result:
    a small value obtained by cancelling two huge terms is only known roughly.
    """
    peak = 0.0

    def walk(node):
        nonlocal peak
        if isinstance(node, Var):
            v = float(node.coeff) * float(point[node.edge])
        elif isinstance(node, Sum):
            v = sum(walk(c) for c in node.children)
        elif isinstance(node, Max):
            v = max(walk(c) for c in node.children)
        elif isinstance(node, OddPow):
            v = _pow(walk(node.child), node.exp)
        else:
            v = walk(node.child) + float(node.offset)
        peak = max(peak, abs(v))
        return v

    walk(expr)
    return peak


def affine_form(expr: LoadExpr) -> Optional[Tuple[Dict[Edge, Fraction], Fraction]]:
    """``(coeffs, const)`` with ``expr = coeffs . x + const`` if ``expr`` is affine, else None."""
    if isinstance(expr, Var):
        return {expr.edge: expr.coeff}, Fraction(0)
    if isinstance(expr, Sum):
        coeffs: Dict[Edge, Fraction] = {}
        const = Fraction(0)
        for c in expr.children:
            sub = affine_form(c)
            if sub is None:
                return None
            for e, a in sub[0].items():
                coeffs[e] = coeffs.get(e, Fraction(0)) + a
            const += sub[1]
        return coeffs, const
    if isinstance(expr, Max):
        forms = [affine_form(c) for c in expr.children]
        if any(f is None for f in forms) or any(f != forms[0] for f in forms):
            return None
        return forms[0]
    if isinstance(expr, OddPow):
        return affine_form(expr.child) if expr.exp == 1 else None
    sub = affine_form(expr.child)
    if sub is None:
        return None
    return sub[0], sub[1] + expr.offset


def linear_weights(expr: LoadExpr) -> Optional[Dict[Edge, Fraction]]:
    """Coefficient vector when ``expr`` is linear (affine with zero constant)."""
    form = affine_form(expr)
    if form is None or form[1] != 0:
        return None
    return form[0]


def partial(expr: LoadExpr, fixed: Mapping[Edge, object], free_edge: Edge) -> Callable[[float], float]:
    """Float closure ``s -> expr(fixed, free_edge = s)`` with the fixed part folded."""

    def build(node):
        if free_edge not in edges_of(node):
            c = float(_eval(node, fixed))
            return lambda s: c
        if isinstance(node, Var):
            a = float(node.coeff)
            return lambda s: a * s
        if isinstance(node, Sum):
            fs = [build(c) for c in node.children]
            return lambda s: sum(f(s) for f in fs)
        if isinstance(node, Max):
            fs = [build(c) for c in node.children]
            return lambda s: max(f(s) for f in fs)
        if isinstance(node, OddPow):
            f, n = build(node.child), node.exp
            return lambda s: _pow(f(s), n)
        f, off = build(node.child), float(node.offset)
        return lambda s: f(s) + off

    return build(expr)


def bracket_root(h: Callable[[float], float], target: float, start: float = 0.0,
                 step: float = 1.0, limit: float = MAX_BRACKET) -> Tuple[float, float]:
    """Find ``lo < hi`` with ``h(lo) <= target <= h(hi)`` for increasing ``h``.

    Expands geometrically from ``start``; raises NO_BRACKET past ``limit``.
    """
    v = h(start)
    if math.isnan(v):
        raise FairloadError("NO_BRACKET", f"function is undefined at {start}")
    if v == target:
        return start, start
    direction = 1.0 if v < target else -1.0
    prev = start
    step = max(abs(step), 1.0)
    while True:
        probe = start + direction * step
        if abs(probe) > limit:
            raise FairloadError("NO_BRACKET", f"no sign change within magnitude {limit:g}")
        pv = h(probe)
        if math.isnan(pv):
            raise FairloadError("NO_BRACKET", f"function is undefined at {probe}")
        if (pv >= target) if direction > 0 else (pv <= target):
            return (prev, probe) if direction > 0 else (probe, prev)
        prev = probe
        step *= 2.0


def _key(x: float) -> int:
    """Order-preserving map from doubles to integers (adjacent doubles differ by 1)."""
    i = struct.unpack("<q", struct.pack("<d", x))[0]
    return i if i >= 0 else -(i & 0x7FFFFFFFFFFFFFFF)


def _unkey(k: int) -> float:
    bits = k if k >= 0 else (-k) | (1 << 63)
    return struct.unpack("<d", struct.pack("<Q", bits))[0]


def _bisect_bits(g, lo, hi, glo, ghi, rtol):
    """Bisection on the bit patterns of doubles: reaches adjacent doubles in at most
    64 steps wherever the root is, zero included. Stops early once the bracket is
    narrower than ``rtol`` relative (``rtol = 0`` runs to adjacency)."""
    klo, khi = _key(lo), _key(hi)
    while khi - klo > 1:
        if rtol and hi - lo <= rtol * max(abs(lo), abs(hi)):
            break
        km = (klo + khi) // 2
        mid = _unkey(km)
        gm = g(mid)
        if gm == 0:
            return mid
        if gm < 0:
            klo, lo, glo = km, mid, gm
        else:
            khi, hi, ghi = km, mid, gm
    alo = abs(glo) if not math.isnan(glo) else math.inf
    ahi = abs(ghi) if not math.isnan(ghi) else math.inf
    return lo if alo <= ahi else hi


def refine_root(h: Callable[[float], float], target: float, lo: float, hi: float,
                method: str = "brent", rtol: float = ROOT_RTOL, maxiter: int = ROOT_MAXITER,
                polish: bool = False) -> float:
    """Root of ``h(s) = target`` inside the bracket, ``h`` increasing.

    ``method="brent"`` uses scipy's brentq (``maxiter`` caps its iterations);
    ``"bisect"`` bisects on double bit patterns. With ``polish`` the brent
    answer is refined to adjacent doubles, which matters when ``h`` is very
    steep at the root (a root near zero of ``s + s ** (1/5)``, say).
    """
    if lo == hi:
        return lo
    g = lambda s: h(s) - target  # noqa: E731
    glo, ghi = g(lo), g(hi)
    if glo == 0:
        return lo
    if ghi == 0:
        return hi
    rtol = max(rtol, 4 * EPS)
    if method == "brent" and math.isfinite(glo) and math.isfinite(ghi):
        # a root at (or near) zero never meets a relative test, so the bracket scale sets a floor
        xtol = max(rtol * max(abs(lo), abs(hi)), 1e-300)
        r = brentq(g, lo, hi, xtol=xtol, rtol=rtol, maxiter=maxiter)
        if not polish:
            return r
        gr = g(r)
        if gr == 0:
            return r
        if gr < 0:
            lo, glo = r, gr
        else:
            hi, ghi = r, gr
    elif method not in ("brent", "bisect"):
        raise ValueError(f"unknown method {method!r}")
    return _bisect_bits(g, lo, hi, glo, ghi, 0 if polish else rtol)


def invert_component(expr: LoadExpr, fixed: Mapping[Edge, object], free_edge: Edge, target,
                     tol: float = 1e-12, method: str = "brent"):
    """The unique ``s`` with ``expr(fixed, free_edge = s) = target``.

    Affine pieces, shifts and odd powers are inverted in closed form (exact for
    rational data). Where that is impossible the root is bracketed from 0 by
    doubling and refined until the relative bracket width drops below ``tol``.
    """
    needed = edges_of(expr) - {free_edge}
    if free_edge not in edges_of(expr) or not needed <= set(fixed):
        raise FairloadError("KEY_MISMATCH", f"fixed values must cover every edge but {free_edge}")
    return solve_for(expr, affine_form(expr), fixed, free_edge, target, tol, method)


def solve_for(expr: LoadExpr, form, fixed: Mapping[Edge, object], free_edge: Edge, target,
              tol: float = 1e-12, method: str = "brent", start: float = 0.0):
    """Unchecked core of :func:`invert_component`; ``form`` is ``affine_form(expr)``."""
    if form is not None:
        return _solve_affine(form, fixed, free_edge, target)
    return _invert(expr, fixed, free_edge, target, tol, method, start)


def _solve_affine(form, fixed, free_edge, target):
    coeffs, const = form
    others = [e for e in coeffs if e != free_edge]
    if is_exact(target) and all(is_exact(fixed[e]) for e in others):
        rest = const + sum((coeffs[e] * fixed[e] for e in others), Fraction(0))
        return (target - rest) / coeffs[free_edge]
    rest = float(const) + sum(float(coeffs[e]) * float(fixed[e]) for e in others)
    return (float(target) - rest) / float(coeffs[free_edge])


def _minus(a, b):
    return a - b if is_exact(a) and is_exact(b) else float(a) - float(b)


def odd_root(value, k: int):
    """Real ``k``-th root for odd ``k``; exact when ``value`` is a rational perfect power."""
    if is_exact(value):
        q = Fraction(value)
        num, ok_n = gmpy2.iroot(abs(q.numerator), k)
        den, ok_d = gmpy2.iroot(q.denominator, k)
        if ok_n and ok_d:
            return Fraction(int(num) * (1 if q >= 0 else -1), int(den))
    v = float(value)
    if v == 0 or math.isinf(v):
        return v
    r = abs(v) ** (1.0 / k)
    r -= (r ** k - abs(v)) / (k * r ** (k - 1))  # one Newton step cleans up the rounded 1/k
    return math.copysign(r, v)


def _invert(node, fixed, free_edge, target, tol, method, start):
    """Peel the expression from the top so that no numeric solve ever sees a flat
    spot such as ``1 + y**5 = 1``: shifts subtract, powers take roots, a sum with
    one dependent child subtracts the rest, and ``max(f, g) = t`` is solved by the
    smaller of the solutions of ``f = t`` and ``g = t``. Only sums with several
    dependent children fall back to bracketing."""
    form = affine_form(node)
    if form is not None:
        return _solve_affine(form, fixed, free_edge, target)
    if isinstance(node, Shift):
        return _invert(node.child, fixed, free_edge, _minus(target, node.offset), tol, method, start)
    if isinstance(node, OddPow):
        return _invert(node.child, fixed, free_edge, odd_root(target, node.exp), tol, method, start)
    if isinstance(node, Max) and all(free_edge in edges_of(c) for c in node.children):
        return min(_invert(c, fixed, free_edge, target, tol, method, start) for c in node.children)
    if isinstance(node, Sum):
        dep = [c for c in node.children if free_edge in edges_of(c)]
        if len(dep) == 1:
            rest = [_eval(c, fixed) for c in node.children if c is not dep[0]]
            total = sum(rest[1:], rest[0]) if rest else 0
            return _invert(dep[0], fixed, free_edge, _minus(target, total), tol, method, start)
    h = partial(node, fixed, free_edge)
    t = float(target)
    lo, hi = bracket_root(h, t, start=start)
    return refine_root(h, t, lo, hi, method=method, rtol=tol if tol > 0 else ROOT_RTOL)


def g_map(expr: LoadExpr, fixed: Mapping[Edge, object], in_edge: Edge, out_edge: Edge, level,
          tol: float = 1e-12) -> Callable[[object], object]:
    """Level-set transport: ``t -> s`` such that ``expr(fixed, in_edge=t, out_edge=s) = level``.

    The returned map is continuous and decreasing.
    """
    if in_edge == out_edge:
        raise ValueError("in_edge and out_edge must differ")

    def g(t):
        point = dict(fixed)
        point[in_edge] = t
        return invert_component(expr, point, out_edge, level, tol=tol)

    return g


# -- JSON ------------------------------------------------------------------

def edge_key(edge: Edge) -> str:
    return f"{edge[0]}:{edge[1]}"


def parse_edge_key(key: str) -> Edge:
    task, sep, worker = key.partition(":")
    if not sep or not task or not worker or ":" in worker:
        raise FairloadError("PARSE_ERROR", f"edge key {key!r} is not 'task:worker'")
    return task, worker


def expr_to_json(expr: LoadExpr) -> dict:
    if isinstance(expr, Var):
        return {"op": "var", "edge": edge_key(expr.edge), "coeff": format_number(expr.coeff)}
    if isinstance(expr, Sum):
        return {"op": "sum", "children": [expr_to_json(c) for c in expr.children]}
    if isinstance(expr, Max):
        return {"op": "max", "children": [expr_to_json(c) for c in expr.children]}
    if isinstance(expr, OddPow):
        return {"op": "oddpow", "exp": expr.exp, "children": [expr_to_json(expr.child)]}
    return {"op": "shift", "offset": format_number(expr.offset), "children": [expr_to_json(expr.child)]}


def expr_from_json(obj) -> LoadExpr:
    if not isinstance(obj, dict) or "op" not in obj:
        raise FairloadError("PARSE_ERROR", f"expression object expected, got {obj!r}")
    op = obj["op"]
    try:
        if op == "var":
            return Var(parse_edge_key(obj["edge"]), to_fraction(obj.get("coeff", "1")))
        children = obj.get("children")
        if children is None and "child" in obj:
            children = [obj["child"]]
        if not isinstance(children, list):
            raise FairloadError("PARSE_ERROR", f"'{op}' needs a children list")
        kids = tuple(expr_from_json(c) for c in children)
        if op == "sum":
            return Sum(kids)
        if op == "max":
            return Max(kids)
        if len(kids) != 1:
            raise FairloadError("PARSE_ERROR", f"'{op}' takes exactly one child")
        if op == "oddpow":
            return OddPow(kids[0], int(obj["exp"]))
        if op == "shift":
            return Shift(kids[0], to_fraction(obj["offset"]))
    except (KeyError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise FairloadError("PARSE_ERROR", f"bad '{op}' expression: {exc}") from exc
    raise FairloadError("PARSE_ERROR", f"unknown op {op!r}")


def iter_leaves(expr: LoadExpr) -> Iterable[Var]:
    if isinstance(expr, Var):
        yield expr
    elif isinstance(expr, (Sum, Max)):
        for c in expr.children:
            yield from iter_leaves(c)
    else:
        yield from iter_leaves(expr.child)
