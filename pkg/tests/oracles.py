"""Independent brute-force oracles used by the tests.

The LP oracle never touches the simplex code. Each objective is lifted to a
polyhedron in (x, t) or (x, t_min, t_max) space, every basic solution (every
choice of active inequalities completing the task equations to a square
system) is computed, and the best feasible one is taken. A batched float
solve filters candidates; survivors are re-solved and re-checked in exact
rational arithmetic, so the returned value is exact.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from fairload.instance import BipartiteInstance


def _exact_solve(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> Optional[List[Fraction]]:
    n = len(rows)
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return None
        m[c], m[piv] = m[piv], m[c]
        inv = 1 / m[c][c]
        m[c] = [v * inv for v in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return [m[r][n] for r in range(n)]


def _lifted(inst: BipartiteInstance, objective: str):
    """Equalities A z = b, inequalities G z <= h and cost c (minimised) for one objective."""
    edges = list(inst.edges)
    n_e = len(edges)
    idx = {e: i for i, e in enumerate(edges)}
    tw, ww = inst.task_weights, inst.worker_weights
    aux = 1 if objective in ("min-max", "max-min") else 2
    n = n_e + aux
    A, b = [], []
    for u in inst.tasks:
        row = [Fraction(0)] * n
        for e in inst.delta[u]:
            row[idx[e]] = tw[e]
        A.append(row)
        b.append(inst.demands[u])
    G, h = [], []
    for i in range(n_e):
        row = [Fraction(0)] * n
        row[i] = Fraction(-1)
        G.append(row)
        h.append(Fraction(0))

    def load_row(w, sign, col):
        row = [Fraction(0)] * n
        for e in inst.delta[w]:
            row[idx[e]] = sign * ww[e]
        row[col] = Fraction(-sign)
        return row

    c = [Fraction(0)] * n
    if objective == "min-max":
        for w in inst.workers:
            G.append(load_row(w, 1, n_e)); h.append(Fraction(0))  # load - t <= 0
        c[n_e] = Fraction(1)
    elif objective == "max-min":
        for w in inst.workers:
            G.append(load_row(w, -1, n_e)); h.append(Fraction(0))  # t - load <= 0
        c[n_e] = Fraction(-1)
    else:
        lo, hi = n_e, n_e + 1
        for w in inst.workers:
            G.append(load_row(w, 1, hi)); h.append(Fraction(0))
            G.append(load_row(w, -1, lo)); h.append(Fraction(0))
        c[hi], c[lo] = Fraction(1), Fraction(-1)
    return A, b, G, h, c


def lp_oracle(inst: BipartiteInstance, objective: str) -> Optional[Fraction]:
    """Exact optimum of ``objective`` ("min-max", "max-min" or "min-spread") by
    enumerating basic solutions, or None if none is feasible."""
    A, b, G, h, c = _lifted(inst, objective)
    n = len(c)
    k = n - len(A)
    if k < 0 or k > len(G):
        return None
    subsets = list(itertools.combinations(range(len(G)), k))
    Af = np.array([[float(v) for v in r] for r in A]).reshape(len(A), n)
    Gf = np.array([[float(v) for v in r] for r in G]).reshape(len(G), n)
    bf = np.array([float(v) for v in b])
    hf = np.array([float(v) for v in h])
    S = np.array(subsets, dtype=int).reshape(len(subsets), k)
    M = np.concatenate([np.broadcast_to(Af, (len(subsets),) + Af.shape), Gf[S]], axis=1)
    R = np.concatenate([np.broadcast_to(bf, (len(subsets), len(bf))), hf[S]], axis=1)
    scale = np.abs(M).max(axis=(1, 2)) if n else np.ones(len(subsets))
    det = np.linalg.det(M / scale[:, None, None]) if n else np.ones(len(subsets))
    ok = np.abs(det) > 1e-10
    best = None
    if not ok.any():
        return None
    Z = np.linalg.solve(M[ok], R[ok][..., None])[..., 0]
    slack = Z @ Gf.T - hf
    feasible = (slack <= 1e-7 * (1 + np.abs(Z).max(axis=1, keepdims=True))).all(axis=1)
    cf = np.array([float(v) for v in c])
    cand = np.nonzero(ok)[0][feasible]
    if len(cand) == 0:
        return None
    vals = Z[feasible] @ cf
    for j in np.argsort(vals, kind="stable"):
        if best is not None and vals[j] > float(best) + 1e-6 * (1 + abs(float(best))):
            break
        sub = subsets[cand[j]]
        z = _exact_solve(A + [G[i] for i in sub], b + [h[i] for i in sub])
        if z is None:
            continue
        if any(sum(g * v for g, v in zip(row, z)) > hh for row, hh in zip(G, h)):
            continue
        val = sum(ci * zi for ci, zi in zip(c, z))
        if best is None or val < best:
            best = val
    if best is None:
        return None
    return -best if objective == "max-min" else best


def count_integral_bruteforce(inst: BipartiteInstance) -> int:
    """Count integer points by a plain product over all edge-value boxes (tiny instances only)."""
    tw = inst.task_weights
    total = 1
    for u in inst.tasks:
        es = inst.delta[u]
        d = inst.demands[u]
        boxes = [range(int(d // tw[e]) + 1) for e in es]
        total *= sum(1 for xs in itertools.product(*boxes)
                     if sum(tw[e] * v for e, v in zip(es, xs)) == d)
    return total


def bisect_root(f, lo: float, hi: float, iters: int = 200) -> float:
    """Textbook bisection for an increasing ``f`` with ``f(lo) < 0 < f(hi)``."""
    for _ in range(iters):
        mid = (lo + hi) / 2
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def numeric_fixed_point(F, lo: float, hi: float) -> float:
    return bisect_root(lambda x: x - F(x), lo, hi)


def pairs_pareto_bruteforce(pairs) -> List[Tuple]:
    """O(n^2) non-dominated filter for (minimise first, maximise second)."""
    pts = set(pairs)
    front = [p for p in pts
             if not any((q[0] <= p[0] and q[1] >= p[1]) and q != p for q in pts)]
    return sorted(front)
