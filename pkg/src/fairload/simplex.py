"""Exact two-phase primal simplex over the rationals.

Dense tableau, Bland's rule for both entering and leaving variables, so the
method terminates on degenerate problems and the optimum it reports is a
deterministic function of the input. Arithmetic runs on ``gmpy2.mpq`` when
available (an order of magnitude faster than ``Fraction``); results are
handed back as ``Fraction``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

OPTIMAL = "OPTIMAL"
INFEASIBLE = "INFEASIBLE"
UNBOUNDED = "UNBOUNDED"


@dataclass
class LinearProgram:
    """``min`` or ``max`` of a linear objective over rows ``a . v (<=|>=|==) b``.

    Variables are non-negative unless declared free.
    """

    names: List[str] = field(default_factory=list)
    free: List[bool] = field(default_factory=list)
    rows: List[Tuple[Dict[int, Fraction], str, Fraction]] = field(default_factory=list)
    objective: Dict[int, Fraction] = field(default_factory=dict)
    maximize: bool = False

    def add_var(self, name: str, free: bool = False) -> int:
        self.names.append(name)
        self.free.append(free)
        return len(self.names) - 1

    def add_row(self, coeffs: Dict[int, object], sense: str, rhs) -> None:
        if sense not in ("<=", ">=", "=="):
            raise ValueError(f"bad sense {sense!r}")
        for i in coeffs:
            if not 0 <= i < len(self.names):
                raise ValueError(f"row references undeclared variable {i}")
        self.rows.append(({i: Fraction(c) for i, c in coeffs.items() if c != 0}, sense, Fraction(rhs)))

    def set_objective(self, coeffs: Dict[int, object], maximize: bool = False) -> None:
        self.objective = {i: Fraction(c) for i, c in coeffs.items() if c != 0}
        self.maximize = maximize


@dataclass
class LPSolution:
    status: str
    values: Optional[List[Fraction]] = None
    objective: Optional[Fraction] = None
    pivots: int = 0


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


class _Tableau:
    def __init__(self, rows: List[List], basis: List[int], ncols: int):
        self.rows = rows
        self.basis = basis
        self.ncols = ncols
        self.pivots = 0

    def pivot(self, r: int, j: int, cost: List) -> None:
        prow = self.rows[r]
        piv = prow[j]
        if piv != 1:
            prow = [v / piv for v in prow]
            self.rows[r] = prow
        nz = [k for k, v in enumerate(prow) if v]
        for i, row in enumerate(self.rows):
            if i != r:
                f = row[j]
                if f:
                    for k in nz:
                        row[k] -= f * prow[k]
        f = cost[j]
        if f:
            for k in nz:
                cost[k] -= f * prow[k]
        self.basis[r] = j
        self.pivots += 1

    def reduced_costs(self, c: List) -> List:
        """Cost row in canonical form; last entry holds minus the objective value."""
        red = list(c) + [_Q(0)]
        for i, row in enumerate(self.rows):
            cb = c[self.basis[i]]
            if cb:
                for k, v in enumerate(row):
                    if v:
                        red[k] -= cb * v
        return red

    def run(self, cost: List, allowed: List[bool]) -> str:
        while True:
            enter = next((j for j in range(self.ncols) if allowed[j] and cost[j] < 0), None)
            if enter is None:
                return OPTIMAL
            best_r, best_ratio = None, None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    if (best_ratio is None or ratio < best_ratio
                            or (ratio == best_ratio and self.basis[i] < self.basis[best_r])):
                        best_r, best_ratio = i, ratio
            if best_r is None:
                return UNBOUNDED
            self.pivot(best_r, enter, cost)


def solve(lp: LinearProgram) -> LPSolution:
    """Solve ``lp`` exactly. Values are returned for the declared variables."""
    # column layout: one column per non-negative var, two (pos, neg) per free var
    col_of: List[Tuple[int, Optional[int]]] = []
    ncols = 0
    for is_free in lp.free:
        if is_free:
            col_of.append((ncols, ncols + 1))
            ncols += 2
        else:
            col_of.append((ncols, None))
            ncols += 1

    dense_rows: List[List] = []
    slack_col: List[Optional[int]] = []
    for coeffs, sense, rhs in lp.rows:
        row: Dict[int, object] = {}
        for i, c in coeffs.items():
            p, n = col_of[i]
            row[p] = _Q(c)
            if n is not None:
                row[n] = -_Q(c)
        sc = None
        if sense != "==":
            sc = ncols
            row[sc] = _Q(1) if sense == "<=" else _Q(-1)
            ncols += 1
        b = _Q(rhs)
        if b < 0 or (b == 0 and sense == ">="):
            row = {k: -v for k, v in row.items()}
            b = -b
        dense_rows.append((row, b))
        slack_col.append(sc)

    basis: List[int] = []
    artificial_start = ncols
    need_art = []
    for (row, b), sc in zip(dense_rows, slack_col):
        if sc is not None and row[sc] == 1:
            basis.append(sc)
        else:
            basis.append(ncols)
            need_art.append(ncols)
            ncols += 1
    rows = []
    for i, (row, b) in enumerate(dense_rows):
        full = [_Q(0)] * (ncols + 1)
        for k, v in row.items():
            full[k] = v
        if basis[i] >= artificial_start:
            full[basis[i]] = _Q(1)
        full[-1] = b
        rows.append(full)

    tab = _Tableau(rows, basis, ncols)
    allowed = [True] * ncols
    if need_art:
        c1 = [_Q(0)] * ncols
        for k in need_art:
            c1[k] = _Q(1)
        cost = tab.reduced_costs(c1)
        tab.run(cost, allowed)
        if -cost[-1] > 0:
            return LPSolution(INFEASIBLE, pivots=tab.pivots)
        # drive zero-level artificials out of the basis; drop redundant rows
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] >= artificial_start:
                k = next((k for k in range(artificial_start) if tab.rows[i][k] != 0), None)
                if k is None:
                    del tab.rows[i]
                    del tab.basis[i]
                    continue
                tab.pivot(i, k, [_Q(0)] * (ncols + 1))
            i += 1
        for k in range(artificial_start, ncols):
            allowed[k] = False

    sign = -1 if lp.maximize else 1
    c2 = [_Q(0)] * ncols
    for i, c in lp.objective.items():
        p, n = col_of[i]
        c2[p] = _Q(sign * c)
        if n is not None:
            c2[n] = -_Q(sign * c)
    cost = tab.reduced_costs(c2)
    status = tab.run(cost, allowed)
    if status == UNBOUNDED:
        return LPSolution(UNBOUNDED, pivots=tab.pivots)

    colval = [_Q(0)] * ncols
    for i, bcol in enumerate(tab.basis):
        colval[bcol] = tab.rows[i][-1]
    values = []
    for p, n in col_of:
        v = colval[p] - (colval[n] if n is not None else 0)
        values.append(_frac(v))
    obj = sum((c * values[i] for i, c in lp.objective.items()), Fraction(0))
    return LPSolution(OPTIMAL, values, obj, tab.pivots)
