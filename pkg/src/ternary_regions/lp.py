"""Exact rational simplex.

Only one kind of problem is ever asked here: how deep a point can sit
inside a system of inequalities ``a_i . x <= b_i`` (optionally restricted
to a hyperplane ``a_H . x = b_H``), i.e.::

    maximize s  subject to  a_i . x + s <= b_i,  a_H . x = b_H,  s <= 1

with ``x`` and ``s`` free.  The open system is feasible iff the optimum is
positive.  The primal has few variables and many rows, so we run the
simplex on its dual (``d + 1`` equality rows) and recover ``(x, s)`` from
the optimal basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

Row = Tuple[Sequence[Fraction], Fraction]

_ZERO = Fraction(0)
_ONE = Fraction(1)


class LPError(RuntimeError):
    pass


def _lcm_den(values) -> int:
    den = 1
    for v in values:
        d = v.denominator
        if d != 1:
            den = den * d // math.gcd(den, d)
    return den


def _reduce(row: List[int]) -> List[int]:
    g = math.gcd(*row)
    if g > 1:
        return [v // g for v in row]
    return row


def _pivot(rows: List[List[int]], obj: List[int], r: int, c: int) -> None:
    """Integer-preserving pivot; every row is kept gcd-reduced.

    Rows are equations, so scaling one by a positive integer changes
    nothing; the basic column of each row keeps a positive coefficient.
    """
    if rows[r][c] < 0:
        # only happens on zero-rhs rows when driving out artificials
        rows[r] = [-v for v in rows[r]]
    prow = rows[r]
    p = prow[c]
    nz = [j for j, v in enumerate(prow) if v]
    for i, row in enumerate(rows):
        if i != r:
            f = row[c]
            if f:
                new = [v * p for v in row]
                for j in nz:
                    new[j] -= f * prow[j]
                rows[i] = _reduce(new)
    f = obj[c]
    if f:
        new = [v * p for v in obj]
        for j in nz:
            new[j] -= f * prow[j]
        obj[:] = _reduce(new)


def _run(rows, obj, basis, allowed: int, max_iter: int) -> str:
    """Bland's rule on a tableau whose last column is the rhs."""
    for _ in range(max_iter):
        enter = next((j for j in range(allowed) if obj[j] < 0), None)
        if enter is None:
            return "optimal"
        best = None  # (rhs, coef, basis index, row)
        for i, row in enumerate(rows):
            a = row[enter]
            if a > 0:
                rhs = row[-1]
                if best is None:
                    best = (rhs, a, basis[i], i)
                    continue
                # compare rhs/a with best ratio by cross-multiplying
                lhs, rhs_best = rhs * best[1], best[0] * a
                if lhs < rhs_best or (lhs == rhs_best and basis[i] < best[2]):
                    best = (rhs, a, basis[i], i)
        if best is None:
            return "unbounded"
        r = best[3]
        _pivot(rows, obj, r, enter)
        basis[r] = enter
    raise LPError("simplex iteration limit reached")


def simplex_standard(E: Sequence[Sequence[Fraction]], f: Sequence[Fraction],
                     c: Sequence[Fraction], max_iter: int = 10_000):
    """Solve ``min c.y  s.t.  E y = f, y >= 0`` exactly.

    Returns ``(status, basis, y)``; ``basis`` lists the basic column per
    row, where indices ``>= len(c)`` are leftover artificial columns sitting
    at zero on redundant rows.  Each row is scaled to integers up front.
    """
    m, n = len(E), len(c)
    rows = []
    for i in range(m):
        vals = list(E[i]) + [f[i]]
        k = _lcm_den(vals)
        if vals[-1] < 0:
            k = -k
        ints = [v.numerator * (k // v.denominator) for v in vals]
        art = [0] * m
        art[i] = abs(k)
        # artificial column scaled along with the row keeps the basis positive
        rows.append(ints[:-1] + art + [ints[-1]])
    basis = [n + i for i in range(m)]

    # phase 1: minimize the sum of artificials; artificial i has coefficient
    # rows[i][n + i] in its row, so weight each row by scale / that
    obj = [0] * (n + m + 1)
    scale = 1
    for i, row in enumerate(rows):
        a = row[n + i]
        scale = scale * a // math.gcd(scale, a)
    for i, row in enumerate(rows):
        w = scale // row[n + i]
        for j in range(n):
            obj[j] -= w * row[j]
        obj[-1] -= w * row[-1]
    _run(rows, obj, basis, n, max_iter)
    if obj[-1] != 0:
        return "infeasible", basis, None

    for r in range(m):
        if basis[r] >= n:
            j = next((j for j in range(n) if rows[r][j] != 0), None)
            if j is not None:
                _pivot(rows, obj, r, j)
                basis[r] = j

    # phase 2
    k = _lcm_den(c)
    obj = [v.numerator * (k // v.denominator) for v in c] + [0] * (m + 1)
    for r, bv in enumerate(basis):
        if bv < n and obj[bv]:
            p, fct = rows[r][bv], obj[bv]
            obj = _reduce([v * p - fct * t for v, t in zip(obj, rows[r])])
    status = _run(rows, obj, basis, n, max_iter)
    y = [_ZERO] * n
    for r, bv in enumerate(basis):
        if bv < n:
            y[bv] = Fraction(rows[r][-1], rows[r][bv])
    return status, basis, y


def solve_square(M: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> List[Fraction]:
    """Gauss-Jordan elimination for a nonsingular square system."""
    n = len(M)
    aug = [[Fraction(v) for v in M[i]] + [Fraction(rhs[i])] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise LPError("singular basis matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[i][-1] for i in range(n)]


@dataclass(frozen=True)
class SlackResult:
    slack: Fraction
    point: Tuple[Fraction, ...]

    @property
    def interior(self) -> bool:
        return self.slack > 0


def max_slack(rows: Sequence[Row], dim: int, equality: Optional[Row] = None,
              cap: Fraction = _ONE) -> SlackResult:
    """Deepest point of ``{x : a.x <= b for (a, b) in rows}``.

    ``slack`` is capped at ``cap``; a positive value certifies a point
    strictly inside every row (and on ``equality`` when given).
    """
    # Dual columns: lambda_i -> (a_i, 1) cost b_i; nu+/nu- -> (+-a_H, 0) cost +-b_H;
    # mu -> (0, 1) cost cap.  Rows: d coordinate rows then the slack row.
    cols: List[List[Fraction]] = []
    costs: List[Fraction] = []
    for a, b in rows:
        cols.append(list(a) + [_ONE])
        costs.append(b)
    if equality is not None:
        a, b = equality
        cols.append(list(a) + [_ZERO])
        costs.append(b)
        cols.append([-v for v in a] + [_ZERO])
        costs.append(-b)
    cols.append([_ZERO] * dim + [_ONE])
    costs.append(cap)

    m = dim + 1
    E = [[col[i] for col in cols] for i in range(m)]
    f = [_ZERO] * dim + [_ONE]
    status, basis, _ = simplex_standard(E, f, costs)
    if status != "optimal":
        # the primal is always feasible with s -> -inf and bounded by cap,
        # so anything else means the equality row was inconsistent
        raise LPError(f"slack LP ended with status {status}")

    n = len(costs)
    B = []
    cb = []
    for r, bv in enumerate(basis):
        if bv < n:
            B.append(cols[bv])
            cb.append(costs[bv])
        else:
            e = [_ZERO] * m
            e[bv - n] = _ONE
            B.append(e)
            cb.append(_ZERO)
    pi = solve_square(B, cb)
    return SlackResult(pi[-1], tuple(pi[:dim]))
