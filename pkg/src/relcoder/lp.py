"""Exact linear programming over the rationals.

Two-phase primal simplex with Bland's anti-cycling rule.  The tableau is kept
in integers: every row is an arbitrary positive multiple of the true row, so
pivots need only integer arithmetic plus one gcd reduction per row.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

from .rational import to_fraction


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: tuple[Fraction, ...] | None = None
    value: Fraction | None = None

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def _scale(vals: Sequence) -> list[int]:
    fs = [to_fraction(v) for v in vals]
    den = lcm(*(f.denominator for f in fs)) if fs else 1
    return [int(f * den) for f in fs]


def _reduce(row: list[int]) -> list[int]:
    g = gcd(*row)
    if g > 1:
        return [v // g for v in row]
    return row


def _pivot(T: list[list[int]], R: list[int], r: int, c: int) -> list[int]:
    pr = T[r]
    if pr[c] < 0:
        pr = [-v for v in pr]
    pr = _reduce(pr)
    T[r] = pr
    p = pr[c]
    for i, row in enumerate(T):
        if i == r:
            continue
        f = row[c]
        if f:
            T[i] = _reduce([v * p - f * w for v, w in zip(row, pr)])
    f = R[c]
    if f:
        R = _reduce([v * p - f * w for v, w in zip(R, pr)])
    return R


def _simplex(T: list[list[int]], R: list[int], basis: list[int], ncols: int) -> tuple[str, list[int]]:
    """Minimise; R holds (positively scaled) reduced costs with rhs last."""
    while True:
        basic = set(basis)
        enter = -1
        for j in range(ncols):
            if R[j] < 0 and j not in basic:
                enter = j
                break
        if enter < 0:
            return "optimal", R
        best = -1
        for i, row in enumerate(T):
            a = row[enter]
            if a > 0:
                if best < 0:
                    best = i
                    continue
                lhs = row[-1] * T[best][enter]
                rhs = T[best][-1] * a
                if lhs < rhs or (lhs == rhs and basis[i] < basis[best]):
                    best = i
        if best < 0:
            return "unbounded", R
        R = _pivot(T, R, best, enter)
        basis[best] = enter


def solve_lp(
    c: Sequence,
    A_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    A_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
    *,
    maximize: bool = False,
    nvars: int | None = None,
) -> LPResult:
    """Optimise c.x subject to A_ub x <= b_ub, A_eq x = b_eq with x free."""
    n = len(c) if nvars is None else nvars
    cc = [to_fraction(v) for v in c] if len(c) else [Fraction(0)] * n
    if maximize:
        cc = [-v for v in cc]
    n_ub, n_eq = len(A_ub), len(A_eq)
    base_cols = 2 * n + n_ub
    rows: list[list[int]] = []
    needs_art: list[bool] = []
    for i in range(n_ub):
        a = list(A_ub[i])
        s = _scale(a + [b_ub[i]])
        row = s[:n] + [-v for v in s[:n]] + [0] * n_ub + [s[n]]
        row[2 * n + i] = 1
        if s[n] < 0:
            row = [-v for v in row]
            needs_art.append(True)
        else:
            needs_art.append(False)
        rows.append(row)
    for i in range(n_eq):
        a = list(A_eq[i])
        s = _scale(a + [b_eq[i]])
        row = s[:n] + [-v for v in s[:n]] + [0] * n_ub + [s[n]]
        if s[n] < 0:
            row = [-v for v in row]
        needs_art.append(True)
        rows.append(row)
    art_rows = [i for i, f in enumerate(needs_art) if f]
    n_art = len(art_rows)
    ncols = base_cols + n_art
    T = []
    basis = []
    for i, row in enumerate(rows):
        ext = row[:-1] + [0] * n_art + [row[-1]]
        if needs_art[i]:
            k = art_rows.index(i)
            ext[base_cols + k] = 1
            basis.append(base_cols + k)
        else:
            basis.append(2 * n + i)
        T.append(ext)

    if n_art:
        R = [0] * (ncols + 1)
        for i in art_rows:
            for j in range(ncols + 1):
                if j < base_cols or j == ncols:
                    R[j] -= T[i][j]
        status, R = _simplex(T, R, basis, ncols)
        for i, b in enumerate(basis):
            if b >= base_cols and T[i][-1] != 0:
                return LPResult("infeasible")
        # drive remaining artificials out of the basis
        i = 0
        while i < len(T):
            if basis[i] >= base_cols:
                j = next((j for j in range(base_cols) if T[i][j] != 0), None)
                if j is None:
                    del T[i]
                    del basis[i]
                    continue
                R = _pivot(T, R, i, j)
                basis[i] = j
            i += 1
        T = [row[:base_cols] + [row[-1]] for row in T]
        ncols = base_cols

    cost = [Fraction(0)] * (ncols + 1)
    for j in range(n):
        cost[j] = cc[j]
        cost[n + j] = -cc[j]
    red = list(cost)
    for i, b in enumerate(basis):
        cb = cost[b]
        if cb:
            piv = T[i][b]
            for j in range(ncols + 1):
                if T[i][j]:
                    red[j] -= cb * Fraction(T[i][j], piv)
    R = _scale(red)
    status, R = _simplex(T, R, basis, ncols)
    if status == "unbounded":
        return LPResult("unbounded")
    vals = [Fraction(0)] * ncols
    for i, b in enumerate(basis):
        vals[b] = Fraction(T[i][-1], T[i][b])
    x = tuple(vals[j] - vals[n + j] for j in range(n))
    value = sum((to_fraction(v) * xi for v, xi in zip(c, x)), Fraction(0)) if len(c) else Fraction(0)
    return LPResult("optimal", x, value)


def feasible_point(
    A_ub: Sequence[Sequence], b_ub: Sequence, A_eq: Sequence[Sequence] = (), b_eq: Sequence = (), nvars: int | None = None
) -> tuple[Fraction, ...] | None:
    if nvars is None:
        nvars = len(A_ub[0]) if A_ub else (len(A_eq[0]) if A_eq else 0)
    res = solve_lp([0] * nvars, A_ub, b_ub, A_eq, b_eq, nvars=nvars)
    return res.x if res.ok else None
