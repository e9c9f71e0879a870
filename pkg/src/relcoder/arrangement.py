"""Face enumeration for central hyperplane arrangements.

Cells are relatively open convex cones described by a sign vector.  Every
cell carries an exact witness point in its relative interior, which lets most
refinement steps avoid linear programming altogether.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog, nnls

from .lp import solve_lp
from .rational import dot, nullspace, primitive, project_onto_null

IntVec = tuple[int, ...]


@dataclass(frozen=True)
class Cell:
    signs: tuple[int, ...]
    witness: tuple[Fraction, ...]


@dataclass
class _State:
    signs: list[int]
    witness: IntVec  # primitive integer point of the cell
    eqs: list[IntVec]
    strict: list[IntVec]  # oriented rows g with g.d < 0 on the cell


def _exact_gordan(G: list[list[int]], supp: list[int], k: int) -> bool:
    """True if some lam >= 0, lam != 0 on supp has sum lam_i G_i = 0 (unique up to scale)."""
    basis = nullspace([[G[i][j] for i in supp] for j in range(k)], len(supp))
    if len(basis) != 1:
        return False
    lam = basis[0]
    if sum(lam) < 0:
        lam = tuple(-v for v in lam)
    return all(v >= 0 for v in lam) and any(lam)


def _float_guess(dim: int, strict: list[IntVec], eqs: list[IntVec]):
    """Float answer certified in exact arithmetic.

    Returns ("point", d) or ("empty", None) when the certificate checks out,
    and None when the caller has to fall back to the exact simplex.
    Works in coordinates of an integer basis of {eqs = 0}, so eqs hold exactly.
    """
    N = _null_basis(dim, tuple(eqs))
    k = len(N)
    if k == 0:
        return ("empty", None)
    G = [[dot(g, v) for v in N] for g in strict]  # reduced rows, exact integers
    Gf = np.array(G, dtype=float).reshape(len(G), k)
    Gs = Gf / np.maximum(np.abs(Gf).max(axis=1, keepdims=True), 1.0)
    # Gordan: lam >= 0, sum lam = 1, G^T lam = 0 proves the open system empty
    A = np.vstack([Gs.T, np.ones((1, len(G)))])
    rhs = np.zeros(k + 1)
    rhs[-1] = 1.0
    lam, resid = nnls(A, rhs)
    if resid < 1e-9:
        supp = [i for i, v in enumerate(lam) if v > 1e-12]
        if _exact_gordan(G, supp, k):
            return ("empty", None)
        return None
    c = np.zeros(k + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.hstack([Gs, np.ones((len(G), 1))]), b_ub=np.zeros(len(G)),
                  bounds=[(-1.0, 1.0)] * k + [(None, 1.0)], method="highs")
    if res.status != 0 or -res.fun <= 1e-9:
        return None
    for den in (10**4, 10**8):
        coef = [Fraction(v).limit_denominator(den) for v in res.x[:k]]
        if all(dot(g, coef) < 0 for g in G):
            return ("point", [sum((cf * v[i] for cf, v in zip(coef, N)), Fraction(0)) for i in range(dim)])
    return None


def _strict_point(dim: int, strict: list[IntVec], eqs: list[IntVec]) -> IntVec | None:
    """A primitive integer point with every strict row negative and every eq row zero, or None."""
    if not strict:
        return (0,) * dim
    guess = _float_guess(dim, strict, eqs)
    if guess is not None:
        return None if guess[1] is None else primitive(guess[1])
    rows = [list(g) + [1] for g in strict] + [[0] * dim + [1]]
    rhs = [0] * len(strict) + [1]
    res = solve_lp([0] * dim + [1], rows, rhs, [list(e) + [0] for e in eqs], [0] * len(eqs), maximize=True, nvars=dim + 1)
    if res.ok and res.value > 0:
        return primitive(res.x[:dim])
    return None


@lru_cache(maxsize=4096)
def _null_basis(dim: int, eqs: tuple[IntVec, ...]) -> tuple[IntVec, ...]:
    if not eqs:
        return tuple(tuple(int(i == j) for i in range(dim)) for j in range(dim))
    return tuple(nullspace(eqs, dim))


@lru_cache(maxsize=16384)
def _projected_normal(h: IntVec, eqs: tuple[IntVec, ...]) -> IntVec:
    """h projected onto {eqs = 0}, rescaled to a primitive integer vector."""
    return primitive(project_onto_null(h, eqs)) if eqs else h


def _idot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def _step(strict: list[IntVec], w: IntVec, p: IntVec, sign: int) -> IntVec:
    """w + sign * t * p with t small enough to keep every strict row negative."""
    t = Fraction(1)
    for g in strict:
        gp = _idot(g, p)
        if gp:
            lim = Fraction(-_idot(g, w), 2 * abs(gp))
            if lim < t:
                t = lim
    a, b = t.numerator * sign, t.denominator
    return primitive([b * x + a * y for x, y in zip(w, p)])


def _reflect(w: IntVec, p: IntVec, hp: int, f0: int, strict: list[IntVec]) -> IntVec | None:
    """Cheap guess for the far side of a hyperplane: mirror the witness along p, then keep it if strict rows allow."""
    for num, den in ((2, 1), (3, 2), (11, 10)):
        # w - (num/den) f0 / hp * p, scaled by den * hp > 0
        d = [den * hp * x - num * f0 * y for x, y in zip(w, p)]
        if all(_idot(g, d) < 0 for g in strict):
            return primitive(d)
    return None


def enumerate_cells(
    dim: int,
    hyperplanes: Sequence[IntVec],
    admissible: Callable[[Sequence[int]], bool] | None = None,
    strict: Sequence[IntVec] = (),
    witness: Sequence[Fraction] | None = None,
) -> list[Cell]:
    """All nonempty cells of the arrangement inside the open cone {strict rows < 0}.

    ``admissible`` receives a partial sign vector (over the first k hyperplanes)
    and may prune whole branches.
    """
    strict = [tuple(g) for g in strict]
    if witness is None:
        w = _strict_point(dim, strict, [])
        if w is None:
            return []
    else:
        w = primitive(witness)
    cells = [_State([], w, [], list(strict))]
    for h in hyperplanes:
        h = tuple(h)
        nxt: list[_State] = []
        for c in cells:
            p = _projected_normal(h, tuple(c.eqs))
            children: list[_State] = []
            if not any(p):
                children.append(_State(c.signs + [0], c.witness, c.eqs, c.strict))
            else:
                f0 = _idot(h, c.witness)
                neg_h = tuple(-x for x in h)
                if f0 == 0:
                    minus = _step(c.strict, c.witness, p, -1)
                    plus = _step(c.strict, c.witness, p, 1)
                    children.append(_State(c.signs + [-1], minus, c.eqs, c.strict + [h]))
                    children.append(_State(c.signs + [0], c.witness, c.eqs + [h], c.strict))
                    children.append(_State(c.signs + [1], plus, c.eqs, c.strict + [neg_h]))
                else:
                    s0 = 1 if f0 > 0 else -1
                    same = _State(c.signs + [s0], c.witness, c.eqs, c.strict + [neg_h if s0 > 0 else h])
                    opp_row = h if s0 > 0 else neg_h  # want s0 * h.d < 0
                    wanted = admissible is None or admissible(c.signs + [0]) or admissible(c.signs + [-s0])
                    d1 = _reflect(c.witness, p, _idot(h, p), f0, c.strict) if wanted else None
                    if d1 is None and wanted:
                        d1 = _strict_point(dim, c.strict + [opp_row], c.eqs)
                    children.append(same)
                    if d1 is not None:
                        a, b = abs(_idot(h, d1)), abs(f0)
                        zero = primitive([a * x + b * y for x, y in zip(c.witness, d1)])
                        children.append(_State(c.signs + [0], zero, c.eqs + [h], c.strict))
                        children.append(_State(c.signs + [-s0], d1, c.eqs, c.strict + [opp_row]))
            for ch in children:
                if admissible is None or admissible(ch.signs):
                    nxt.append(ch)
        cells = nxt
    return [Cell(tuple(c.signs), tuple(_tidy(c.witness))) for c in cells]


def _tidy(w: Sequence[Fraction]) -> list[Fraction]:
    """Rescale a witness to small integers when possible (keeps the ray)."""
    if not any(w):
        return list(w)
    return [Fraction(x) for x in primitive(w)]


def signed_hyperplane(row: Sequence) -> tuple[IntVec, int]:
    """Normalise a hyperplane normal; returns (normal, orientation) with row = orientation * c * normal."""
    p = primitive(row)
    first = next(x for x in p if x != 0)
    if first < 0:
        return tuple(-x for x in p), -1
    return p, 1


def sign_of(v) -> int:
    return (v > 0) - (v < 0)
