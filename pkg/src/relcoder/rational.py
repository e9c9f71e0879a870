"""Exact rational helpers: parsing, integer scaling and small dense linear algebra."""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

Scalar = Fraction
Vec = tuple  # tuple of int or Fraction


def to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v.strip())
    if isinstance(v, float):
        return Fraction(v)
    if hasattr(v, "numerator") and hasattr(v, "denominator"):
        return Fraction(int(v.numerator), int(v.denominator))
    try:
        import numpy as np

        if isinstance(v, np.integer):
            return Fraction(int(v))
        if isinstance(v, np.floating):
            return Fraction(float(v))
    except ImportError:  # pragma: no cover
        pass
    raise TypeError(f"cannot interpret {v!r} as a rational scalar")


def as_vector(xs: Iterable) -> tuple[Fraction, ...]:
    return tuple(to_fraction(x) for x in xs)


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def is_zero(v: Sequence) -> bool:
    return all(x == 0 for x in v)


def primitive(v: Sequence) -> tuple[int, ...]:
    """Positive rescaling of ``v`` to a primitive integer vector."""
    if all(type(x) is int for x in v):
        ints = list(v)
    else:
        fs = [to_fraction(x) for x in v]
        den = lcm(*(f.denominator for f in fs)) if fs else 1
        ints = [int(f * den) for f in fs]
    g = gcd(*ints) if ints else 0
    if g == 0:
        return tuple(0 for _ in ints)
    return tuple(i // g for i in ints)


def primitive_signed(v: Sequence) -> tuple[int, ...]:
    """Primitive integer vector with first nonzero entry positive."""
    p = primitive(v)
    for x in p:
        if x != 0:
            if x < 0:
                return tuple(-y for y in p)
            break
    return p


def rref(rows: Sequence[Sequence], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    m = [[to_fraction(x) for x in r] for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r >= len(m):
            break
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(rows: Sequence[Sequence], ncols: int) -> int:
    if not rows:
        return 0
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[tuple[int, ...]]:
    """Integer basis of {d : row . d = 0 for every row}."""
    if not rows:
        return [tuple(1 if i == j else 0 for i in range(ncols)) for j in range(ncols)]
    red, piv = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, piv):
            v[p] = -row[f]
        basis.append(primitive_signed(v))
    return basis


def row_basis(rows: Sequence[Sequence], ncols: int) -> list[tuple[int, ...]]:
    """Canonical integer basis (reduced echelon, scaled primitive) of the row span."""
    if not rows:
        return []
    red, _ = rref(rows, ncols)
    return [primitive_signed(r) for r in red]


def solve_square(a: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    n = len(a)
    aug = [list(map(to_fraction, row)) + [to_fraction(bi)] for row, bi in zip(a, b)]
    red, piv = rref(aug, n + 1)
    if len(piv) != n or piv[-1] == n:
        return None
    return [red[i][n] for i in range(n)]


def project_onto_span(v: Sequence, basis: Sequence[Sequence]) -> list[Fraction]:
    """Orthogonal projection of ``v`` onto span(basis); basis rows must be independent."""
    if not basis:
        return [Fraction(0)] * len(v)
    k = len(basis)
    gram = [[to_fraction(dot(basis[i], basis[j])) for j in range(k)] for i in range(k)]
    rhs = [to_fraction(dot(basis[i], v)) for i in range(k)]
    coef = solve_square(gram, rhs)
    if coef is None:
        raise ValueError("basis is not linearly independent")
    out = [Fraction(0)] * len(v)
    for c, bvec in zip(coef, basis):
        if c:
            for j, x in enumerate(bvec):
                out[j] += c * x
    return out


def project_onto_null(v: Sequence, rows: Sequence[Sequence]) -> list[Fraction]:
    """Orthogonal projection of ``v`` onto {d : rows d = 0}."""
    if not rows:
        return [to_fraction(x) for x in v]
    basis = row_basis(rows, len(v))
    p = project_onto_span(v, basis)
    return [to_fraction(x) - y for x, y in zip(v, p)]


def rationalize(x: float, max_den: int = 10**6) -> Fraction:
    return Fraction(x).limit_denominator(max_den)


def frac_str(x) -> str:
    f = to_fraction(x)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
