"""Exact convex polyhedra {x : a.x <= b, e.x = f} and Fourier-Motzkin projection."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch
from .lp import solve_lp
from .rational import as_vector, dot, primitive, primitive_signed, to_fraction

Row = tuple[tuple[int, ...], int]


def _norm_ineq(a: Sequence, b) -> Row | None | bool:
    """Primitive integer form of a.x <= b; None when trivial, False when infeasible."""
    p = primitive(list(a) + [b])
    a_p, b_p = p[:-1], p[-1]
    if not any(a_p):
        return None if b_p >= 0 else False
    return (tuple(a_p), b_p)


def _norm_eq(a: Sequence, b) -> Row | None | bool:
    p = primitive_signed(list(a) + [b])
    a_p, b_p = p[:-1], p[-1]
    if not any(a_p):
        return None if b_p == 0 else False
    return (tuple(a_p), b_p)


def _parse_rows(rows: Iterable, dim: int, what: str) -> list[tuple[tuple, Fraction]]:
    out = []
    for r in rows:
        if isinstance(r, Mapping):
            a, b = r["a"], r["b"]
        else:
            a, b = r
        a = as_vector(a)
        if len(a) != dim:
            raise DimensionMismatch(f"{what} row of length {len(a)} in dimension {dim}")
        out.append((a, to_fraction(b)))
    return out


@dataclass(frozen=True, eq=False)
class Polyhedron:
    """Finite intersection of closed half-spaces and hyperplanes in R^dim.

    Rows are stored as primitive integer vectors.  ``flagged_empty`` records a
    trivially contradictory row found during normalisation.
    """

    dim: int
    ineqs: tuple[Row, ...] = ()
    eqs: tuple[Row, ...] = ()
    flagged_empty: bool = False

    @staticmethod
    def make(dim: int, ineqs: Iterable = (), eqs: Iterable = ()) -> "Polyhedron":
        flagged = False
        ins: list[Row] = []
        for a, b in _parse_rows(ineqs, dim, "inequality"):
            r = _norm_ineq(a, b)
            if r is False:
                flagged = True
            elif r is not None and r not in ins:
                ins.append(r)
        es: list[Row] = []
        for a, b in _parse_rows(eqs, dim, "equality"):
            r = _norm_eq(a, b)
            if r is False:
                flagged = True
            elif r is not None and r not in es:
                es.append(r)
        return Polyhedron(dim, tuple(ins), tuple(es), flagged)

    @staticmethod
    def full(dim: int) -> "Polyhedron":
        return Polyhedron(dim)

    @staticmethod
    def empty(dim: int) -> "Polyhedron":
        return Polyhedron(dim, (), (), True)

    @staticmethod
    def point(x: Sequence) -> "Polyhedron":
        x = as_vector(x)
        d = len(x)
        return Polyhedron.make(d, eqs=[([1 if i == j else 0 for i in range(d)], x[j]) for j in range(d)])

    @staticmethod
    def from_cone(rows_ineq: Iterable[Sequence], rows_eq: Iterable[Sequence], apex: Sequence) -> "Polyhedron":
        """apex + {d : rows_ineq d <= 0, rows_eq d = 0}."""
        apex = as_vector(apex)
        d = len(apex)
        return Polyhedron.make(d, [(r, dot(r, apex)) for r in rows_ineq], [(r, dot(r, apex)) for r in rows_eq])

    # --- queries -------------------------------------------------------
    @property
    def is_full(self) -> bool:
        return not self.ineqs and not self.eqs and not self.flagged_empty

    def contains(self, x: Sequence) -> bool:
        if len(x) != self.dim:
            raise DimensionMismatch(f"point of length {len(x)} in dimension {self.dim}")
        if self.flagged_empty:
            return False
        return all(dot(a, x) <= b for a, b in self.ineqs) and all(dot(a, x) == b for a, b in self.eqs)

    def active(self, x: Sequence) -> list[int]:
        return [i for i, (a, b) in enumerate(self.ineqs) if dot(a, x) == b]

    def lp_data(self) -> tuple[list, list, list, list]:
        return ([a for a, _ in self.ineqs], [b for _, b in self.ineqs], [a for a, _ in self.eqs], [b for _, b in self.eqs])

    @cached_property
    def witness(self) -> tuple[Fraction, ...] | None:
        if self.flagged_empty:
            return None
        A, b, E, f = self.lp_data()
        res = solve_lp([0] * self.dim, A, b, E, f, nvars=self.dim)
        return res.x if res.ok else None

    @property
    def is_empty(self) -> bool:
        return self.witness is None

    def maximize(self, c: Sequence):
        A, b, E, f = self.lp_data()
        return solve_lp(c, A, b, E, f, maximize=True, nvars=self.dim)

    def relint_point(self) -> tuple[Fraction, ...] | None:
        """A point in the relative interior (exact)."""
        if self.is_empty:
            return None
        A, b, E, f = self.lp_data()
        eq_rows, eq_rhs = list(E), list(f)
        remaining = list(range(len(A)))
        while True:
            # maximise a common slack s on the remaining inequalities
            n = self.dim
            rows = [list(A[i]) + [1] for i in remaining] + [[0] * n + [1]]
            rhs = [b[i] for i in remaining] + [1]
            res = solve_lp([0] * n + [1], rows, rhs, [list(e) + [0] for e in eq_rows], eq_rhs, maximize=True, nvars=n + 1)
            s = res.value
            if s > 0 or not remaining:
                return res.x[:n]
            # some inequality is an implicit equality; find one and fix it
            moved = False
            for i in list(remaining):
                others = [j for j in remaining if j != i]
                r2 = solve_lp(
                    [-x for x in A[i]], [A[j] for j in others] + [A[i]], [b[j] for j in others] + [b[i]], eq_rows, eq_rhs, maximize=True, nvars=n
                )
                # max of -(a.x) = -min a.x ; implicit equality iff min a.x == b
                if r2.ok and -r2.value == b[i]:
                    eq_rows.append(A[i])
                    eq_rhs.append(b[i])
                    remaining.remove(i)
                    moved = True
                    break
            if not moved:  # pragma: no cover
                return res.x[:n]

    # --- constructions ---------------------------------------------------
    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        if other.dim != self.dim:
            raise DimensionMismatch("polyhedra live in different spaces")
        return Polyhedron.make(self.dim, self.ineqs + other.ineqs, self.eqs + other.eqs)._with_flag(self.flagged_empty or other.flagged_empty)

    def _with_flag(self, flag: bool) -> "Polyhedron":
        if flag and not self.flagged_empty:
            return Polyhedron(self.dim, self.ineqs, self.eqs, True)
        return self

    def embed(self, total_dim: int, coords: Sequence[int]) -> "Polyhedron":
        """Lift into R^total_dim, placing own coordinate i at position coords[i]."""
        if len(coords) != self.dim:
            raise DimensionMismatch("coordinate map has wrong length")

        def lift(a):
            out = [0] * total_dim
            for i, c in enumerate(coords):
                out[c] = a[i]
            return out

        return Polyhedron.make(total_dim, [(lift(a), b) for a, b in self.ineqs], [(lift(a), b) for a, b in self.eqs])._with_flag(
            self.flagged_empty
        )

    def product(self, other: "Polyhedron") -> "Polyhedron":
        d = self.dim + other.dim
        return self.embed(d, range(self.dim)).intersect(other.embed(d, range(self.dim, d)))

    def permute(self, order: Sequence[int]) -> "Polyhedron":
        """New coordinates are old coordinates ``order``."""
        def perm(a):
            return [a[i] for i in order]

        return Polyhedron.make(self.dim, [(perm(a), b) for a, b in self.ineqs], [(perm(a), b) for a, b in self.eqs])._with_flag(
            self.flagged_empty
        )

    def slice(self, fixed: Mapping[int, object]) -> "Polyhedron":
        """Fix some coordinates; the result lives in the remaining ones (in order)."""
        keep = [i for i in range(self.dim) if i not in fixed]
        fx = {i: to_fraction(v) for i, v in fixed.items()}

        def cut(a, b):
            return [a[i] for i in keep], b - sum(a[i] * v for i, v in fx.items())

        return Polyhedron.make(len(keep), [cut(a, b) for a, b in self.ineqs], [cut(a, b) for a, b in self.eqs])._with_flag(
            self.flagged_empty
        )

    def translate(self, v: Sequence) -> "Polyhedron":
        v = as_vector(v)
        return Polyhedron.make(self.dim, [(a, b + dot(a, v)) for a, b in self.ineqs], [(a, b + dot(a, v)) for a, b in self.eqs])._with_flag(
            self.flagged_empty
        )

    def linear_map(self, matrix: Sequence[Sequence]) -> "Polyhedron":
        """Pre-image {x : M x in self} for M of shape dim x k."""
        k = len(matrix[0]) if matrix else 0

        def pull(a):
            return [sum(a[i] * matrix[i][j] for i in range(self.dim)) for j in range(k)]

        return Polyhedron.make(k, [(pull(a), b) for a, b in self.ineqs], [(pull(a), b) for a, b in self.eqs])._with_flag(self.flagged_empty)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        d = self.dim
        A = np.array([a for a, _ in self.ineqs], dtype=float).reshape(len(self.ineqs), d)
        b = np.array([float(b) for _, b in self.ineqs], dtype=float)
        E = np.array([a for a, _ in self.eqs], dtype=float).reshape(len(self.eqs), d)
        f = np.array([float(b) for _, b in self.eqs], dtype=float)
        return A, b, E, f

    def key(self) -> tuple:
        return (self.dim, tuple(sorted(self.ineqs)), tuple(sorted(self.eqs)), self.flagged_empty)

    def __eq__(self, other) -> bool:
        return isinstance(other, Polyhedron) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"Polyhedron(dim={self.dim}, ineqs={list(self.ineqs)}, eqs={list(self.eqs)}{', EMPTY' if self.flagged_empty else ''})"

    def remove_redundant(self) -> "Polyhedron":
        if self.is_empty:
            return Polyhedron.empty(self.dim)
        rows = list(self.ineqs)
        eqs = list(self.eqs)
        kept = _prune(rows, eqs, self.dim, list(range(self.dim)))
        return Polyhedron(self.dim, tuple(kept), tuple(eqs), False)


def _dedupe(rows: list[Row]) -> list[Row]:
    best: dict[tuple, tuple[Fraction, Row]] = {}
    for a, b in rows:
        pa = primitive(a)
        g = a[0] // pa[0] if pa[0] else next(x // y for x, y in zip(a, pa) if y)
        val = Fraction(b, g)
        if pa not in best or val < best[pa][0]:
            best[pa] = (val, (a, b))
    return [v[1] for v in best.values()]


def _prune(rows: list[Row], eqs: list[Row], dim: int, cols: list[int]) -> list[Row]:
    """Remove LP-redundant inequalities (exact)."""
    def sub(a):
        return [a[c] for c in cols]

    kept = list(rows)
    i = 0
    while i < len(kept):
        a, b = kept[i]
        others = kept[:i] + kept[i + 1 :]
        res = solve_lp(sub(a), [sub(r[0]) for r in others], [r[1] for r in others], [sub(e[0]) for e in eqs], [e[1] for e in eqs], maximize=True, nvars=len(cols))
        if res.ok and res.value <= b:
            kept.pop(i)
        else:
            i += 1
    return kept


def project(P: Polyhedron, keep: Sequence[int]) -> Polyhedron:
    """Image of P under the coordinate projection onto ``keep`` (Fourier-Motzkin)."""
    keep = list(keep)
    if P.is_empty:
        return Polyhedron.empty(len(keep))
    elim = [i for i in range(P.dim) if i not in keep]
    ineqs: list[Row] = list(P.ineqs)
    eqs: list[Row] = list(P.eqs)
    live = list(range(P.dim))
    for v in elim:
        live.remove(v)
        e = min((r for r in eqs if r[0][v] != 0), key=lambda r: (abs(r[0][v]), r), default=None)
        if e is not None:
            eqs.remove(e)
            ea, eb = e
            av = ea[v]
            sg = 1 if av > 0 else -1
            new_eqs = []
            for a, b in eqs:
                c = a[v]
                if c:
                    r = _norm_eq([x * av - c * y for x, y in zip(a, ea)], b * av - c * eb)
                    if r is False:
                        return Polyhedron.empty(len(keep))
                    if r is not None:
                        new_eqs.append(r)
                else:
                    new_eqs.append((a, b))
            new_in = []
            for a, b in ineqs:
                c = a[v]
                if c:
                    r = _norm_ineq([x * abs(av) - c * sg * y for x, y in zip(a, ea)], b * abs(av) - c * sg * eb)
                    if r is False:
                        return Polyhedron.empty(len(keep))
                    if r is not None:
                        new_in.append(r)
                else:
                    new_in.append((a, b))
            eqs = list(dict.fromkeys(new_eqs))
            ineqs = _dedupe(new_in)
        else:
            pos = [r for r in ineqs if r[0][v] > 0]
            neg = [r for r in ineqs if r[0][v] < 0]
            new_in = [r for r in ineqs if r[0][v] == 0]
            for pa, pb in pos:
                for na, nb in neg:
                    cp, cn = pa[v], -na[v]
                    r = _norm_ineq([cn * x + cp * y for x, y in zip(pa, na)], cn * pb + cp * nb)
                    if r is False:
                        return Polyhedron.empty(len(keep))
                    if r is not None:
                        new_in.append(r)
            ineqs = _dedupe(new_in)
        if len(ineqs) > 1:
            ineqs = _prune(ineqs, eqs, P.dim, live)

    def cut(a):
        return [a[i] for i in keep]

    return Polyhedron.make(len(keep), [(cut(a), b) for a, b in ineqs], [(cut(a), b) for a, b in eqs])
