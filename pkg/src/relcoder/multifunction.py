"""Polyhedral set-valued maps R^n => R^m, stored through their graphs."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyGraph, EmptyRestriction, EmptyValue
from .polyhedra import Polyhedron, project
from .qp import KKTProjector
from .rational import as_vector, to_fraction


@dataclass(frozen=True, eq=False)
class PolyMultimap:
    """S : R^n => R^m with gph S the union of ``pieces`` (coordinates (x, y))."""

    n: int
    m: int
    pieces: tuple[Polyhedron, ...]

    @staticmethod
    def make(n: int, m: int, pieces: Sequence[Polyhedron]) -> "PolyMultimap":
        for P in pieces:
            if P.dim != n + m:
                raise DimensionMismatch(f"graph piece of dimension {P.dim}, expected {n + m}")
        kept = tuple(P for P in pieces if not P.is_empty)
        if not kept:
            raise EmptyGraph("every graph piece is empty")
        return PolyMultimap(n, m, kept)

    @staticmethod
    def linear(A: Sequence[Sequence], offset: Sequence | None = None) -> "PolyMultimap":
        """Graph of x -> A x (+ offset)."""
        m = len(A)
        n = len(A[0]) if m else 0
        c = as_vector(offset) if offset is not None else (Fraction(0),) * m
        eqs = []
        for i in range(m):
            row = [-to_fraction(v) for v in A[i]] + [1 if j == i else 0 for j in range(m)]
            eqs.append((row, c[i]))
        return PolyMultimap.make(n, m, [Polyhedron.make(n + m, [], eqs)])

    @staticmethod
    def identity(n: int) -> "PolyMultimap":
        return PolyMultimap.linear([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @staticmethod
    def constant(n: int, value: Polyhedron) -> "PolyMultimap":
        m = value.dim
        return PolyMultimap.make(n, m, [value.embed(n + m, range(n, n + m))])

    # --- membership ------------------------------------------------------
    def graph_contains(self, x: Sequence, y: Sequence) -> bool:
        z = tuple(as_vector(x)) + tuple(as_vector(y))
        return any(P.contains(z) for P in self.pieces)

    def key(self) -> tuple:
        return (self.n, self.m, tuple(sorted(P.key() for P in self.pieces)))

    def same_pieces(self, other: "PolyMultimap") -> bool:
        return self.key() == other.key()

    def __repr__(self) -> str:
        return f"PolyMultimap(n={self.n}, m={self.m}, pieces={len(self.pieces)})"

    # --- float evaluation ---------------------------------------------------
    @cached_property
    def _slicers(self) -> list[tuple]:
        out = []
        for P in self.pieces:
            A, b, E, f = P.arrays()
            Ax, Ay = A[:, : self.n], A[:, self.n :]
            Ex, Ey = E[:, : self.n], E[:, self.n :]
            out.append((KKTProjector(Ay, Ey), Ax, b, Ex, f))
        return out

    def distances(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """d(Y_q, S(X_q)) for each row pair, +inf where the value is empty."""
        X = np.atleast_2d(np.asarray(X, dtype=float)).reshape(-1, self.n)
        Y = np.atleast_2d(np.asarray(Y, dtype=float)).reshape(-1, self.m)
        best = np.full(len(X), np.inf)
        for proj, Ax, b, Ex, f in self._slicers:
            c = b[None, :] - X @ Ax.T
            g = f[None, :] - X @ Ex.T
            d = proj.distance(Y, c, g)
            best = np.minimum(best, d)
        return best

    def nearest_values(self, X: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Nearest points of S(X_q) to Y_q and the distances."""
        X = np.atleast_2d(np.asarray(X, dtype=float)).reshape(-1, self.n)
        Y = np.atleast_2d(np.asarray(Y, dtype=float)).reshape(-1, self.m)
        best = np.full(len(X), np.inf)
        pts = np.full_like(Y, np.nan)
        for proj, Ax, b, Ex, f in self._slicers:
            c = b[None, :] - X @ Ax.T
            g = f[None, :] - X @ Ex.T
            P, ok = proj.project(Y, c, g)
            d = np.where(ok, np.linalg.norm(P - Y, axis=1), np.inf)
            better = d < best
            best[better] = d[better]
            pts[better] = P[better]
        return pts, best


def _full(d: int, P: Polyhedron | None) -> Polyhedron:
    if P is None:
        return Polyhedron.full(d)
    if P.dim != d:
        raise DimensionMismatch(f"constraint set of dimension {P.dim}, expected {d}")
    return P


def restrict(S: PolyMultimap, Omega: Polyhedron | None = None, Theta: Polyhedron | None = None) -> PolyMultimap:
    """gph S restricted to Omega x Theta."""
    Om = _full(S.n, Omega)
    Th = _full(S.m, Theta)
    box = Om.product(Th)
    pieces = [P.intersect(box) for P in S.pieces]
    kept = tuple(P for P in pieces if not P.is_empty)
    if not kept:
        raise EmptyRestriction("the restriction has an empty graph")
    return PolyMultimap(S.n, S.m, kept)


def invert(S: PolyMultimap) -> PolyMultimap:
    order = list(range(S.n, S.n + S.m)) + list(range(S.n))
    return PolyMultimap(S.m, S.n, tuple(P.permute(order) for P in S.pieces))


def compose(S1: PolyMultimap, S2: PolyMultimap) -> PolyMultimap:
    """Graph of z in S2(S1(x)), one projected piece per pair of pieces."""
    if S1.m != S2.n:
        raise DimensionMismatch(f"cannot compose R^{S1.n}=>R^{S1.m} with R^{S2.n}=>R^{S2.m}")
    n, m, p = S1.n, S1.m, S2.m
    total = n + m + p
    keep = list(range(n)) + list(range(n + m, total))
    out = []
    for P in S1.pieces:
        lp = P.embed(total, range(n + m))
        for Q in S2.pieces:
            joint = lp.intersect(Q.embed(total, range(n, total)))
            if joint.is_empty:
                continue
            out.append(project(joint, keep))
    return PolyMultimap.make(n, p, out)


def msum(S1: PolyMultimap, S2: PolyMultimap) -> PolyMultimap:
    """Graph of y1 + y2 with y1 in S1(x), y2 in S2(x)."""
    if (S1.n, S1.m) != (S2.n, S2.m):
        raise DimensionMismatch("summands must map between the same spaces")
    n, m = S1.n, S1.m
    total = n + 2 * m  # (x, y, y1)
    out = []
    for P in S1.pieces:
        lp = P.embed(total, list(range(n)) + list(range(n + m, total)))
        for Q in S2.pieces:
            # rows a_x x + a_y y2 <= b with y2 = y - y1
            def sub(a):
                return list(a[:n]) + list(a[n:]) + [-v for v in a[n:]]

            lq = Polyhedron.make(total, [(sub(a), b) for a, b in Q.ineqs], [(sub(a), b) for a, b in Q.eqs])
            joint = lp.intersect(lq)
            if joint.is_empty:
                continue
            out.append(project(joint, list(range(n + m))))
    return PolyMultimap.make(n, m, out)


def value_at(S: PolyMultimap, x: Sequence) -> list[Polyhedron]:
    x = as_vector(x)
    if len(x) != S.n:
        raise DimensionMismatch(f"point of length {len(x)} for a map on R^{S.n}")
    fixed = {i: v for i, v in enumerate(x)}
    out = []
    for P in S.pieces:
        sl = P.slice(fixed)
        if not sl.is_empty:
            out.append(sl)
    return out


def domain(S: PolyMultimap) -> list[Polyhedron]:
    return [project(P, range(S.n)) for P in S.pieces]


def image(S: PolyMultimap) -> list[Polyhedron]:
    return [project(P, range(S.n, S.n + S.m)) for P in S.pieces]


def preimage(S: PolyMultimap, Theta: Polyhedron) -> list[Polyhedron]:
    """S^{-1}(Theta) as a union of polyhedra in R^n."""
    box = Polyhedron.full(S.n).product(Theta)
    out = []
    for P in S.pieces:
        Q = P.intersect(box)
        if not Q.is_empty:
            out.append(project(Q, range(S.n)))
    return out


def dist_to_value(S: PolyMultimap, x: Sequence, y: Sequence) -> float:
    """Euclidean distance from y to S(x); raises EmptyValue when S(x) is empty."""
    xs = list(x)
    if len(xs) != S.n or len(y) != S.m:
        raise DimensionMismatch("point dimensions do not match the map")
    exact = all(isinstance(v, (int, Fraction)) for v in list(xs) + list(y))
    if exact:
        slices = value_at(S, xs)
        if not slices:
            raise EmptyValue(f"S({list(map(str, xs))}) is empty")
        if any(Q.contains(as_vector(y)) for Q in slices):
            return 0.0
    d = S.distances(np.array([[float(v) for v in xs]]), np.array([[float(v) for v in y]]))[0]
    if not np.isfinite(d):
        raise EmptyValue("the value at this point is empty")
    return float(d)
