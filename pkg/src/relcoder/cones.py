"""Polyhedral cones with both representations kept in canonical integer form.

A cone is ``{d : a.d <= 0 (a in ineqs), e.d = 0 (e in eqs)}`` and equally
``cone(gens) + span(lin)``.  Conversion between the two uses the incremental
double description method with the combinatorial adjacency test.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidCone
from .rational import dot, nullspace, primitive, primitive_signed, project_onto_null, rank, row_basis, to_fraction

IntVec = tuple[int, ...]


def _check_rows(rows: Iterable[Sequence], dim: int, what: str) -> list[IntVec]:
    out = []
    for r in rows:
        r = tuple(r)
        if len(r) != dim:
            raise DimensionMismatch(f"{what} row of length {len(r)} in dimension {dim}")
        try:
            p = primitive(r)
        except (TypeError, ValueError) as exc:
            raise InvalidCone(f"non-rational entry in {what}: {r!r}") from exc
        out.append(p)
    return out


def double_description(dim: int, ineqs: Sequence[IntVec], eqs: Sequence[IntVec] = ()) -> tuple[list[IntVec], list[IntVec]]:
    """Extreme rays and a lineality basis of {d : ineqs d <= 0, eqs d = 0}."""
    lin = nullspace([e for e in eqs if any(e)], dim)
    rays: list[IntVec] = []
    zs: list[int] = []
    for idx, a in enumerate(ineqs):
        bit = 1 << idx
        vl = [dot(a, l) for l in lin]
        k = next((i for i, v in enumerate(vl) if v), None)
        if k is not None:
            l0 = lin[k]
            s = vl[k]
            sg = 1 if s > 0 else -1
            abs_s = abs(s)
            new_lin = []
            for i, (l, v) in enumerate(zip(lin, vl)):
                if i == k:
                    continue
                if v:
                    l = primitive_signed([s * x - v * y for x, y in zip(l, l0)])
                new_lin.append(l)
            new_rays, new_zs = [], []
            for r, z in zip(rays, zs):
                v = dot(a, r)
                if v:
                    r = primitive([abs_s * x - sg * v * y for x, y in zip(r, l0)])
                new_rays.append(r)
                new_zs.append(z | bit)
            new_rays.append(tuple(-sg * x for x in l0))
            new_zs.append(bit - 1)
            lin, rays, zs = new_lin, new_rays, new_zs
            continue
        vals = [dot(a, r) for r in rays]
        pos = [i for i, v in enumerate(vals) if v > 0]
        neg = [i for i, v in enumerate(vals) if v < 0]
        new_rays = []
        new_zs = []
        for i, v in enumerate(vals):
            if v < 0:
                new_rays.append(rays[i])
                new_zs.append(zs[i])
            elif v == 0:
                new_rays.append(rays[i])
                new_zs.append(zs[i] | bit)
        nr = len(rays)
        for p in pos:
            for q in neg:
                z = zs[p] & zs[q]
                adjacent = True
                for t in range(nr):
                    if t != p and t != q and (zs[t] & z) == z:
                        adjacent = False
                        break
                if adjacent:
                    vp, vq = vals[p], vals[q]
                    r = primitive([vp * y - vq * x for x, y in zip(rays[p], rays[q])])
                    new_rays.append(r)
                    new_zs.append(z | bit)
        rays, zs = new_rays, new_zs
    return rays, lin


def _canonical_vrep(dim: int, gens: Sequence[Sequence], lin: Sequence[Sequence]) -> tuple[tuple[IntVec, ...], tuple[IntVec, ...]]:
    lin_basis = row_basis([l for l in lin if any(l)], dim)
    out = set()
    for g in gens:
        if lin_basis:
            g = project_onto_null(g, lin_basis)
        p = primitive(g)
        if any(p):
            out.add(p)
    return tuple(sorted(out)), tuple(lin_basis)


def _minimal_gens(dim: int, gens: Sequence[IntVec], lin: Sequence[IntVec]) -> tuple[tuple[IntVec, ...], tuple[IntVec, ...]]:
    """Extreme rays and lineality of cone(gens) + span(lin), by two conversions."""
    rays_p, lin_p = double_description(dim, gens, lin)
    rays, lins = double_description(dim, rays_p, lin_p)
    return _canonical_vrep(dim, rays, lins)


@dataclass(frozen=True, eq=False)
class PolyCone:
    """Closed convex polyhedral cone in R^dim with both representations."""

    dim: int
    ineqs: tuple[IntVec, ...]
    eqs: tuple[IntVec, ...]
    gens: tuple[IntVec, ...]
    lin: tuple[IntVec, ...]
    _key: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_key", (self.dim, self.lin, self.gens))

    @staticmethod
    def from_hrep(dim: int, ineqs: Iterable[Sequence] = (), eqs: Iterable[Sequence] = ()) -> "PolyCone":
        a = [r for r in _check_rows(ineqs, dim, "inequality") if any(r)]
        e = [r for r in _check_rows(eqs, dim, "equality") if any(r)]
        a = sorted(set(a))
        rays, lin = double_description(dim, a, e)
        gens, linb = _canonical_vrep(dim, rays, lin)
        prays, plin = double_description(dim, gens, linb)
        hin, heq = _canonical_vrep(dim, prays, plin)
        return PolyCone(dim, hin, heq, gens, linb)

    @staticmethod
    def from_vrep(dim: int, gens: Iterable[Sequence] = (), lin: Iterable[Sequence] = ()) -> "PolyCone":
        g = [r for r in _check_rows(gens, dim, "generator") if any(r)]
        l = [r for r in _check_rows(lin, dim, "lineality") if any(r)]
        g = sorted(set(g))
        prays, plin = double_description(dim, g, l)
        hin, heq = _canonical_vrep(dim, prays, plin)
        rays, lins = double_description(dim, hin, heq)
        gens_c, lin_c = _canonical_vrep(dim, rays, lins)
        return PolyCone(dim, hin, heq, gens_c, lin_c)

    @staticmethod
    def zero(dim: int) -> "PolyCone":
        basis = tuple(tuple(1 if i == j else 0 for i in range(dim)) for j in range(dim))
        return PolyCone(dim, (), basis, (), ())

    @staticmethod
    def full(dim: int) -> "PolyCone":
        basis = tuple(tuple(1 if i == j else 0 for i in range(dim)) for j in range(dim))
        return PolyCone(dim, (), (), (), basis)

    # --- comparisons -------------------------------------------------
    def __eq__(self, other) -> bool:
        return isinstance(other, PolyCone) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    @property
    def key(self) -> tuple:
        return self._key

    @property
    def is_trivial(self) -> bool:
        return not self.gens and not self.lin

    @property
    def is_subspace(self) -> bool:
        return not self.gens

    @property
    def dimension(self) -> int:
        return rank(list(self.gens) + list(self.lin), self.dim) if (self.gens or self.lin) else 0

    def contains(self, v: Sequence) -> bool:
        if len(v) != self.dim:
            raise DimensionMismatch(f"vector of length {len(v)} in dimension {self.dim}")
        return all(dot(a, v) <= 0 for a in self.ineqs) and all(dot(e, v) == 0 for e in self.eqs)

    def contains_cone(self, other: "PolyCone") -> bool:
        if other.dim != self.dim:
            raise DimensionMismatch("cones live in different spaces")
        if not all(self.contains(g) for g in other.gens):
            return False
        for l in other.lin:
            if any(dot(a, l) != 0 for a in self.ineqs) or any(dot(e, l) != 0 for e in self.eqs):
                return False
        return True

    def intersect(self, other: "PolyCone") -> "PolyCone":
        if other.dim != self.dim:
            raise DimensionMismatch("cones live in different spaces")
        return PolyCone.from_hrep(self.dim, self.ineqs + other.ineqs, self.eqs + other.eqs)

    def add_rows(self, ineqs: Iterable[Sequence] = (), eqs: Iterable[Sequence] = ()) -> "PolyCone":
        return PolyCone.from_hrep(self.dim, list(self.ineqs) + list(ineqs), list(self.eqs) + list(eqs))

    def all_rays(self) -> list[IntVec]:
        """Extreme rays together with both signs of each lineality vector."""
        return list(self.gens) + list(self.lin) + [tuple(-x for x in l) for l in self.lin]

    def gens_array(self) -> np.ndarray:
        return np.array(self.gens, dtype=float).reshape(len(self.gens), self.dim)

    def lin_array(self) -> np.ndarray:
        return np.array(self.lin, dtype=float).reshape(len(self.lin), self.dim)

    def ineqs_array(self) -> np.ndarray:
        return np.array(self.ineqs, dtype=float).reshape(len(self.ineqs), self.dim)

    def eqs_array(self) -> np.ndarray:
        return np.array(self.eqs, dtype=float).reshape(len(self.eqs), self.dim)

    def __repr__(self) -> str:
        return f"PolyCone(dim={self.dim}, gens={list(self.gens)}, lin={list(self.lin)})"


def dd_convert(cone: PolyCone) -> PolyCone:
    """Return the cone with both representations recomputed from its H-rep."""
    return PolyCone.from_hrep(cone.dim, cone.ineqs, cone.eqs)


def polar(cone: PolyCone) -> PolyCone:
    """{w : <w, d> <= 0 for every d in the cone}."""
    return PolyCone(cone.dim, cone.gens, cone.lin, cone.ineqs, cone.eqs)


def cone_sum(cones: Sequence[PolyCone], dim: int) -> PolyCone:
    gens: list = []
    lin: list = []
    for c in cones:
        gens += c.gens
        lin += c.lin
    return PolyCone.from_vrep(dim, gens, lin)


def linear_image(cone: PolyCone, matrix: Sequence[Sequence], out_dim: int) -> PolyCone:
    def apply(v):
        return [dot(row, v) for row in matrix]

    return PolyCone.from_vrep(out_dim, [apply(g) for g in cone.gens], [apply(l) for l in cone.lin])


def projection_onto_cone(cone: PolyCone, v: Sequence) -> list[Fraction]:
    """Exact Euclidean projection by enumeration of KKT active sets."""
    v = [to_fraction(x) for x in v]
    eqs = list(cone.eqs)
    A = list(cone.ineqs)
    free_dim = cone.dim - len(eqs)
    for size in range(0, min(len(A), free_dim) + 1):
        for I in combinations(range(len(A)), size):
            rows = eqs + [A[i] for i in I]
            if rows and rank(rows, cone.dim) < len(rows):
                continue
            p = project_onto_null(v, rows)
            if any(dot(a, p) > 0 for a in A):
                continue
            if not I:
                return p
            resid = [x - y for x, y in zip(v, p)]
            # multipliers of resid = rows^T lambda (rows independent)
            k = len(rows)
            gram = [[to_fraction(dot(rows[i], rows[j])) for j in range(k)] for i in range(k)]
            rhs = [dot(rows[i], resid) for i in range(k)]
            from .rational import solve_square

            lam = solve_square(gram, rhs)
            if lam is None:
                continue
            if all(l >= 0 for l in lam[len(eqs):]):
                return p
    raise RuntimeError("projection onto cone failed")  # pragma: no cover


def distance_sq_to_cone(cone: PolyCone, v: Sequence) -> Fraction:
    p = projection_onto_cone(cone, v)
    return sum((to_fraction(x) - y) ** 2 for x, y in zip(v, p))


def prune_contained(cones: Iterable[PolyCone]) -> list[PolyCone]:
    """Drop duplicates and cones contained in another member; sorted canonically."""
    uniq = sorted(set(cones), key=lambda c: (-len(c.lin), -len(c.gens), c.key))
    kept: list[PolyCone] = []
    for c in uniq:
        if any(k.contains_cone(c) for k in kept):
            continue
        kept = [k for k in kept if not c.contains_cone(k)]
        kept.append(c)
    return sorted(kept, key=lambda c: c.key)


def union_contains(cones: Sequence[PolyCone], v: Sequence) -> bool:
    return any(c.contains(v) for c in cones)
