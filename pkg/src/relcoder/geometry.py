"""Tangent and normal cones of polyhedra and finite unions of polyhedra."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .arrangement import enumerate_cells, sign_of, signed_hyperplane
from .cones import PolyCone, cone_sum, distance_sq_to_cone, polar, projection_onto_cone, prune_contained
from .errors import DimensionMismatch, PointNotInSet, PreconditionViolated
from .polyhedra import Polyhedron
from .qp import PolyProjector
from .rational import as_vector, dot, to_fraction

Union = Sequence[Polyhedron]


def as_union(U) -> list[Polyhedron]:
    if isinstance(U, Polyhedron):
        return [U]
    pieces = list(U)
    if pieces and len({p.dim for p in pieces}) > 1:
        raise DimensionMismatch("pieces of a union must share one ambient dimension")
    return pieces


def tangent_cone(P: Polyhedron, x: Sequence) -> PolyCone:
    """T(x; P) for a convex polyhedron."""
    x = as_vector(x)
    if len(x) != P.dim:
        raise DimensionMismatch(f"point of length {len(x)} in dimension {P.dim}")
    if not P.contains(x):
        raise PointNotInSet(f"{x} is not in the polyhedron")
    rows = [a for a, b in P.ineqs if dot(a, x) == b]
    return PolyCone.from_hrep(P.dim, rows, [a for a, _ in P.eqs])


def tangent_cones(U, x: Sequence) -> list[PolyCone]:
    """Tangent cones of the pieces containing x; their union is T(x; U)."""
    pieces = as_union(U)
    x = as_vector(x)
    out = [tangent_cone(P, x) for P in pieces if P.contains(x)]
    if not out:
        raise PointNotInSet(f"{x} is not in the union")
    return out


def eps_normal_test(U, x: Sequence, v: Sequence, eps) -> bool:
    """Is v an eps-normal to U at x?  Exact: max over pieces of |proj_T(v)| <= eps."""
    eps = to_fraction(eps)
    v = as_vector(v)
    for T in tangent_cones(U, x):
        p = projection_onto_cone(T, v)
        if sum(y * y for y in p) > eps * eps:
            return False
    return True


def normal_cone(P: Polyhedron, x: Sequence) -> PolyCone:
    return polar(tangent_cone(P, x))


# --------------------------------------------------------------------------
# stratification


@dataclass(frozen=True, eq=False)
class Stratum:
    cell: Polyhedron  # closure of the stratum
    signs: tuple[int, ...]
    point: tuple[Fraction, ...]  # exact point in the relative interior
    pieces: tuple[int, ...]
    piece_tangents: tuple[PolyCone, ...]
    tangent: PolyCone  # convex hull of the union of piece tangents
    regularNormal: PolyCone
    closureContainsBase: bool | None = None
    _planes: tuple = field(default=(), repr=False)

    def contains(self, x: Sequence) -> bool:
        """Exact membership in the (relatively open) stratum."""
        x = as_vector(x)
        return all(sign_of(dot(a, x) - b) == s for (a, b), s in zip(self._planes, self.signs))

    @property
    def dimension(self) -> int:
        from .rational import rank

        return self.cell.dim - rank([a for a, _ in self.cell.eqs], self.cell.dim)


class _Planes:
    """Distinct hyperplanes of a family of rows and each piece's sign pattern on them."""

    def __init__(self, npieces: int):
        self.index: dict[tuple, int] = {}
        self.rows: list[tuple] = []
        self.req: list[list[tuple[int, int, bool]]] = [[] for _ in range(npieces)]

    def add(self, k: int, row: Sequence, is_eq: bool) -> int:
        normal, orient = signed_hyperplane(row)
        idx = self.index.get(normal)
        if idx is None:
            idx = len(self.rows)
            self.index[normal] = idx
            self.rows.append(normal)
        if k >= 0:
            self.req[k].append((idx, orient, is_eq))
        return idx

    def alive(self, k: int, signs: Sequence[int]) -> bool:
        n = len(signs)
        for idx, orient, is_eq in self.req[k]:
            if idx < n:
                s = signs[idx] * orient
                if s > 0 or (is_eq and s != 0):
                    return False
        return True


def stratify(U, base: Sequence | None = None) -> list[Stratum]:
    """Partition the union into relatively open cells with constant local structure."""
    pieces = [P for P in as_union(U) if not P.is_empty]
    if not pieces:
        return []
    n = pieces[0].dim
    planes = _Planes(len(pieces))
    for k, P in enumerate(pieces):
        for a, b in P.ineqs:
            planes.add(k, list(a) + [-b], False)
        for a, b in P.eqs:
            planes.add(k, list(a) + [-b], True)

    def admissible(signs):
        return any(planes.alive(k, signs) for k in range(len(pieces)))

    t_row = tuple([0] * n + [-1])
    cells = enumerate_cells(n + 1, planes.rows, admissible, strict=[t_row], witness=[0] * n + [1])
    affine = [(tuple(r[:n]), -r[n]) for r in planes.rows]
    base = as_vector(base) if base is not None else None
    out = []
    for c in cells:
        t = c.witness[n]
        pt = tuple(x / t for x in c.witness[:n])
        ks = tuple(k for k in range(len(pieces)) if planes.alive(k, c.signs))
        ins, eqs = [], []
        for (a, b), s in zip(affine, c.signs):
            if s == 0:
                eqs.append((a, b))
            elif s < 0:
                ins.append((a, b))
            else:
                ins.append((tuple(-x for x in a), -b))
        cell = Polyhedron.make(n, ins, eqs)
        tans = tuple(tangent_cone(pieces[k], pt) for k in ks)
        hull = cone_sum(tans, n)
        out.append(
            Stratum(
                cell=cell,
                signs=c.signs,
                point=pt,
                pieces=ks,
                piece_tangents=tans,
                tangent=hull,
                regularNormal=polar(hull),
                closureContainsBase=(cell.contains(base) if base is not None else None),
                _planes=tuple(affine),
            )
        )
    return out


# --------------------------------------------------------------------------
# local structure at a point


@dataclass(frozen=True)
class LocalCell:
    """A stratum of the local conic model at a point."""

    signs: tuple[int, ...]
    direction: tuple[Fraction, ...]  # exact offset from the base into the stratum
    pieces: tuple[int, ...]
    tight: tuple[frozenset, ...]  # per alive piece: indices of tight inequality rows
    piece_rows: tuple[tuple[tuple, tuple], ...]  # per alive piece: (tight ineq rows, eq rows)


def local_cells(pieces: Sequence[Polyhedron], x: Sequence, extra: Sequence[tuple[Polyhedron, Sequence[int]]] = (),
                skip_interior: bool = False) -> tuple[list[LocalCell], list]:
    """Strata of a union near x, refined by extra convex constraints.

    ``extra`` holds (polyhedron, coordinates) pairs: the polyhedron constrains
    the listed coordinates of the ambient space and must contain x restricted
    to them.  Returns the local cells and, per cell, the tight rows of every
    extra constraint.  With ``skip_interior`` cells lying in the interior of
    some full-dimensional piece are dropped (their normal cone is zero).
    """
    x = as_vector(x)
    n = len(x)
    live = [k for k, P in enumerate(pieces) if P.contains(x)]
    if not live:
        raise PointNotInSet(f"{x} is not in the union")
    # constraint rows go first so that cells outside the constraint sets are pruned early
    planes = _Planes(len(pieces))
    extra_rows = []
    for Q, coords in extra:
        xq = [x[c] for c in coords]
        if not Q.contains(xq):
            raise PointNotInSet("base point violates a constraint set")

        def lift(a):
            out = [0] * n
            for i, c in enumerate(coords):
                out[c] = a[i]
            return tuple(out)

        rows = []
        for i, (a, b) in enumerate(Q.ineqs):
            if dot(a, xq) == b:
                rows.append((i, lift(a), False, planes.add(-1, lift(a), False)))
        for a, _ in Q.eqs:
            rows.append((-1, lift(a), True, planes.add(-1, lift(a), True)))
        extra_rows.append(rows)
    act: dict[int, list[tuple[int, tuple, bool, int]]] = {}
    for k in live:
        P = pieces[k]
        rows = []
        for i, (a, b) in enumerate(P.ineqs):
            if dot(a, x) == b:
                idx = planes.add(k, a, False)
                rows.append((i, tuple(a), False, idx))
        for a, b in P.eqs:
            idx = planes.add(k, a, True)
            rows.append((-1, tuple(a), True, idx))
        act[k] = rows
    # orientation of extra rows relative to the stored normals
    extra_orient = [[signed_hyperplane(a)[1] for (_, a, _, _) in rows] for rows in extra_rows]

    def extra_ok(signs):
        m = len(signs)
        for rows, ors in zip(extra_rows, extra_orient):
            for (_, _, is_eq, idx), o in zip(rows, ors):
                if idx < m:
                    s = signs[idx] * o
                    if s > 0 or (is_eq and s != 0):
                        return False
        return True

    solid = [k for k in live if not pieces[k].eqs]
    last = {k: max((idx for idx, _, _ in planes.req[k]), default=-1) for k in solid}

    def interior(signs):
        m = len(signs)
        return any(last[k] < m and all(signs[idx] * o < 0 for idx, o, _ in planes.req[k]) for k in solid)

    def admissible(signs):
        if skip_interior and interior(signs):
            return False
        return extra_ok(signs) and any(planes.alive(k, signs) for k in live)

    cells = enumerate_cells(n, planes.rows, admissible)
    out = []
    extra_tight = []
    for c in cells:
        ks = tuple(k for k in live if planes.alive(k, c.signs))
        tight = []
        tans = []
        for k in ks:
            ins = [a for (i, a, is_eq, idx) in act[k] if not is_eq and c.signs[idx] == 0]
            eqs = [a for (i, a, is_eq, idx) in act[k] if is_eq]
            tight.append(frozenset(i for (i, a, is_eq, idx) in act[k] if not is_eq and c.signs[idx] == 0))
            tans.append((tuple(sorted(ins)), tuple(sorted(eqs))))
        out.append(LocalCell(c.signs, c.witness, ks, tuple(tight), tuple(tans)))  # type: ignore[arg-type]
        et = []
        for rows in extra_rows:
            et.append(
                (
                    [a for (i, a, is_eq, idx) in rows if not is_eq and c.signs[idx] == 0],
                    [a for (i, a, is_eq, idx) in rows if is_eq],
                )
            )
        extra_tight.append(et)
    return out, extra_tight


def nearby_points(pieces: Sequence[Polyhedron], z: Sequence, radius, steps: int = 1) -> list[tuple]:
    """Exact points of every local stratum of the union within ``radius`` of z.

    Each stratum contributes points at distances radius*k/steps (k = 1..steps),
    shortened where a non-tight row of the piece would otherwise be crossed.
    """
    z = as_vector(z)
    cells, _ = local_cells(pieces, z)
    out: list[tuple] = []
    for c in cells:
        d = c.direction
        if not any(d):
            if z not in out:
                out.append(z)
            continue
        nd = math.sqrt(sum(float(t) ** 2 for t in d))
        unit = Fraction(radius) / Fraction(math.ceil(nd * 1e6 + 1), 10**6)
        cap = None
        for k in c.pieces:
            for a, b in pieces[k].ineqs:
                ad = dot(a, d)
                slack = b - dot(a, z)
                if ad > 0 and slack > 0:
                    lim = slack / ad / 2
                    cap = lim if cap is None or lim < cap else cap
        for j in range(1, steps + 1):
            t = unit * j / steps
            if cap is not None and t > cap:
                t = cap
            p = tuple(a + t * b for a, b in zip(z, d))
            if p not in out:
                out.append(p)
    return out


def limiting_normal_cone(U, x: Sequence) -> list[PolyCone]:
    """Limiting normal cone as a union of convex cones (exact)."""
    pieces = as_union(U)
    x = as_vector(x)
    n = len(x)
    cells, _ = local_cells(pieces, x)
    cache: dict = {}
    result = []
    for c in cells:
        key = c.piece_rows
        if key not in cache:
            tans = [PolyCone.from_hrep(n, ins, eqs) for ins, eqs in c.piece_rows]
            cache[key] = polar(cone_sum(tans, n))
        result.append(cache[key])
    return prune_contained(result)


def regular_normal_cone(U, x: Sequence) -> PolyCone:
    """Regular (Frechet) normal cone: polar of the tangent cone of the union."""
    pieces = as_union(U)
    tans = tangent_cones(pieces, x)
    return polar(cone_sum(tans, pieces[0].dim))


def tangent_stability_check(Omega: Polyhedron, x: Sequence, v: Sequence, eps, delta) -> bool:
    """Is dist(v, T(z; Omega)) <= eps for every z in Omega within delta of x?

    Every active set realised near x is enumerated exactly through the face
    lattice; only the distance from x to a face uses floating point.
    """
    x = as_vector(x)
    v = as_vector(v)
    T0 = tangent_cone(Omega, x)
    if not T0.contains(v):
        raise PreconditionViolated("v is not tangent to the set at the base point")
    eps = to_fraction(eps)
    delta = float(delta)
    faces = stratify([Omega])
    for s in faces:
        if s.closureContainsBase is None:
            proj = PolyProjector.of(s.cell)
            y, ok = proj.project(np.array([[float(t) for t in x]]))
            if not ok[0]:
                continue
            if np.linalg.norm(y[0] - np.array([float(t) for t in x])) > delta + 1e-12:
                continue
        T = s.piece_tangents[0]
        if distance_sq_to_cone(T, v) > eps * eps:
            return False
    return True
