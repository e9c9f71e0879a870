"""Relative contingent coderivatives of polyhedral multimaps as unions of cones.

Objects live in (x*, y*) space.  A pair belongs to the coderivative when
(x*, -y*) is normal to the (restricted) graph and satisfies the tangent
constraints x* in T(x; Omega), -y* in T(y; Theta).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg

from .cones import PolyCone, cone_sum, linear_image, polar, prune_contained
from .errors import BaseNotInGraph, DimensionMismatch
from .geometry import eps_normal_test, local_cells, tangent_cone
from .lp import solve_lp
from .multifunction import PolyMultimap
from .polyhedra import Polyhedron
from .rational import as_vector, dot, to_fraction

FLAVORS = ("regular", "normal", "mixed", "mirror")


@dataclass(frozen=True, eq=False)
class CoderivativeObject:
    n: int
    m: int
    base: tuple[tuple[Fraction, ...], tuple[Fraction, ...]]
    flavor: str
    cones: tuple[PolyCone, ...]
    eps: Fraction = Fraction(0)
    approximate: bool = False
    # data needed for exact membership of eps > 0 objects
    _graph: tuple = field(default=(), repr=False)
    _tangent: tuple = field(default=(), repr=False)

    @property
    def flavors(self) -> tuple[str, ...]:
        return ("normal", "mixed") if self.flavor in ("normal", "mixed") else (self.flavor,)

    def contains(self, xs: Sequence, ys: Sequence) -> bool:
        xs, ys = as_vector(xs), as_vector(ys)
        if len(xs) != self.n or len(ys) != self.m:
            raise DimensionMismatch("dual pair has the wrong dimensions")
        if self.eps == 0:
            return any(c.contains(xs + ys) for c in self.cones)
        z = self.base[0] + self.base[1]
        if not eps_normal_test(list(self._graph), z, xs + tuple(-v for v in ys), self.eps):
            return False
        Tx, Ty = self._tangent
        return Tx.contains(xs) and Ty.contains(tuple(-v for v in ys))

    def apply(self, ys: Sequence) -> list[Polyhedron]:
        """D*(y*) as a union of polyhedra in R^n (exact, cone part only)."""
        ys = as_vector(ys)
        out = []
        for c in self.cones:
            rows = [(a[: self.n], -dot(a[self.n :], ys)) for a in c.ineqs]
            eqs = [(e[: self.n], -dot(e[self.n :], ys)) for e in c.eqs]
            P = Polyhedron.make(self.n, rows, eqs)
            if not P.is_empty and P not in out:
                out.append(P)
        return out

    def key(self) -> tuple:
        return tuple(c.key for c in self.cones)

    def same_cones(self, other: "CoderivativeObject") -> bool:
        return self.key() == other.key()

    def contains_object(self, other: "CoderivativeObject") -> bool:
        """Every cone of ``other`` lies inside a single cone of self or is covered ray-wise."""
        for c in other.cones:
            if any(k.contains_cone(c) for k in self.cones):
                continue
            if not _union_covers(self.cones, c):
                return False
        return True


def uncovered_direction(cones: Sequence[PolyCone], c: PolyCone) -> tuple | None:
    """A direction of c outside the union, or None when c is covered.

    The union is closed, so it covers c exactly when it covers every open
    cell of c cut by the union's facet hyperplanes.  Each such cell lies
    entirely inside or outside every cone, so one witness per cell decides.
    """
    from .arrangement import enumerate_cells, signed_hyperplane
    from .rational import dot

    for r in c.all_rays():
        if not any(k.contains(r) for k in cones):
            return tuple(r)
    own: dict[tuple, set] = {}
    for a in c.ineqs:
        h, o = signed_hyperplane(a)
        own.setdefault(h, set()).add(-o)
    for a in c.eqs:
        own.setdefault(signed_hyperplane(a)[0], set()).add(0)
    first = sorted(own)
    span = list(c.gens) + list(c.lin)
    rest = sorted({signed_hyperplane(a)[0] for k in cones for a in list(k.ineqs) + list(k.eqs)} - set(first))
    rest = [h for h in rest if any(dot(h, g) for g in span)]

    def run(open_only: bool):
        if open_only:
            allowed = [own[h] if len(own[h]) == 1 else {0} for h in first] + [{-1, 1}] * len(rest)
        else:
            allowed = [{0} | own[h] if len(own[h]) == 1 and 0 not in own[h] else {0} for h in first]
            allowed += [{-1, 0, 1}] * len(rest)

        def admissible(signs):
            return signs[-1] in allowed[len(signs) - 1]

        return enumerate_cells(c.dim, first + rest, admissible)

    cells = run(True)
    if not cells:
        # c has an implicit equality among its inequalities; fall back to every face
        cells = run(False)
    for cell in cells:
        w = cell.witness
        if not any(k.contains(w) for k in cones):
            return tuple(w)
    return None


def _union_covers(cones: Sequence[PolyCone], c: PolyCone) -> bool:
    return uncovered_direction(cones, c) is None


# --------------------------------------------------------------------------
# construction


def _check_dims(S: PolyMultimap, Omega: Polyhedron | None, Theta: Polyhedron | None):
    Om = Omega if Omega is not None else Polyhedron.full(S.n)
    Th = Theta if Theta is not None else Polyhedron.full(S.m)
    if Om.dim != S.n or Th.dim != S.m:
        raise DimensionMismatch("constraint sets do not match the map's dimensions")
    return Om, Th


def _flip_rows(rows, n):
    return [tuple(a[:n]) + tuple(-v for v in a[n:]) for a in rows]


def _dual_cone(piece_rows, tight, n, m, constrained: bool) -> PolyCone:
    N = n + m
    T = cone_sum([PolyCone.from_hrep(N, ins, eqs) for ins, eqs in piece_rows], N)
    nrm = polar(T)
    # (u, v) -> (u, -v): rows transform the same way
    ineqs = _flip_rows(nrm.ineqs, n)
    eqs = _flip_rows(nrm.eqs, n)
    if constrained:
        (ox, oxe), (ty, tye) = tight
        ineqs += [tuple(a) for a in ox]
        eqs += [tuple(a) for a in oxe]
        ineqs += [tuple(a[:n]) + tuple(-v for v in a[n:]) for a in ty]
        eqs += [tuple(a) for a in tye]
    return PolyCone.from_hrep(N, ineqs, eqs)


def _construct(S, graph_box, Om, Th, x, y, flavor, limiting, constrained=True) -> CoderivativeObject:
    n, m = S.n, S.m
    x, y = as_vector(x), as_vector(y)
    if len(x) != n or len(y) != m:
        raise DimensionMismatch("base point has the wrong dimensions")
    if not (Om.contains(x) and Th.contains(y) and S.graph_contains(x, y)):
        raise BaseNotInGraph(f"({x}, {y}) is not in the restricted graph")
    box = graph_box[0].product(graph_box[1])
    pieces = [P.intersect(box) for P in S.pieces]
    pieces = [P for P in pieces if not P.is_empty]
    extras = [(Om, range(n)), (Th, range(n, n + m))]
    cells, tights = local_cells(pieces, x + y, extras, skip_interior=limiting)
    cache: dict = {}
    out = []
    for cell, tight in zip(cells, tights):
        if not limiting and any(cell.signs):
            continue
        key = (cell.piece_rows, tuple((tuple(sorted(a)), tuple(sorted(b))) for a, b in tight))
        if key not in cache:
            cache[key] = _dual_cone(cell.piece_rows, tight, n, m, constrained)
        out.append(cache[key])
    return CoderivativeObject(n, m, (x, y), flavor, tuple(prune_contained(out or [PolyCone.zero(n + m)])))


def regular_coderivative(S: PolyMultimap, Omega: Polyhedron | None, Theta: Polyhedron | None, base, eps=0) -> CoderivativeObject:
    """eps-regular relative coderivative at the base point.

    For eps = 0 the object is exact.  For eps > 0 the cones are those of
    eps = 0 and the object is flagged approximate; ``contains`` still decides
    membership exactly.
    """
    Om, Th = _check_dims(S, Omega, Theta)
    x, y = base
    eps = to_fraction(eps)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    obj = _construct(S, (Om, Polyhedron.full(S.m)), Om, Th, x, y, "regular", limiting=False)
    if eps == 0:
        return obj
    box = Om.product(Polyhedron.full(S.m))
    graph = tuple(P.intersect(box) for P in S.pieces if not P.intersect(box).is_empty)
    Tx = tangent_cone(Om, obj.base[0])
    Ty = tangent_cone(Th, obj.base[1])
    return CoderivativeObject(S.n, S.m, obj.base, "regular", obj.cones, eps, True, graph, (Tx, Ty))


def limiting_coderivative(S: PolyMultimap, Omega: Polyhedron | None, Theta: Polyhedron | None, base,
                          tangent_constraint: bool = True) -> CoderivativeObject:
    """Normal (= mixed) relative coderivative: union over strata near the base."""
    Om, Th = _check_dims(S, Omega, Theta)
    x, y = base
    return _construct(S, (Om, Polyhedron.full(S.m)), Om, Th, x, y, "normal", limiting=True,
                      constrained=tangent_constraint)


def mirror_coderivative(S: PolyMultimap, Theta: Polyhedron | None, base) -> CoderivativeObject:
    Om, Th = _check_dims(S, None, Theta)
    x, y = base
    return _construct(S, (Om, Th), Om, Th, x, y, "mirror", limiting=True)


def swap_negate(D: CoderivativeObject, flavor: str | None = None) -> CoderivativeObject:
    """(u, v) -> (-v, -u): turns an object of the inverse map into one of the map."""
    n, m = D.n, D.m
    mat = [[0] * n + [-1 if i == j else 0 for j in range(m)] for i in range(m)]
    mat += [[-1 if i == j else 0 for j in range(n)] + [0] * m for i in range(n)]
    cones = prune_contained(linear_image(c, mat, n + m) for c in D.cones)
    return CoderivativeObject(m, n, (D.base[1], D.base[0]), flavor or D.flavor, tuple(cones))


# --------------------------------------------------------------------------
# slices


def _slice(cones: Sequence[PolyCone], n: int, m: int, zero_x: bool) -> list[PolyCone]:
    N = n + m
    if zero_x:
        fix, keep = range(n), range(n, N)
    else:
        fix, keep = range(n, N), range(n)
    rows = [[1 if j == i else 0 for j in range(N)] for i in fix]
    proj = [[1 if j == i else 0 for j in range(N)] for i in keep]
    out = []
    for c in cones:
        s = c.add_rows(eqs=rows)
        out.append(linear_image(s, proj, len(proj)))
    return prune_contained(out) if out else [PolyCone.zero(len(proj))]


@dataclass(frozen=True)
class ConeUnion:
    cones: tuple[PolyCone, ...]

    @property
    def isTrivial(self) -> bool:
        return all(c.is_trivial for c in self.cones)

    def nonzero_ray(self) -> tuple | None:
        for c in self.cones:
            for r in c.all_rays():
                return r
        return None

    def contains(self, v: Sequence) -> bool:
        return any(c.contains(v) for c in self.cones)


def zero_image(D: CoderivativeObject) -> ConeUnion:
    """{x* : (x*, 0) in D}."""
    return ConeUnion(tuple(_slice(D.cones, D.n, D.m, zero_x=False)))


def kernel(D: CoderivativeObject) -> ConeUnion:
    """{y* : (0, y*) in D}."""
    return ConeUnion(tuple(_slice(D.cones, D.n, D.m, zero_x=True)))


# --------------------------------------------------------------------------
# outer norm


@dataclass(frozen=True)
class OuterNormResult:
    value: float
    exactInfinite: bool
    witnessRay: tuple | None
    lowerBound: float
    upperBound: float
    sandwichUpper: float = math.inf

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)

    @property
    def converged(self) -> bool:
        if self.infinite:
            return True
        return self.upperBound - self.lowerBound <= 1e-6 * (1 + self.value)


def _faces(c: PolyCone) -> list[frozenset]:
    """All faces as sets of generator indices (the lineality space is the empty set)."""
    full = frozenset(range(len(c.gens)))
    tight_sets = [frozenset(i for i, g in enumerate(c.gens) if dot(a, g) == 0) for a in c.ineqs]
    seen = {full}
    stack = [full]
    while stack:
        F = stack.pop()
        for t in tight_sets:
            G = F & t
            if G != F and G not in seen:
                seen.add(G)
                stack.append(G)
    return list(seen)


def _ray_ratio_sq(g, n) -> Fraction | None:
    gx = sum(Fraction(v) ** 2 for v in g[:n])
    gy = sum(Fraction(v) ** 2 for v in g[n:])
    if gy == 0:
        return None if gx else Fraction(0)
    return gx / gy


def _cone_outer(c: PolyCone, n: int) -> tuple[float, np.ndarray | None]:
    """max |x*| over the cone with |y*| <= 1; the cone must meet {y* = 0} only at 0."""
    best, arg = 0.0, None
    A = c.ineqs_array()
    for g in c.gens:
        r = _ray_ratio_sq(g, n)
        if r is not None and (arg is None or float(r) > best * best):
            best = math.sqrt(float(r))
            arg = np.array(g, float)
    lin = c.lin_array()
    gens = c.gens_array()
    for F in _faces(c):
        B = np.vstack([gens[sorted(F)], lin]) if F else lin
        if len(B) == 0 or (len(F) == 1 and len(lin) == 0):
            continue
        U, s, _ = np.linalg.svd(B.T, full_matrices=False)
        Q = U[:, s > 1e-12 * max(1.0, s.max())]
        Qx, Qy = Q[:n], Q[n:]
        Mx, My = Qx.T @ Qx, Qy.T @ Qy
        w, V = scipy.linalg.eig(Mx, My)
        for lam, v in zip(w, V.T):
            if not np.isfinite(lam) or abs(lam.imag) > 1e-9 * (1 + abs(lam.real)):
                continue
            z = Q @ v.real
            nz = np.linalg.norm(z)
            if nz == 0 or np.linalg.norm(z[n:]) < 1e-12 * nz:
                continue
            z = z / nz
            for cand in (z, -z):
                if len(A) and (A @ cand > 1e-9 * np.linalg.norm(A, axis=1)).any():
                    continue
                val = np.linalg.norm(cand[:n]) / np.linalg.norm(cand[n:])
                if val > best:
                    best, arg = float(val), cand
    return best, arg


def _sandwich_upper(c: PolyCone, n: int, m: int) -> float:
    """sqrt(n) * max |x*|_inf subject to |y*|_inf <= 1, by exact LPs."""
    N = n + m
    A = [list(a) for a in c.ineqs]
    b = [0] * len(A)
    for j in range(m):
        e = [0] * N
        e[n + j] = 1
        A.append(e)
        b.append(1)
        A.append([-v for v in e])
        b.append(1)
    E = [list(e) for e in c.eqs]
    best = Fraction(0)
    for i in range(n):
        for s in (1, -1):
            obj = [0] * N
            obj[i] = s
            res = solve_lp(obj, A, b, E, [0] * len(E), maximize=True)
            if res.status == "unbounded":
                return math.inf
            if res.ok:
                best = max(best, res.value)
    return math.sqrt(n) * float(best)


def outer_norm(D: CoderivativeObject) -> OuterNormResult:
    """sup |x*| over pairs of D with |y*| <= 1."""
    n, m = D.n, D.m
    z = zero_image(D)
    ray = z.nonzero_ray()
    if ray is not None:
        return OuterNormResult(math.inf, True, tuple(ray) + (0,) * m, math.inf, math.inf, math.inf)
    best, arg = 0.0, None
    sand = 0.0
    for c in D.cones:
        v, a = _cone_outer(c, n)
        if a is not None and (arg is None or v > best):
            best, arg = v, a
        sand = max(sand, _sandwich_upper(c, n, m))
    witness = None
    if arg is not None and np.linalg.norm(arg[n:]) > 0:
        witness = tuple(float(t) for t in arg / np.linalg.norm(arg[n:]))
    tol = 1e-10 * (1 + best)
    return OuterNormResult(best, False, witness, max(0.0, best - tol), min(best + tol, sand + tol), sand)


# --------------------------------------------------------------------------
# affine maps


def _floor_fraction(v: float, digits: int = 12) -> Fraction:
    f = Fraction(v).limit_denominator(10**digits)
    return f if float(f) <= v else f - Fraction(1, 10**digits)


def _moreau_samples(T: PolyCone, eps: Fraction, rng: np.random.Generator, count: int,
                    normal: PolyCone | None = None) -> list[tuple]:
    """Exact vectors n0 + p with n0 in the polar cone (or a given subcone) and p in T, |p| <= eps."""
    N = polar(T) if normal is None else normal
    out = []
    dim = T.dim
    for _ in range(count):
        n0 = [Fraction(0)] * dim
        for g in N.all_rays():
            w = Fraction(int(rng.integers(0, 4)), int(rng.integers(1, 4)))
            n0 = [a + w * b for a, b in zip(n0, g)]
        p = [Fraction(0)] * dim
        if eps > 0:
            rays = T.all_rays()
            if rays:
                for g in rays:
                    w = Fraction(int(rng.integers(0, 3)), 1)
                    p = [a + w * b for a, b in zip(p, g)]
                nrm = math.sqrt(sum(float(t) ** 2 for t in p))
                if nrm > 0:
                    scale = _floor_fraction(float(eps) * float(rng.uniform(0, 1)) / nrm, 9)
                    p = [scale * t for t in p]
        out.append(tuple(a + b for a, b in zip(n0, p)))
    return out


def affine_coderivative_check(A: Sequence[Sequence], offset: Sequence | None, Omega: Polyhedron, base_x: Sequence,
                              eps, gamma, samples: int = 200, radius=Fraction(1, 10), seed: int = 0) -> bool:
    """Sample eps-normals (x*, -y*) to the graph of x -> A x + offset over Omega near the base
    and assert x* - A^T y* is a ((c+gamma) eps + |y*| gamma)-normal to Omega, c = |A| + 1."""
    rng = np.random.default_rng(seed)
    Aq = [[to_fraction(v) for v in row] for row in A]
    m = len(Aq)
    n = Omega.dim
    off = as_vector(offset) if offset is not None else (Fraction(0),) * m
    f = PolyMultimap.linear(Aq, off)
    box = Omega.product(Polyhedron.full(m))
    graph = f.pieces[0].intersect(box)
    eps = to_fraction(eps)
    gamma = to_fraction(gamma)
    normA = float(np.linalg.norm(np.array(Aq, float), 2)) if m and n else 0.0
    c = _floor_fraction(normA) + 1
    x0 = as_vector(base_x)
    T0 = tangent_cone(Omega, x0)
    points = [x0]
    dirs = T0.all_rays()
    for _ in range(4):
        if not dirs:
            break
        d = [Fraction(0)] * n
        for g in dirs:
            d = [a + int(rng.integers(0, 3)) * b for a, b in zip(d, g)]
        t = to_fraction(radius)
        while t > Fraction(1, 10**6):
            x = tuple(a + t * b for a, b in zip(x0, d))
            if Omega.contains(x):
                points.append(x)
                break
            t /= 2
    per = max(1, samples // len(points))
    for x in points:
        y = tuple(dot(r, x) + o for r, o in zip(Aq, off))
        Tg = tangent_cone(graph, x + y)
        for v in _moreau_samples(Tg, eps, rng, per):
            xs, ys = v[:n], tuple(-t for t in v[n:])
            if not eps_normal_test(graph, x + y, v, eps):
                continue  # sampling slack; never counts as a test
            ny = _floor_fraction(math.sqrt(sum(float(t) ** 2 for t in ys)))
            target = tuple(a - sum(Aq[i][j] * ys[i] for i in range(m)) for j, a in enumerate(xs))
            if not eps_normal_test(Omega, x, target, (c + gamma) * eps + max(ny, Fraction(0)) * gamma):
                return False
    return True
