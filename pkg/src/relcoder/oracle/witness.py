"""Witness searches for the relative extremal principle and the relative fuzzy intersection rule.

Both searches scan exact points of every local stratum near the base on a grid
of spacing eps/4 (or gamma/4) and solve one exact LP per pair of points.  The
Euclidean fattening balls are replaced by inscribed boxes, so every returned
witness satisfies the original conditions; a miss is reported together with
the grid that was scanned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

from ..cones import PolyCone
from ..errors import DimensionMismatch, NotExtremal, PreconditionViolated
from ..geometry import as_union, eps_normal_test, nearby_points, regular_normal_cone, tangent_cone
from ..lp import solve_lp
from ..polyhedra import Polyhedron
from ..rational import as_vector, to_fraction


@dataclass(frozen=True)
class WitnessResult:
    found: bool
    witness: dict | None
    grid: dict = field(default_factory=dict)


def _inv_sqrt_floor(d: int, scale: int = 10**6) -> Fraction:
    """A rational lower bound of 1/sqrt(d)."""
    return Fraction(math.isqrt(scale * scale // d), scale)


def _norm(v) -> float:
    return math.sqrt(sum(float(t) ** 2 for t in v))


class _LP:
    """Tiny row builder over named blocks of free variables."""

    def __init__(self, blocks: dict[str, int]):
        self.off: dict[str, int] = {}
        k = 0
        for name, size in blocks.items():
            self.off[name] = k
            k += size
        self.n = k
        self.ub: list[tuple[list, Fraction]] = []
        self.eq: list[tuple[list, Fraction]] = []

    def row(self, terms: Sequence[tuple[str, int, object]]) -> list:
        r = [Fraction(0)] * self.n
        for name, i, coef in terms:
            r[self.off[name] + i] += to_fraction(coef)
        return r

    def cone(self, name: str, C: PolyCone, sign: int = 1, coords: Sequence[int] | None = None):
        """sign * var[coords] in C."""
        coords = list(range(C.dim)) if coords is None else list(coords)
        for a in C.ineqs:
            self.ub.append((self.row([(name, j, sign * v) for j, v in zip(coords, a)]), Fraction(0)))
        for a in C.eqs:
            self.eq.append((self.row([(name, j, v) for j, v in zip(coords, a)]), Fraction(0)))

    def box(self, terms_of, dim: int, bound):
        """|sum of terms(j)| <= bound for each coordinate j; bound is a constant or a variable name."""
        for j in range(dim):
            t = terms_of(j)
            if isinstance(bound, str):
                self.ub.append((self.row(t + [(bound, 0, -1)]), Fraction(0)))
                self.ub.append((self.row([(nm, i, -c) for nm, i, c in t] + [(bound, 0, -1)]), Fraction(0)))
            else:
                self.ub.append((self.row(t), to_fraction(bound)))
                self.ub.append((self.row([(nm, i, -c) for nm, i, c in t]), to_fraction(bound)))

    def solve(self, objective: Sequence[tuple[str, int, object]] = ()):
        c = self.row(list(objective)) if objective else [0] * self.n
        res = solve_lp(c, [r for r, _ in self.ub], [b for _, b in self.ub], [r for r, _ in self.eq],
                       [b for _, b in self.eq], nvars=self.n)
        return res if res.ok else None

    def get(self, x, name: str, size: int) -> tuple:
        k = self.off[name]
        return tuple(x[k : k + size])


def _local_inside(sets: Sequence[Sequence[Polyhedron]], Om: Polyhedron, n: int, z: tuple, radius: Fraction) -> bool:
    """Do the x-parts of every set, within the box of given radius around z, lie in Omega?"""
    d = len(z)
    box = Polyhedron.make(d, [([1 if j == i else 0 for j in range(d)], z[i] + radius) for i in range(d)]
                          + [([-1 if j == i else 0 for j in range(d)], radius - z[i]) for i in range(d)])
    for pieces in sets:
        for P in pieces:
            Q = P.intersect(box)
            if Q.is_empty:
                continue
            for a, b in Om.ineqs:
                res = Q.maximize(tuple(a) + (0,) * (d - n))
                if res.value > b:
                    return False
            for a, b in Om.eqs:
                row = tuple(a) + (0,) * (d - n)
                if Q.maximize(row).value > b or -Q.maximize(tuple(-v for v in row)).value < b:
                    return False
    return True


def _shifted_disjoint(L1: Sequence[Polyhedron], L2: Sequence[Polyhedron], shift: tuple, box: Polyhedron) -> bool:
    for P in L1:
        Ps = P.translate(shift)
        for Q in L2:
            if not Ps.intersect(Q).intersect(box).is_empty:
                return False
    return True


def check_relative_extremality(L1, L2, Omega: Polyhedron | None, base, radius=1, halvings: int = 8,
                               shifts: Sequence[Sequence] | None = None) -> tuple | None:
    """Return a shift direction u in Y with (L1 + (0, u/2^k)) cap L2 cap U empty for k = 1..halvings, or None."""
    L1, L2 = as_union(L1), as_union(L2)
    x, y = as_vector(base[0]), as_vector(base[1])
    n, m = len(x), len(y)
    z = x + y
    if not (any(P.contains(z) for P in L1) and any(P.contains(z) for P in L2)):
        raise NotExtremal("base point is not in both sets")
    radius = to_fraction(radius)
    d = n + m
    box = Polyhedron.make(d, [([1 if j == i else 0 for j in range(d)], z[i] + radius) for i in range(d)]
                          + [([-1 if j == i else 0 for j in range(d)], radius - z[i]) for i in range(d)])
    if shifts is None:
        shifts = [tuple(s if j == i else 0 for j in range(m)) for i in range(m) for s in (1, -1)]
        shifts += [tuple(v) for v in product((-1, 0, 1), repeat=m) if sum(map(abs, v)) > 1]
    for u in shifts:
        u = as_vector(u)
        if all(_shifted_disjoint(L1, L2, (0,) * n + tuple(t / 2**k for t in u), box) for k in range(1, halvings + 1)):
            return u
    return None


def _by_distance(points: list[tuple], z: tuple) -> list[tuple]:
    return sorted(points, key=lambda p: sum((a - b) ** 2 for a, b in zip(p, z)))


def _normal_data(pieces, z, Om, n):
    N = regular_normal_cone(pieces, z)
    T = tangent_cone(Om, z[:n])
    return N, T


def extremal_witness_search(L1, L2, Omega: Polyhedron | None, base, eps, radius=1) -> WitnessResult:
    """Dual pairs for a relative local extremal point of {L1, L2}.

    Looks for points z_i of L_i within eps of the base and (x_i*, y_i*) with
    dist((x_i*, y_i*), N(z_i; L_i)) <= eps, x_i* tangent to Omega at x_i,
    (x_1*, y_1*) + (x_2*, y_2*) = 0 and norm sum 1.
    """
    L1, L2 = as_union(L1), as_union(L2)
    x, y = as_vector(base[0]), as_vector(base[1])
    n, m = len(x), len(y)
    d = n + m
    if any(P.dim != d for P in L1 + L2):
        raise DimensionMismatch("sets must live in the product space")
    Om = Omega if Omega is not None else Polyhedron.full(n)
    eps = to_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    shift = check_relative_extremality(L1, L2, Om, base, radius)
    if shift is None:
        raise NotExtremal("no shift direction separates the sets near the base on the test grid")
    if not _local_inside([L1, L2], Om, n, x + y, to_fraction(radius)):
        raise NotExtremal("the sets leave Omega near the base")
    z = x + y
    Lin1 = [P.intersect(Om.product(Polyhedron.full(m))) for P in L1]
    Lin2 = [P.intersect(Om.product(Polyhedron.full(m))) for P in L2]
    pts1 = _by_distance(nearby_points([P for P in Lin1 if not P.is_empty], z, eps, steps=4), z)
    pts2 = _by_distance(nearby_points([P for P in Lin2 if not P.is_empty], z, eps, steps=4), z)
    grid = {"spacing": str(eps / 4), "points": [len(pts1), len(pts2)], "shift": [str(t) for t in shift]}
    norms = [tuple(s if j == i else 0 for j in range(d)) for i in range(d) for s in (1, -1)]
    root = _inv_sqrt_floor(d)
    for p1 in pts1:
        N1, T1 = _normal_data(L1, p1, Om, n)
        for p2 in pts2:
            N2, T2 = _normal_data(L2, p2, Om, n)
            for c in norms:
                lp = _LP({"v": d, "n1": d, "n2": d, "delta": 1})
                lp.cone("n1", N1)
                lp.cone("n2", N2)
                lp.cone("v", T1, 1, range(n))
                lp.cone("v", T2, -1, range(n))  # x2* = -v_x must be tangent too
                lp.box(lambda j: [("v", j, 1), ("n1", j, -1)], d, "delta")
                lp.box(lambda j: [("v", j, -1), ("n2", j, -1)], d, "delta")
                lp.eq.append((lp.row([("v", j, c[j]) for j in range(d)]), Fraction(1)))
                res = lp.solve([("delta", 0, 1)])
                if res is None:
                    continue
                v = lp.get(res.x, "v", d)
                delta = res.x[lp.off["delta"]]
                s = 1 / (2 * _norm(v))
                if s * float(delta) / float(root) > float(eps) * (1 - 1e-12):
                    continue
                w1 = [s * float(t) for t in v]
                return WitnessResult(True, {
                    "points": [[str(t) for t in p1], [str(t) for t in p2]],
                    "direction": [str(t) for t in v],
                    "duals": [w1, [-t for t in w1]],
                    "fattening": s * float(delta) / float(root),
                }, grid)
    return WitnessResult(False, None, grid)


def fuzzy_witness_search(Theta1, Theta2, Omega: Polyhedron | None, base, eps, gamma, dual_pair) -> WitnessResult:
    """lambda (x*, y*) - (x1*, y1*) - (x2*, y2*) in gamma B with max{lambda, |(x1*, y1*)|} = 1,
    (xi*, yi*) within eps + gamma of the normals to Theta_i at points gamma-close to the base and
    xi* tangent to Omega there."""
    T1s, T2s = as_union(Theta1), as_union(Theta2)
    x, y = as_vector(base[0]), as_vector(base[1])
    n, m = len(x), len(y)
    d = n + m
    z = x + y
    Om = Omega if Omega is not None else Polyhedron.full(n)
    eps, gamma = to_fraction(eps), to_fraction(gamma)
    if gamma <= 0 or eps < 0:
        raise ValueError("need gamma > 0 and eps >= 0")
    w = as_vector(tuple(dual_pair[0]) + tuple(dual_pair[1]))
    if len(w) != d:
        raise DimensionMismatch("dual pair has the wrong dimensions")
    inter = [P.intersect(Q) for P in T1s for Q in T2s]
    inter = [P for P in inter if not P.is_empty and P.contains(z)]
    if not inter:
        raise PreconditionViolated("base point is not in both sets")
    if not Om.contains(x) or not tangent_cone(Om, x).contains(w[:n]):
        raise PreconditionViolated("x* is not tangent to Omega at the base")
    if not eps_normal_test(inter, z, w, eps):
        raise PreconditionViolated("dual pair is not an eps-normal to the intersection")
    if not _local_inside([T1s, T2s], Om, n, z, Fraction(1)):
        raise PreconditionViolated("the sets leave Omega near the base")
    pts1 = _by_distance(nearby_points(T1s, z, gamma, steps=4), z)
    pts2 = _by_distance(nearby_points(T2s, z, gamma, steps=4), z)
    grid = {"spacing": str(gamma / 4), "points": [len(pts1), len(pts2)]}
    root = _inv_sqrt_floor(d)
    fat = (eps + gamma) * root
    close = gamma * root
    norms = [tuple(s if j == i else 0 for j in range(d)) for i in range(d) for s in (1, -1)]
    for p1 in pts1:
        N1, Tx1 = _normal_data(T1s, p1, Om, n)
        for p2 in pts2:
            N2, Tx2 = _normal_data(T2s, p2, Om, n)
            for mode in ["box", "cross"] + norms:
                lp = _LP({"lam": 1, "v1": d, "v2": d, "n1": d, "n2": d, "t": d})
                lp.cone("n1", N1)
                lp.cone("n2", N2)
                lp.cone("v1", Tx1, 1, range(n))
                lp.cone("v2", Tx2, 1, range(n))
                lp.box(lambda j: [("v1", j, 1), ("n1", j, -1)], d, fat)
                lp.box(lambda j: [("v2", j, 1), ("n2", j, -1)], d, fat)
                lp.box(lambda j: [("lam", 0, w[j]), ("v1", j, -1), ("v2", j, -1)], d, close)
                if mode == "box":
                    lp.eq.append((lp.row([("lam", 0, 1)]), Fraction(1)))
                    lp.box(lambda j: [("v1", j, 1)], d, root)
                elif mode == "cross":
                    # |v1|_1 <= 1 keeps v1 in the unit ball and reaches the coordinate axes
                    lp.eq.append((lp.row([("lam", 0, 1)]), Fraction(1)))
                    for j in range(d):
                        lp.ub.append((lp.row([("v1", j, 1), ("t", j, -1)]), Fraction(0)))
                        lp.ub.append((lp.row([("v1", j, -1), ("t", j, -1)]), Fraction(0)))
                    lp.ub.append((lp.row([("t", j, 1) for j in range(d)]), Fraction(1)))
                else:
                    lp.ub.append((lp.row([("lam", 0, 1)]), Fraction(1)))
                    lp.ub.append((lp.row([("lam", 0, -1)]), Fraction(0)))
                    lp.eq.append((lp.row([("v1", j, mode[j]) for j in range(d)]), Fraction(1)))
                res = lp.solve()
                if res is None:
                    continue
                lam = res.x[lp.off["lam"]]
                v1, v2 = lp.get(res.x, "v1", d), lp.get(res.x, "v2", d)
                s = 1.0 if mode in ("box", "cross") else 1 / _norm(v1)
                return WitnessResult(True, {
                    "points": [[str(t) for t in p1], [str(t) for t in p2]],
                    "lambda": s * float(lam),
                    "duals": [[s * float(t) for t in v1], [s * float(t) for t in v2]],
                    "exact": {"lambda": str(lam), "v1": [str(t) for t in v1], "v2": [str(t) for t in v2], "scale": s},
                }, grid)
    return WitnessResult(False, None, grid)
