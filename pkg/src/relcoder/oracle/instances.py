"""Seeded generators of small polyhedral test instances with base point at the origin."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..multifunction import PolyMultimap
from ..polyhedra import Polyhedron


@dataclass(frozen=True)
class Instance:
    name: str
    S: PolyMultimap
    Omega: Polyhedron | None
    Theta: Polyhedron | None
    base: tuple


def _rows(rng: np.random.Generator, k: int, d: int, lo: int = -2, hi: int = 2) -> list[list[int]]:
    out = []
    while len(out) < k:
        r = rng.integers(lo, hi + 1, d).tolist()
        if any(r):
            out.append(r)
    return out


def random_piece(rng: np.random.Generator, n: int, m: int) -> Polyhedron:
    d = n + m
    kind = rng.choice(["cone", "linear", "shifted"], p=[0.55, 0.3, 0.15])
    if kind == "cone":
        rows = _rows(rng, int(rng.integers(1, 4)), d)
        P = Polyhedron.make(d, [(r, 0) for r in rows])
    elif kind == "linear":
        A = rng.integers(-2, 3, (m, n))
        eqs = [(list(-A[i]) + [1 if j == i else 0 for j in range(m)], 0) for i in range(m)]
        cut = _rows(rng, int(rng.integers(0, 2)), n)
        P = Polyhedron.make(d, [(r + [0] * m, 0) for r in cut], eqs)
    else:
        rows = _rows(rng, int(rng.integers(1, 3)), d)
        P = Polyhedron.make(d, [(r, -1) for r in rows])
    return P


def random_multimap(rng: np.random.Generator, n: int, m: int, pieces: int) -> PolyMultimap:
    """At least one piece passes through the origin."""
    while True:
        ps = [random_piece(rng, n, m) for _ in range(pieces)]
        ps = [P for P in ps if not P.is_empty]
        origin = (0,) * (n + m)
        if any(P.contains(origin) for P in ps):
            return PolyMultimap.make(n, m, ps)


def random_constraint(rng: np.random.Generator, d: int) -> Polyhedron | None:
    kind = rng.choice(["full", "half", "wedge"], p=[0.35, 0.4, 0.25])
    if kind == "full":
        return None
    k = 1 if kind == "half" else 2
    return Polyhedron.make(d, [(r, 0) for r in _rows(rng, k, d, -1, 1)])


def corpus(count: int = 100, seed: int = 0) -> list[Instance]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        S = random_multimap(rng, n, m, int(rng.integers(1, 5)))
        Om = random_constraint(rng, n)
        Th = random_constraint(rng, m)
        out.append(Instance(f"random-{i:03d}", S, Om, Th, ((0,) * n, (0,) * m)))
    return out


@dataclass(frozen=True)
class ExtremalInstance:
    name: str
    L1: tuple[Polyhedron, ...]
    L2: tuple[Polyhedron, ...]
    Omega: Polyhedron | None
    base: tuple


def _restrict_x(pieces, Om: Polyhedron | None, m: int) -> tuple[Polyhedron, ...]:
    if Om is None:
        return tuple(pieces)
    box = Om.product(Polyhedron.full(m))
    return tuple(P.intersect(box) for P in pieces)


def extremal_pairs(count: int = 10, seed: int = 0) -> list[ExtremalInstance]:
    """Epigraph of a max of linear forms against the hypograph of a max over a subset of them.

    The second set is a union of half-spaces; the two touch at the origin and
    lifting the first set by any positive amount separates them.
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(1, 3))
        forms = [rng.integers(-2, 3, n).tolist() for _ in range(int(rng.integers(1, 4)))]
        sub = forms[: int(rng.integers(1, len(forms) + 1))]
        epi = Polyhedron.make(n + 1, [(list(a) + [-1], 0) for a in forms])
        hypo = [Polyhedron.make(n + 1, [([-v for v in a] + [1], 0)]) for a in sub]
        Om = random_constraint(rng, n)
        out.append(ExtremalInstance(f"extremal-{i:02d}", _restrict_x([epi], Om, 1), _restrict_x(hypo, Om, 1), Om,
                                    ((0,) * n, (0,))))
    return out


@dataclass(frozen=True)
class IntersectionInstance:
    name: str
    Theta1: tuple[Polyhedron, ...]
    Theta2: tuple[Polyhedron, ...]
    Omega: Polyhedron | None
    base: tuple
    dual: tuple


def intersection_instances(count: int = 10, seed: int = 0) -> list[IntersectionInstance]:
    """Random cones through the origin with a nonzero normal to their intersection tangent to Omega."""
    from ..cones import PolyCone, polar
    from ..geometry import tangent_cone

    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n, m = int(rng.integers(1, 3)), 1
        d = n + m
        Om = random_constraint(rng, n)
        T1 = _restrict_x([Polyhedron.make(d, [(r, 0) for r in _rows(rng, int(rng.integers(1, 3)), d)])], Om, m)
        T2 = _restrict_x([Polyhedron.make(d, [(r, 0) for r in _rows(rng, int(rng.integers(1, 3)), d)])], Om, m)
        inter = T1[0].intersect(T2[0])
        z = (0,) * d
        N = polar(tangent_cone(inter, z))
        Tx = tangent_cone(Om if Om is not None else Polyhedron.full(n), (0,) * n)
        C = N.intersect(PolyCone.from_hrep(d, [tuple(a) + (0,) * m for a in Tx.ineqs], [tuple(a) + (0,) * m for a in Tx.eqs]))
        rays = C.all_rays()
        if not rays:
            continue
        w = rays[int(rng.integers(0, len(rays)))]
        out.append(IntersectionInstance(f"intersection-{len(out):02d}", T1, T2, Om, ((0,) * n, (0,) * m),
                                        (tuple(w[:n]), tuple(w[n:]))))
    return out


def _linear_map(rng: np.random.Generator, n: int, m: int) -> PolyMultimap:
    return PolyMultimap.linear(rng.integers(-2, 3, (m, n)).tolist())


def chain_instances(count: int = 100, seed: int = 0, linear_every: int = 5) -> list:
    """Random compositions through the origin; every ``linear_every``-th one is a pair of matrices."""
    from ..calculus import ChainInstance

    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n, m, p = (int(v) for v in rng.integers(1, 3, 3))
        if linear_every and i % linear_every == 0:
            S1, S2, Om = _linear_map(rng, n, m), _linear_map(rng, m, p), None
        else:
            S1 = random_multimap(rng, n, m, int(rng.integers(1, 4)))
            S2 = random_multimap(rng, m, p, int(rng.integers(1, 4)))
            Om = random_constraint(rng, n)
        out.append(ChainInstance(S1, S2, Om, (0,) * n, (0,) * p, (0,) * m))
    return out


def sum_instances(count: int = 100, seed: int = 0, linear_every: int = 5) -> list:
    from ..calculus import SumInstance

    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n, m = (int(v) for v in rng.integers(1, 3, 2))
        if linear_every and i % linear_every == 0:
            S1, S2, Om = _linear_map(rng, n, m), _linear_map(rng, n, m), None
        else:
            S1 = random_multimap(rng, n, m, int(rng.integers(1, 4)))
            S2 = random_multimap(rng, n, m, int(rng.integers(1, 4)))
            Om = random_constraint(rng, n)
        z = (0,) * m
        out.append(SumInstance(S1, S2, Om, (0,) * n, z, z, z))
    return out


def is_linear(S: PolyMultimap) -> bool:
    """Graph is a single subspace cut out by m equations solved for y."""
    if len(S.pieces) != 1:
        return False
    P = S.pieces[0]
    return not P.ineqs and len(P.eqs) == S.m and all(b == 0 for _, b in P.eqs)
