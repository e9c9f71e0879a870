"""Chain and sum rules for relative coderivatives, checked as exact inclusions of cone unions."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .coderivative import (
    CoderivativeObject,
    kernel,
    limiting_coderivative,
    uncovered_direction,
    zero_image,
)
from .cones import PolyCone, linear_image, prune_contained
from .errors import BaseNotInGraph, DimensionMismatch, IntermediateNotInG, SumMismatch
from .multifunction import PolyMultimap, compose, msum
from .polyhedra import Polyhedron, project
from .qp import PolyProjector
from .rational import as_vector

RULES = ("chain-M", "chain-N", "chain-smooth", "sum-M", "sum-N")
PSNC_NOTE = "PSNC conclusion holds vacuously in finite dimensions"


@dataclass(frozen=True)
class RuleReport:
    rule: str
    qcHolds: bool
    inclusionHolds: bool
    violatingRay: tuple | None
    intermediatePoint: tuple
    iscHolds: bool | None = None
    reverseHolds: bool | None = None  # RHS inside LHS, i.e. equality when both hold
    psnc: bool = True
    note: str = ""

    @property
    def hypothesesVerified(self) -> bool:
        return self.qcHolds and self.iscHolds is not False


@dataclass(frozen=True)
class ChainInstance:
    S1: PolyMultimap
    S2: PolyMultimap
    Omega: Polyhedron | None
    x: tuple
    z: tuple
    y: tuple | None = None


@dataclass(frozen=True)
class SumInstance:
    S1: PolyMultimap
    S2: PolyMultimap
    Omega: Polyhedron | None
    x: tuple
    y: tuple
    y1: tuple
    y2: tuple


# --------------------------------------------------------------------------
# cone-union helpers


def _pairwise_nonzero(A: Sequence[PolyCone], B: Sequence[PolyCone]) -> tuple | None:
    for a in A:
        for b in B:
            c = a.intersect(b)
            if not c.is_trivial:
                return tuple(c.all_rays()[0])
    return None


def _negate(c: PolyCone) -> PolyCone:
    d = c.dim
    return linear_image(c, [[-1 if i == j else 0 for j in range(d)] for i in range(d)], d)


def _embed(c: PolyCone, total: int, coords: Sequence[int]) -> PolyCone:
    def lift(a):
        row = [0] * total
        for v, j in zip(a, coords):
            row[j] = v
        return row

    return PolyCone.from_hrep(total, [lift(a) for a in c.ineqs], [lift(a) for a in c.eqs])


def _inclusion(lhs: Sequence[PolyCone], rhs: Sequence[PolyCone]) -> tuple | None:
    for c in lhs:
        if any(k.contains_cone(c) for k in rhs):
            continue
        w = uncovered_direction(rhs, c)
        if w is not None:
            return w
    return None


def _compose_cones(D1: CoderivativeObject, D2: CoderivativeObject) -> list[PolyCone]:
    """{(x*, z*) : some y* with (x*, y*) in D1 and (y*, z*) in D2}, kept as a union."""
    n, m, p = D1.n, D1.m, D2.m
    total = n + m + p
    keep = list(range(n)) + list(range(n + m, total))
    proj = [[1 if j == i else 0 for j in range(total)] for i in keep]
    out = []
    for a in D1.cones:
        ea = _embed(a, total, range(n + m))
        for b in D2.cones:
            joint = ea.intersect(_embed(b, total, range(n, total)))
            out.append(linear_image(joint, proj, n + p))
    return prune_contained(out)


def _sum_cones(D1: CoderivativeObject, D2: CoderivativeObject) -> list[PolyCone]:
    """{(x1* + x2*, y*) : (x1*, y*) in D1, (x2*, y*) in D2}, kept as a union."""
    n, m = D1.n, D1.m
    total = 2 * n + m
    ys = list(range(2 * n, total))
    mat = [[1 if j in (i, n + i) else 0 for j in range(total)] for i in range(n)]
    mat += [[1 if j == k else 0 for j in range(total)] for k in ys]
    out = []
    for a in D1.cones:
        ea = _embed(a, total, list(range(n)) + ys)
        for b in D2.cones:
            joint = ea.intersect(_embed(b, total, list(range(n, 2 * n)) + ys))
            out.append(linear_image(joint, mat, n + m))
    return prune_contained(out)


def _rule_report(rule, lhs, rhs, qc, point, isc) -> RuleReport:
    bad = _inclusion(lhs.cones, rhs)
    back = _inclusion(rhs, lhs.cones) is None
    return RuleReport(rule, qc, bad is None, bad, point, isc, back)


# --------------------------------------------------------------------------
# intermediate maps


def chain_intermediate_map(S1: PolyMultimap, S2: PolyMultimap) -> PolyMultimap:
    """G(x, z) = S1(x) cap S2^{-1}(z) as a map R^{n+p} => R^m."""
    if S1.m != S2.n:
        raise DimensionMismatch("inner map's range does not match outer map's domain")
    n, m, p = S1.n, S1.m, S2.m
    total = n + m + p
    order = list(range(n)) + list(range(n + m, total)) + list(range(n, n + m))
    out = []
    for P in S1.pieces:
        lp = P.embed(total, range(n + m))
        for Q in S2.pieces:
            joint = lp.intersect(Q.embed(total, range(n, total)))
            if not joint.is_empty:
                out.append(joint.permute(order))
    return PolyMultimap.make(n + p, m, out)


def sum_intermediate_map(S1: PolyMultimap, S2: PolyMultimap) -> PolyMultimap:
    """G(x, y) = {(y1, y2) : y1 in S1(x), y2 in S2(x), y1 + y2 = y} as a map R^{n+m} => R^{2m}."""
    if (S1.n, S1.m) != (S2.n, S2.m):
        raise DimensionMismatch("summands must map between the same spaces")
    n, m = S1.n, S1.m
    total = n + 3 * m  # (x, y, y1, y2)
    tie = [[0] * n + [1 if j == i else 0 for j in range(m)] + [-1 if j == i else 0 for j in range(m)] * 2
           for i in range(m)]
    out = []
    for P in S1.pieces:
        lp = P.embed(total, list(range(n)) + list(range(n + m, n + 2 * m)))
        for Q in S2.pieces:
            lq = Q.embed(total, list(range(n)) + list(range(n + 2 * m, total)))
            joint = lp.intersect(lq).intersect(Polyhedron.make(total, [], [(r, 0) for r in tie]))
            if not joint.is_empty:
                out.append(joint)
    return PolyMultimap.make(n + m, 2 * m, out)


def intermediate_points(S1: PolyMultimap, S2: PolyMultimap, x, z) -> list[tuple]:
    """One exact point of G(x, z) per piece pair; the caller picks which one to use."""
    G = chain_intermediate_map(S1, S2)
    u = as_vector(x) + as_vector(z)
    fixed = {i: v for i, v in enumerate(u)}
    out = []
    for P in G.pieces:
        sl = P.slice(fixed)
        if sl.is_empty:
            continue
        w = sl.witness
        if w not in out:
            out.append(w)
    return out


def inner_semicontinuity_check(G: PolyMultimap, constraint: Polyhedron | None, base, radii: Sequence[float] = (),
                               samples: int = 200, seed: int = 0, mode: str = "continuous") -> bool:
    """Sampled test that d(ybar, G(u)) -> 0 as u -> ubar inside dom G cap constraint.

    ``mode="compact"`` only asks for bounded selections near ubar.
    """
    u0, y0 = as_vector(base[0]), as_vector(base[1])
    if not G.graph_contains(u0, y0):
        raise BaseNotInGraph("base point is not in the graph")
    radii = tuple(radii) or tuple(2.0 ** -k for k in range(2, 7))
    C = constraint if constraint is not None else Polyhedron.full(G.n)
    doms = []
    for P in G.pieces:
        D = project(P, range(G.n)).intersect(C)
        if not D.is_empty:
            doms.append(PolyProjector.of(D))
    rng = np.random.default_rng(seed)
    d = G.n
    U = rng.normal(size=(samples, d))
    U /= np.maximum(np.linalg.norm(U, axis=1, keepdims=True), 1e-300)
    U *= rng.uniform(0, 1, (samples, 1)) ** (1.0 / max(d, 1))
    uf = np.array([float(v) for v in u0])
    yf = np.array([float(v) for v in y0])
    worst = []
    for r in radii:
        pts = []
        for proj in doms:
            Q, ok = proj.project(uf + r * U)
            near = ok & (np.linalg.norm(Q - uf, axis=1) <= r * (1 + 1e-9))
            pts.append(Q[near])
        X = np.vstack(pts) if pts else np.zeros((0, d))
        if not len(X):
            worst.append(0.0)
            continue
        dist = G.distances(X, np.tile(yf, (len(X), 1)))
        worst.append(float(np.max(dist)))
    if mode == "compact":
        return all(np.isfinite(w) for w in worst) and worst[-1] <= 2 * worst[0] + 1.0
    if worst[-1] <= 1e-9:
        return True
    return np.isfinite(worst[-1]) and worst[-1] <= 0.25 * worst[0]


# --------------------------------------------------------------------------
# chain rule


def _check_intermediate(S1, S2, Omega, x, y, z):
    if Omega is not None and not Omega.contains(x):
        raise BaseNotInGraph("base x is outside Omega")
    if not (S1.graph_contains(x, y) and S2.graph_contains(y, z)):
        raise IntermediateNotInG(f"{y} is not in S1({x}) cap S2^-1({z})")


def _resolve_y(S1, S2, x, z, y):
    if y is not None:
        return as_vector(y)
    pts = intermediate_points(S1, S2, x, z)
    if not pts:
        raise BaseNotInGraph("no intermediate point: (x, z) is not in the composed graph")
    return pts[0]


def chain_qc_check(S1: PolyMultimap, S2: PolyMultimap, Omega: Polyhedron | None, x, y, z) -> bool:
    return _chain_qc(S1, S2, Omega, x, y, z)[0]


def _chain_qc(S1, S2, Omega, x, y, z):
    x, y, z = as_vector(x), as_vector(y), as_vector(z)
    D1 = limiting_coderivative(S1, Omega, None, (x, y))
    D2 = limiting_coderivative(S2, None, None, (y, z))
    w = _pairwise_nonzero(zero_image(D2).cones, kernel(D1).cones)
    return w is None, w, D1, D2


def verify_chain_rule(S1: PolyMultimap, S2: PolyMultimap, Omega: Polyhedron | None, x, z, y=None,
                      variant: str = "M", isc_samples: int = 200, seed: int = 0) -> RuleReport:
    """Check D*(S2 o S1)_Omega(x|z) inside D*(S1)_Omega(x|y) o D*S2(y|z)."""
    if variant not in ("M", "N"):
        raise ValueError("variant must be 'M' or 'N'")
    x, z = as_vector(x), as_vector(z)
    y = _resolve_y(S1, S2, x, z, y)
    _check_intermediate(S1, S2, Omega, x, y, z)
    qc, _, D1, D2 = _chain_qc(S1, S2, Omega, x, y, z)
    lhs = limiting_coderivative(compose(S1, S2), Omega, None, (x, z))
    rhs = _compose_cones(D1, D2)
    G = chain_intermediate_map(S1, S2)
    Cz = Omega.product(Polyhedron.full(S2.m)) if Omega is not None else None
    isc = inner_semicontinuity_check(G, Cz, (x + z, y), samples=isc_samples, seed=seed)
    return _rule_report(f"chain-{variant}", lhs, rhs, qc, y, isc)


def verify_chain_rule_smooth(S1: PolyMultimap, A: Sequence[Sequence], offset: Sequence | None,
                             Omega: Polyhedron | None, x, z, y) -> RuleReport:
    """Outer map f(y) = A y + offset: LHS inside {(x*, z*) : (x*, A^T z*) in D*(S1)_Omega}."""
    f = PolyMultimap.linear(A, offset)
    if f.n != S1.m:
        raise DimensionMismatch("affine map does not act on the range of S1")
    x, y, z = as_vector(x), as_vector(y), as_vector(z)
    _check_intermediate(S1, f, Omega, x, y, z)
    D1 = limiting_coderivative(S1, Omega, None, (x, y))
    lhs = limiting_coderivative(compose(S1, f), Omega, None, (x, z))
    n, m, p = S1.n, S1.m, f.m

    def pull(a):
        ax, ay = list(a[:n]), a[n:]
        return ax + [sum(Fraction(A[k][i]) * ay[i] for i in range(m)) for k in range(p)]

    rhs = [PolyCone.from_hrep(n + p, [pull(a) for a in c.ineqs], [pull(a) for a in c.eqs]) for c in D1.cones]
    return _rule_report("chain-smooth", lhs, rhs, True, y, True)


# --------------------------------------------------------------------------
# sum rule


def sum_qc_check(S1: PolyMultimap, S2: PolyMultimap, Omega: Polyhedron | None, x, y1, y2) -> bool:
    return _sum_qc(S1, S2, Omega, x, y1, y2)[0]


def _sum_qc(S1, S2, Omega, x, y1, y2):
    x = as_vector(x)
    D1 = limiting_coderivative(S1, Omega, None, (x, as_vector(y1)))
    D2 = limiting_coderivative(S2, Omega, None, (x, as_vector(y2)))
    neg = [_negate(c) for c in zero_image(D2).cones]
    w = _pairwise_nonzero(zero_image(D1).cones, neg)
    return w is None, w, D1, D2


def verify_sum_rule(S1: PolyMultimap, S2: PolyMultimap, Omega: Polyhedron | None, x, y, y1, y2,
                    variant: str = "M", isc_samples: int = 200, seed: int = 0) -> RuleReport:
    """Check D*(S1 + S2)_Omega(x|y) inside D*(S1)_Omega(x|y1) + D*(S2)_Omega(x|y2)."""
    if variant not in ("M", "N"):
        raise ValueError("variant must be 'M' or 'N'")
    x, y, y1, y2 = (as_vector(v) for v in (x, y, y1, y2))
    if tuple(a + b for a, b in zip(y1, y2)) != y:
        raise SumMismatch(f"{y1} + {y2} != {y}")
    if Omega is not None and not Omega.contains(x):
        raise BaseNotInGraph("base x is outside Omega")
    if not (S1.graph_contains(x, y1) and S2.graph_contains(x, y2)):
        raise BaseNotInGraph("summand base points are not in the graphs")
    qc, _, D1, D2 = _sum_qc(S1, S2, Omega, x, y1, y2)
    lhs = limiting_coderivative(msum(S1, S2), Omega, None, (x, y))
    rhs = _sum_cones(D1, D2)
    G = sum_intermediate_map(S1, S2)
    C = Omega.product(Polyhedron.full(S1.m)) if Omega is not None else None
    isc = inner_semicontinuity_check(G, C, (x + y, y1 + y2), samples=isc_samples, seed=seed)
    return _rule_report(f"sum-{variant}", lhs, rhs, qc, (y1, y2), isc)


# --------------------------------------------------------------------------


def psnc_preservation_report(kind: str, instance: ChainInstance | SumInstance) -> RuleReport:
    """Evaluate the qualification condition behind PSNC transfer; the PSNC conclusion itself is automatic."""
    if kind == "chain":
        x, z = as_vector(instance.x), as_vector(instance.z)
        y = _resolve_y(instance.S1, instance.S2, x, z, instance.y)
        qc, w, *_ = _chain_qc(instance.S1, instance.S2, instance.Omega, x, y, z)
        point = y
    elif kind == "sum":
        qc, w, *_ = _sum_qc(instance.S1, instance.S2, instance.Omega, instance.x, instance.y1, instance.y2)
        point = (as_vector(instance.y1), as_vector(instance.y2))
    else:
        raise ValueError("kind must be 'chain' or 'sum'")
    return RuleReport(f"psnc-{kind}", qc, True, w, point, None, None, True, PSNC_NOTE)
