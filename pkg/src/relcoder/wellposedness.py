"""Certificates for relative Lipschitz-like, metric regularity and linear openness properties."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .coderivative import (
    OuterNormResult,
    _moreau_samples,
    kernel,
    limiting_coderivative,
    mirror_coderivative,
    outer_norm,
    zero_image,
)
from .cones import cone_sum, polar
from .errors import NonConvexConstraint, ThetaNotInImage
from .geometry import eps_normal_test, nearby_points, tangent_cone
from .multifunction import PolyMultimap, image, invert
from .polyhedra import Polyhedron
from .rational import as_vector, dot, nullspace, to_fraction

PSNC_NOTE = "relative PSNC holds automatically in finite dimensions; recorded, not computed"
PROPERTIES = ("lipschitz-like-relative", "metric-regular-relative", "linearly-open-relative")


@dataclass(frozen=True)
class Certificate:
    property: str
    verdict: str  # holds | fails | inconclusive
    criterionExact: bool
    bound: OuterNormResult
    witnesses: tuple = ()
    psncNote: str = PSNC_NOTE
    details: dict = field(default_factory=dict, compare=False)

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"


def _convex(Omega) -> Polyhedron | None:
    if Omega is None or isinstance(Omega, Polyhedron):
        return Omega
    pieces = list(Omega)
    if len(pieces) == 1:
        return pieces[0]
    raise NonConvexConstraint("constraint set must be a single convex polyhedron")


def _verdict(trivial: bool, bound: OuterNormResult) -> str:
    if not trivial:
        return "fails"
    return "holds" if bound.converged else "inconclusive"


def certify_lipschitz_like(S: PolyMultimap, Omega, base) -> Certificate:
    """Zero-image test of the limiting relative coderivative, with the exact modulus as bound."""
    Om = _convex(Omega)
    D = limiting_coderivative(S, Om, None, base)
    zi = zero_image(D)
    bound = outer_norm(D)
    witnesses: tuple = ()
    if not zi.isTrivial:
        ray = zi.nonzero_ray()
        witnesses = (tuple(ray) + (0,) * S.m,)
    elif bound.witnessRay is not None:
        witnesses = (bound.witnessRay,)
    return Certificate("lipschitz-like-relative", _verdict(zi.isTrivial, bound), True, bound, witnesses,
                       details={"cones": len(D.cones)})


def theta_in_image(S: PolyMultimap, Theta: Polyhedron | None, centre, radius=Fraction(1), count: int = 24,
                   seed: int = 0) -> bool:
    """Sampled check that Theta (near the centre; None is the whole space) lies in the image of S."""
    Theta = Theta if Theta is not None else Polyhedron.full(S.m)
    centre = as_vector(centre)
    imgs = image(S)
    rng = np.random.default_rng(seed)
    m = S.m
    box = Polyhedron.make(m, [([1 if i == j else 0 for i in range(m)], c + radius) for j, c in enumerate(centre)]
                          + [([-1 if i == j else 0 for i in range(m)], radius - c) for j, c in enumerate(centre)])
    Q = Theta.intersect(box)
    pts = [tuple(centre)]
    for _ in range(count):
        c1 = [int(v) for v in rng.integers(-3, 4, m)]
        c2 = [int(v) for v in rng.integers(-3, 4, m)]
        r1, r2 = Q.maximize(c1), Q.maximize(c2)
        if r1.ok and r2.ok:
            w = Fraction(int(rng.integers(0, 5)), 4)
            pts.append(tuple(w * a + (1 - w) * b for a, b in zip(r1.x, r2.x)))
    return all(any(I.contains(p) for I in imgs) for p in pts)


def certify_property(S: PolyMultimap, constraint, base, property: str) -> Certificate:
    """Lipschitz-like relative to Omega, or regularity/openness relative to Theta via the mirror kernel."""
    if property not in PROPERTIES:
        raise ValueError(f"unknown property {property!r}")
    if property == "lipschitz-like-relative":
        return certify_lipschitz_like(S, constraint, base)
    Th = _convex(constraint)
    x, y = as_vector(base[0]), as_vector(base[1])
    if Th is not None and not theta_in_image(S, Th, y):
        raise ThetaNotInImage("sampled points of Theta lie outside the image of S")
    M = mirror_coderivative(S, Th, (x, y))
    ker = kernel(M)
    inv = limiting_coderivative(invert(S), Th, None, (y, x))
    bound = outer_norm(inv)
    witnesses: tuple = ()
    if not ker.isTrivial:
        witnesses = ((0,) * S.n + tuple(ker.nonzero_ray()),)
    elif bound.witnessRay is not None:
        witnesses = (bound.witnessRay,)
    return Certificate(property, _verdict(ker.isTrivial, bound), True, bound, witnesses,
                       details={"mirrorCones": len(M.cones), "route": "kernel of mirror coderivative"})


def linear_operator_certificate(A: Sequence[Sequence], xbar: Sequence | None = None) -> Certificate:
    """Lipschitz-like property of A^-1 relative to the range of A, with the 1/sigma_min comparison."""
    Aq = [[to_fraction(v) for v in row] for row in A]
    m, n = len(Aq), len(Aq[0])
    xbar = as_vector(xbar) if xbar is not None else (Fraction(0),) * n
    zbar = tuple(dot(row, xbar) for row in Aq)
    cols = [[Aq[i][j] for i in range(m)] for j in range(n)]
    left = nullspace(cols, m)  # rows w with w^T A = 0 cut out the range
    Z = Polyhedron.make(m, [], [(w, dot(w, zbar)) for w in left])
    Sinv = invert(PolyMultimap.linear(Aq))
    cert = certify_lipschitz_like(Sinv, Z, (zbar, xbar))
    s = np.linalg.svd(np.array(Aq, dtype=float), compute_uv=False)
    pos = s[s > 1e-12 * max(1.0, s.max() if len(s) else 1.0)]
    ref = 1.0 / pos.min() if len(pos) else 0.0
    details = dict(cert.details, reciprocalSigmaMin=ref, rangeEquations=len(left))
    return Certificate(cert.property, cert.verdict, cert.criterionExact, cert.bound, cert.witnesses, cert.psncNote, details)


# --------------------------------------------------------------------------
# neighbourhood estimates


@dataclass(frozen=True)
class EstimateCheck:
    holds: bool
    violator: dict | None
    tested: int


def pointwise_estimate_check(S: PolyMultimap, Omega, base, kappa, delta, eps_max, mode: str = "necessary",
                             samples: int = 40, seed: int = 0) -> EstimateCheck:
    """|x*| <= kappa |y*| + eps (1 + kappa)   (necessary)  or  + sqrt(eps) (1 + kappa)  (sufficient)
    for sampled (x*, -y*) in the eps-normals to gph S|_Omega with x* tangent to Omega, near the base."""
    if mode not in ("necessary", "sufficient"):
        raise ValueError("mode must be 'necessary' or 'sufficient'")
    Om = _convex(Omega) or Polyhedron.full(S.n)
    n, m = S.n, S.m
    kappa, delta, eps_max = to_fraction(kappa), to_fraction(delta), to_fraction(eps_max)
    rng = np.random.default_rng(seed)
    box = Om.product(Polyhedron.full(m))
    graph = [P.intersect(box) for P in S.pieces]
    graph = [P for P in graph if not P.is_empty]
    z0 = as_vector(base[0]) + as_vector(base[1])
    if not any(P.contains(z0) for P in graph):
        from .errors import BaseNotInGraph

        raise BaseNotInGraph("base point is not in the restricted graph")
    tested = 0
    eps_levels = sorted({Fraction(0), eps_max / 4, eps_max / 2, eps_max})
    for z in nearby_points(graph, z0, delta):
        live = [P for P in graph if P.contains(z)]
        T = cone_sum([tangent_cone(P, z) for P in live], n + m)
        Tx = tangent_cone(Om, z[:n])
        N = polar(T)
        core = N.add_rows([tuple(a) + (0,) * m for a in Tx.ineqs], [tuple(e) + (0,) * m for e in Tx.eqs])
        for eps in eps_levels:
            for w in _moreau_samples(T, eps, rng, samples // len(eps_levels) + 1, normal=core):
                xs, ys = w[:n], tuple(-t for t in w[n:])
                if not Tx.contains(xs) or not eps_normal_test(live, z, w, eps):
                    continue
                tested += 1
                nx = math.sqrt(sum(float(t) ** 2 for t in xs))
                ny = math.sqrt(sum(float(t) ** 2 for t in ys))
                slack = float(eps) if mode == "necessary" else math.sqrt(float(eps))
                rhs = float(kappa) * ny + slack * (1 + float(kappa))
                if nx > rhs * (1 + 1e-12) + 1e-12:
                    return EstimateCheck(False, {"point": [str(t) for t in z], "xStar": [str(t) for t in xs],
                                                 "yStar": [str(t) for t in ys], "eps": str(eps),
                                                 "lhs": nx, "rhs": rhs}, tested)
    return EstimateCheck(True, None, tested)


# --------------------------------------------------------------------------
# two-point versus one-sided formulations


@dataclass(frozen=True)
class FormulationReport:
    formulationI: bool
    formulationII: bool
    agree: bool
    pairs: tuple  # (rV, rW, (i) holds, (ii) holds)


def lipschitz_formulation_equivalence(S: PolyMultimap, Omega, base, kappa, radii: Sequence, samples: int = 300,
                                      seed: int = 0, far: float = 8.0) -> FormulationReport:
    """Evaluate the inclusion with x, x' both near the base (i) and with x' anywhere in Omega (ii).

    Each formulation is existential in the neighbourhoods, so each is true
    when some tested radius pair satisfies it on the grid.
    """
    from .oracle.sampling import _GraphSampler, _ball, _fl, _restricted_pieces, _unit_rows
    from .qp import PolyProjector

    Om = _convex(Omega)
    kappa = float(kappa)
    n, m = S.n, S.m
    x0, y0 = _fl(base[0]), _fl(base[1])
    sampler = _GraphSampler(_restricted_pieces(S, Om, None), n)
    omproj = PolyProjector.of(Om) if Om is not None and not Om.is_full else None
    rng = np.random.default_rng(seed)
    U = _ball(rng, samples, n + m)
    Ux = _ball(rng, samples, n)
    D = _unit_rows(rng, samples, n)
    pairs = []
    for rad in radii:
        rv, rw = (float(rad), float(rad)) if np.isscalar(rad) else (float(rad[0]), float(rad[1]))
        def graph_points(rx):
            Z = np.concatenate([x0, y0])[None, :] + U * np.concatenate([np.full(n, rx), np.full(m, rw)])
            pts = []
            for pr in sampler.proj:
                Y, ok = pr.project(Z)
                keep = ok & (np.linalg.norm(Y[:, :n] - x0, axis=1) <= rx + 1e-12) & (np.linalg.norm(Y[:, n:] - y0, axis=1) <= rw + 1e-12)
                pts.append(Y[keep])
            return np.vstack(pts + [np.concatenate([x0, y0])[None, :]])

        def near_x(k):
            X = x0 + rv * Ux[:k]
            if omproj is not None:
                X, _ = omproj.project(X)
            return X[np.linalg.norm(X - x0, axis=1) <= rv + 1e-12]

        def check(Zp):
            Xp, Yp = Zp[:, :n], Zp[:, n:]
            Xs = near_x(len(Ux))
            if len(Xs) == 0:
                return True
            # random pairs and short steps from each x'
            idx = rng.integers(0, len(Xs), len(Xp))
            X1 = Xs[idx]
            X2 = Xp + (rv * rv / 4) * D[np.arange(len(Xp)) % len(D)]
            if omproj is not None:
                X2, _ = omproj.project(X2)
            X2ok = np.linalg.norm(X2 - x0, axis=1) <= rv + 1e-12
            Xa = np.vstack([X1, X2[X2ok]])
            Ya = np.vstack([Yp, Yp[X2ok]])
            Xpa = np.vstack([Xp, Xp[X2ok]])
            d = S.distances(Xa, Ya)
            gap = np.linalg.norm(Xa - Xpa, axis=1)
            return bool(np.all(d <= kappa * gap * (1 + 1e-6) + 1e-9))

        holds_i = check(graph_points(rv))
        holds_ii = check(graph_points(far * rv)) and holds_i
        pairs.append((rv, rw, holds_i, holds_ii))
    fi = any(p[2] for p in pairs)
    fii = any(p[3] for p in pairs)
    return FormulationReport(fi, fii, fi == fii, tuple(pairs))
