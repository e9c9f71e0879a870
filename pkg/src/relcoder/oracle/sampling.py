"""Brute-force estimators built from the raw definitions.

Nothing here touches coderivatives: Lipschitz moduli are estimated from
distances between sampled values, regularity by grids of distance ratios and
normal cones by a floating-point cone conversion at sampled graph points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from ..errors import BaseNotInGraph
from ..multifunction import PolyMultimap, invert, restrict
from ..polyhedra import Polyhedron
from ..qp import PolyProjector

STABLE_REL = 0.02
DIVERGE_FACTOR = 2.0


@dataclass(frozen=True)
class SampleConfig:
    seed: int = 0
    radii: tuple[float, ...] = tuple(2.0 ** -k for k in range(3, 8))
    samples: int = 400
    tolerance: float = 1e-9

    def __post_init__(self):
        r = tuple(float(v) for v in self.radii)
        if not r or any(v <= 0 for v in r) or any(a <= b for a, b in zip(r, r[1:])):
            raise ValueError("radius schedule must be positive and strictly decreasing")
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "radii", r)


@dataclass(frozen=True)
class OracleEstimate:
    quantity: str
    value: float
    trend: tuple[float, ...]
    verdictHint: str
    witness: dict = field(default_factory=dict, compare=False)


def classify_trend(trend: Sequence[float]) -> str:
    t = list(trend)
    if not t:
        return "inconclusive"
    if math.isinf(t[-1]):
        return "diverging"
    if len(t) >= 2:
        a, b = t[-2], t[-1]
        if abs(a - b) <= STABLE_REL * max(abs(a), abs(b)) or max(abs(a), abs(b)) < 1e-12:
            return "stable"
        if len(t) >= 3:
            # at least doubles across the final two halvings, without dipping on the way
            u, v, w = t[-3:]
            if 0 < u <= v <= w and w >= DIVERGE_FACTOR * u:
                return "diverging"
    return "inconclusive"


def _unit_rows(rng: np.random.Generator, k: int, d: int) -> np.ndarray:
    if d == 0:
        return np.zeros((k, 0))
    v = rng.normal(size=(k, d))
    n = np.linalg.norm(v, axis=1, keepdims=True)
    n[n == 0] = 1.0
    return v / n


def _ball(rng: np.random.Generator, k: int, d: int) -> np.ndarray:
    return _unit_rows(rng, k, d) * rng.uniform(0, 1, (k, 1)) ** (1.0 / max(d, 1))


def _fl(v) -> np.ndarray:
    return np.array([float(t) for t in v], dtype=float)


class _GraphSampler:
    """Points of a union of polyhedra near a base point, by projection of ball samples."""

    def __init__(self, pieces: Sequence[Polyhedron], n: int):
        self.pieces = list(pieces)
        self.proj = [PolyProjector.of(P) for P in self.pieces]
        self.n = n

    def home(self, z0: np.ndarray) -> int:
        """Index of a piece containing z0 (-1 if none, which cannot happen after the base check)."""
        for j, P in enumerate(self.pieces):
            A, b, E, f = P.arrays()
            if np.all(A @ z0 <= b + 1e-12) and np.all(np.abs(E @ z0 - f) <= 1e-12):
                return j
        return -1

    def sample(self, z0: np.ndarray, r: float, U: np.ndarray, slack: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
        """Projected points within r of z0 in both blocks, and the piece each came from."""
        Z = z0[None, :] + r * U
        pts, which = [], []
        for j, pr in enumerate(self.proj):
            Y, ok = pr.project(Z)
            nx = np.linalg.norm(Y[:, : self.n] - z0[: self.n], axis=1)
            ny = np.linalg.norm(Y[:, self.n :] - z0[self.n :], axis=1)
            keep = ok & (nx <= r * slack + 1e-12) & (ny <= r * slack + 1e-12)
            pts.append(Y[keep])
            which.append(np.full(int(keep.sum()), j))
        pts.append(z0[None, :])
        which.append(np.array([self.home(z0)]))
        return np.vstack(pts), np.concatenate(which)

    def faces(self, z0: np.ndarray, max_rows: int = 3) -> list[Polyhedron]:
        """Faces of the pieces through z0 cut out by up to max_rows rows tight at z0.

        Ball samples projected onto a piece rarely land on thin faces; projecting
        onto the faces themselves reaches every stratum through the base.
        """
        out = []
        for P in self.pieces:
            A, b, _, _ = P.arrays()
            tight = [i for i in range(len(A)) if abs(A[i] @ z0 - b[i]) <= 1e-12]
            for k in range(1, min(max_rows, len(tight)) + 1):
                for rows in combinations(tight, k):
                    F = Polyhedron.make(P.dim, [r for i, r in enumerate(P.ineqs) if i not in rows],
                                        list(P.eqs) + [P.ineqs[i] for i in rows])
                    if not F.is_empty:
                        out.append(F)
        return out

    def reproject(self, Z: np.ndarray, which: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Project each row onto its own piece; rows that fail are flagged, not kept."""
        out = Z.copy()
        good = np.zeros(len(Z), dtype=bool)
        for j, pr in enumerate(self.proj):
            mask = which == j
            if mask.any():
                Y, ok = pr.project(Z[mask])
                out[mask] = Y
                good[mask] = ok
        return out, good


def _restricted_pieces(S: PolyMultimap, Omega: Polyhedron | None, Theta: Polyhedron | None) -> list[Polyhedron]:
    Om = Omega if Omega is not None else Polyhedron.full(S.n)
    Th = Theta if Theta is not None else Polyhedron.full(S.m)
    box = Om.product(Th)
    out = [P.intersect(box) for P in S.pieces]
    return [P for P in out if not P.is_empty]


def _check_base(S, Omega, Theta, base):
    x, y = base
    Om = Omega if Omega is not None else Polyhedron.full(S.n)
    Th = Theta if Theta is not None else Polyhedron.full(S.m)
    if not (Om.contains(x) and Th.contains(y) and S.graph_contains(x, y)):
        raise BaseNotInGraph("base point is not in the restricted graph")


# --------------------------------------------------------------------------
# Lipschitz modulus


def _ratios(S, omproj, Xp, Yp, D, h, x0, r):
    X = Xp + h * D
    if omproj is not None:
        X, ok = omproj.project(X)
    dx = np.linalg.norm(X - Xp, axis=1)
    valid = (dx > 1e-3 * h) & (np.linalg.norm(X - x0, axis=1) <= r * (1 + 1e-9) + 1e-15)
    ratio = np.full(len(Xp), -1.0)
    if valid.any():
        d = S.distances(X[valid], Yp[valid])
        ratio[valid] = d / dx[valid]
    return ratio, X


def sample_lip(S: PolyMultimap, Omega: Polyhedron | None, base, cfg: SampleConfig | None = None,
               climb_steps: int = 40, climb_top: int = 12) -> OracleEstimate:
    """Empirical Lipschitz-like modulus relative to Omega, one sup per radius."""
    cfg = cfg or SampleConfig()
    _check_base(S, Omega, None, base)
    n, m = S.n, S.m
    x0, y0 = _fl(base[0]), _fl(base[1])
    z0 = np.concatenate([x0, y0])
    sampler = _GraphSampler(_restricted_pieces(S, Omega, None), n)
    omproj = PolyProjector.of(Omega) if Omega is not None and not Omega.is_full else None
    rng = np.random.default_rng(cfg.seed)
    K = cfg.samples
    U = _ball(rng, K, n + m)
    Dall = _unit_rows(rng, 4 * K, n)
    trend, witness = [], {}
    carry = None
    for r in cfg.radii:
        Z, which = sampler.sample(z0, r, U)
        reps = 4
        Z = np.repeat(Z, reps, axis=0)
        which = np.repeat(which, reps)
        D = Dall[np.arange(len(Z)) % len(Dall)]
        h = r * r / 4
        ratio, X = _ratios(S, omproj, Z[:, :n], Z[:, n:], D, h, x0, r)
        if carry is not None:
            # the previous champions shrunk towards the base: on conic pieces the
            # ratio of a shrunk configuration scales exactly like h / r
            pz, pw, pd, pr = carry
            sz, sok = sampler.reproject(z0 + (pz - z0) * (r / pr), pw)
            sr, _ = _ratios(S, omproj, sz[:, :n], sz[:, n:], pd, h, x0, r)
            inside = (np.linalg.norm(sz[:, :n] - x0, axis=1) <= r) & (np.linalg.norm(sz[:, n:] - y0, axis=1) <= r)
            sr[~(inside & sok)] = -1.0
            Z, which, D = np.vstack([Z, sz]), np.concatenate([which, pw]), np.vstack([D, pd])
            ratio = np.concatenate([ratio, sr])
        best = float(ratio.max()) if len(ratio) else -1.0
        if math.isfinite(best) and best >= 0:
            crng = np.random.default_rng([cfg.seed, int(round(-math.log2(r) * 1000))])
            order = np.argsort(-ratio)[:climb_top]
            cz, cw, cd, cr = Z[order], which[order], D[order], ratio[order]
            sigma = 0.1 * r
            for _ in range(climb_steps):
                tz, tok = sampler.reproject(cz + sigma * crng.normal(size=cz.shape), cw)
                inside = tok & (np.linalg.norm(tz[:, :n] - x0, axis=1) <= r) & (np.linalg.norm(tz[:, n:] - y0, axis=1) <= r)
                td = cd + 0.5 * (sigma / r) * crng.normal(size=cd.shape)
                td /= np.maximum(np.linalg.norm(td, axis=1, keepdims=True), 1e-300)
                tr, _ = _ratios(S, omproj, tz[:, :n], tz[:, n:], td, h, x0, r)
                acc = inside & (tr > cr)
                cz[acc], cd[acc], cr[acc] = tz[acc], td[acc], tr[acc]
                sigma *= 0.9
            best = max(best, float(cr.max()))
            k = int(np.argmax(cr))
            witness = {"radius": r, "x_prime": cz[k, :n].tolist(), "y_prime": cz[k, n:].tolist(), "direction": cd[k].tolist()}
            carry = (cz.copy(), cw.copy(), cd.copy(), r)
        trend.append(max(best, 0.0) if best >= 0 else 0.0)
    hint = classify_trend(trend)
    return OracleEstimate("lip", trend[-1], tuple(trend), hint, witness)


# --------------------------------------------------------------------------
# regularity and openness grids


def _regularity_pairs(S: PolyMultimap, Theta: Polyhedron | None, base, cfg: SampleConfig):
    """Shared grid of (x', y, y'') with y'' in S(x') and y in Theta near the base."""
    n, m = S.n, S.m
    ST = restrict(S, None, Theta)
    x0, y0 = _fl(base[0]), _fl(base[1])
    z0 = np.concatenate([x0, y0])
    r = cfg.radii[-1]
    sampler = _GraphSampler(ST.pieces, n)
    rng = np.random.default_rng(cfg.seed)
    Z, _ = sampler.sample(z0, r, _ball(rng, cfg.samples, n + m))
    thproj = PolyProjector.of(Theta) if Theta is not None and not Theta.is_full else None
    xs, ys, yv, gaps = [], [], [], []
    deltas = [r * 10.0 ** -k for k in range(6)]
    for delta in deltas:
        Uy = _unit_rows(rng, len(Z), m) * delta
        Y = Z[:, n:] + Uy
        if thproj is not None:
            Y, _ = thproj.project(Y)
        keep = np.linalg.norm(Y - y0, axis=1) <= r + 1e-15
        xs.append(Z[keep, :n])
        ys.append(Y[keep])
        yv.append(Z[keep, n:])
        gaps.append(np.linalg.norm(Y[keep] - Z[keep, n:], axis=1))
    # plain grid of targets in Theta around the base, paired with every sampled x'
    Yg = y0 + r * _ball(rng, min(cfg.samples, 64), m)
    if thproj is not None:
        Yg, _ = thproj.project(Yg)
    idx = rng.integers(0, len(Z), len(Yg))
    xs.append(Z[idx, :n])
    ys.append(Yg)
    yv.append(Z[idx, n:])
    gaps.append(np.linalg.norm(Yg - Z[idx, n:], axis=1))
    return ST, np.vstack(xs), np.vstack(ys), np.vstack(yv), np.concatenate(gaps)


def grid_metric_regularity(S: PolyMultimap, Theta: Polyhedron | None, base, kappa: float,
                           cfg: SampleConfig | None = None) -> tuple[bool, dict | None]:
    """Check d(x', S^-1(y)) <= kappa d(y, S|^Theta(x')) on a grid near the base."""
    cfg = cfg or SampleConfig()
    _check_base(S, None, Theta, base)
    ST, X, Y, _, _ = _regularity_pairs(S, Theta, base, cfg)
    lhs = invert(ST).distances(Y, X)
    rhs = ST.distances(X, Y)
    bad = lhs > kappa * rhs * (1 + 1e-6) + 1e-9
    if bad.any():
        k = int(np.argmax(np.where(bad, lhs - kappa * rhs, -np.inf)))
        return False, {"x_prime": X[k].tolist(), "y": Y[k].tolist(), "lhs": float(lhs[k]), "rhs": float(rhs[k])}
    return True, None


def grid_linear_openness(S: PolyMultimap, Theta: Polyhedron | None, base, kappa: float,
                         cfg: SampleConfig | None = None) -> tuple[bool, dict | None]:
    """Check (S|^Theta(x') + eps B) n Theta n W inside S|^Theta(x' + kappa eps B) on the same grid.

    Each grid target y lies within eps = |y - y''| of a value y'' in S(x'),
    so membership of the fattened set is guaranteed; the inclusion then asks
    for a preimage of y within kappa * eps of x'.
    """
    cfg = cfg or SampleConfig()
    _check_base(S, None, Theta, base)
    ST, X, Y, _, gaps = _regularity_pairs(S, Theta, base, cfg)
    reach = invert(ST).distances(Y, X)
    bad = reach > kappa * gaps * (1 + 1e-6) + 1e-9
    if bad.any():
        k = int(np.argmax(np.where(bad, reach - kappa * gaps, -np.inf)))
        return False, {"x_prime": X[k].tolist(), "y": Y[k].tolist(), "eps": float(gaps[k]), "reach": float(reach[k])}
    return True, None


# --------------------------------------------------------------------------
# coderivative by sampling


def float_cone_generators(A: np.ndarray, E: np.ndarray, dim: int, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Extreme rays and lineality basis of {v : A v <= 0, E v = 0} by active-subset enumeration."""
    A = np.asarray(A, float).reshape(-1, dim)
    E = np.asarray(E, float).reshape(-1, dim)
    An = A / np.maximum(np.linalg.norm(A, axis=1, keepdims=True), 1e-300) if len(A) else A
    allrows = np.vstack([An, E])
    L = _null(allrows, dim)
    base_rows = np.vstack([E, L.T]) if L.shape[1] else E
    r0 = np.linalg.matrix_rank(base_rows, tol=1e-9) if len(base_rows) else 0
    need = dim - r0 - 1
    rays = []
    if need >= 0 and (need <= len(An)):
        for S in combinations(range(len(An)), need):
            M = np.vstack([base_rows, An[list(S)]]) if need else base_rows
            N = _null(M, dim)
            if N.shape[1] != 1:
                continue
            v = N[:, 0]
            for s in (1.0, -1.0):
                w = s * v
                if len(An) == 0 or (An @ w <= tol).all():
                    rays.append(w / np.linalg.norm(w))
    R = _dedupe_rows(np.array(rays).reshape(-1, dim))
    return R, _rref_float(L.T)


def _null(M: np.ndarray, dim: int) -> np.ndarray:
    if len(M) == 0:
        return np.eye(dim)
    _, s, vt = np.linalg.svd(M)
    r = int((s > 1e-9 * max(1.0, s.max() if len(s) else 1.0)).sum())
    return vt[r:].T


def _dedupe_rows(R: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    out: list[np.ndarray] = []
    for v in R:
        if not any(np.linalg.norm(v - w) < tol for w in out):
            out.append(v)
    return np.array(out).reshape(-1, R.shape[1])


def _rref_float(B: np.ndarray) -> np.ndarray:
    """Unit-normalised rows of the reduced echelon form of the row span of B."""
    B = np.array(B, float)
    if B.size == 0:
        return B.reshape(0, B.shape[1] if B.ndim == 2 else 0)
    rows, cols = B.shape
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        p = r + int(np.argmax(np.abs(B[r:, c])))
        if abs(B[p, c]) < 1e-9:
            continue
        B[[r, p]] = B[[p, r]]
        B[r] /= B[r, c]
        for i in range(rows):
            if i != r:
                B[i] -= B[i, c] * B[r]
        r += 1
    B = B[:r]
    return B / np.linalg.norm(B, axis=1, keepdims=True)


@dataclass
class SampledCoderivative:
    rays: np.ndarray  # unit rays, lineality in both signs, as (x*, y*)
    cones: list  # per distinct local pattern: (rays, lineality)
    points: int

    def approaches(self, v: np.ndarray, tol: float = 1e-4) -> bool:
        v = np.asarray(v, float)
        v = v / np.linalg.norm(v)
        return bool(len(self.rays) and (np.linalg.norm(self.rays - v, axis=1) < tol).any())


def _active(P: Polyhedron, z: np.ndarray, tol: float):
    A, b, E, f = P.arrays()
    if len(A) and (A @ z > b + tol).any():
        return None
    if len(E) and (np.abs(E @ z - f) > tol).any():
        return None
    act = tuple(int(i) for i in np.nonzero(np.abs(A @ z - b) <= tol)[0]) if len(A) else ()
    return act


def sample_coderivative(S: PolyMultimap, Omega: Polyhedron | None, Theta: Polyhedron | None, base,
                        cfg: SampleConfig | None = None, act_tol: float = 1e-8) -> SampledCoderivative:
    """Oracle approximation of the limiting relative coderivative."""
    cfg = cfg or SampleConfig()
    _check_base(S, Omega, Theta, base)
    n, m = S.n, S.m
    N = n + m
    Om = Omega if Omega is not None else Polyhedron.full(n)
    Th = Theta if Theta is not None else Polyhedron.full(m)
    graph = _restricted_pieces(S, Om, None)  # normals are taken to gph S restricted to Omega
    walk = _restricted_pieces(S, Om, Th)  # points move inside the doubly restricted graph
    x0, y0 = _fl(base[0]), _fl(base[1])
    z0 = np.concatenate([x0, y0])
    sampler = _GraphSampler(walk, n)
    rng = np.random.default_rng(cfg.seed)
    U = _ball(rng, cfg.samples, N)
    pts = [z0[None, :]]
    face_sampler = _GraphSampler(sampler.faces(z0), n)
    Uf = U[: max(20, cfg.samples // 10)]
    for r in cfg.radii:
        Z, _ = sampler.sample(z0, r, U)
        pts.append(Z)
        if face_sampler.pieces:
            Z, _ = face_sampler.sample(z0, r, Uf)
            pts.append(Z)
    Zall = np.vstack(pts)
    arrays = [P.arrays() for P in graph]
    OmA, Omb, OmE, _ = Om.arrays()
    ThA, Thb, ThE, _ = Th.arrays()
    cache: dict = {}
    cones = []
    for z in Zall:
        pat = tuple(_active(P, z, act_tol) for P in graph)
        if all(p is None for p in pat):
            continue
        om_act = tuple(np.nonzero(np.abs(OmA @ z[:n] - Omb) <= act_tol)[0]) if len(OmA) else ()
        th_act = tuple(np.nonzero(np.abs(ThA @ z[n:] - Thb) <= act_tol)[0]) if len(ThA) else ()
        key = (pat, om_act, th_act)
        if key in cache:
            continue
        rows, eqs = [], []
        for (A, b, E, f), act in zip(arrays, pat):
            if act is None:
                continue
            # generators of the piece's tangent cone, then the polar constraints they induce
            G, L = float_cone_generators(A[list(act)], E, N)
            for g in G:
                rows.append(np.concatenate([g[:n], -g[n:]]))
            for l in L:
                eqs.append(np.concatenate([l[:n], -l[n:]]))
        for i in om_act:
            rows.append(np.concatenate([OmA[i], np.zeros(m)]))
        for e in OmE:
            eqs.append(np.concatenate([e, np.zeros(m)]))
        for i in th_act:
            rows.append(np.concatenate([np.zeros(n), -ThA[i]]))
        for e in ThE:
            eqs.append(np.concatenate([np.zeros(n), e]))
        R, L = float_cone_generators(np.array(rows).reshape(-1, N), np.array(eqs).reshape(-1, N), N)
        if len(L):
            # generators orthogonal to the lineality space, as in the exact canonical form
            Q, _ = np.linalg.qr(L.T)
            R = R - (R @ Q) @ Q.T
            nr = np.linalg.norm(R, axis=1)
            R = R[nr > 1e-9] / nr[nr > 1e-9, None]
            R = _dedupe_rows(R)
        cache[key] = (R, L)
        cones.append((R, L))
    rays = [R for R, _ in cones] + [L for _, L in cones] + [-L for _, L in cones]
    allr = np.vstack([r.reshape(-1, N) for r in rays]) if rays else np.zeros((0, N))
    return SampledCoderivative(_dedupe_rows(allr, 1e-7), cones, len(Zall))
