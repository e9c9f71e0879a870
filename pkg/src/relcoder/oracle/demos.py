"""Truncated sequence-space demos of two infinite-dimensional phenomena.

Weak* convergence is modelled by pairings against a fixed finite test family;
reports say so in their ``surrogate`` field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

SURROGATE = "surrogate: weak* convergence modelled by pairing decay against a fixed finite test family"


@dataclass(frozen=True)
class Ell2Report:
    N: int
    K: int
    maxDualNorm: dict  # eps -> max |x*| over admissible samples
    admissible: dict  # eps -> number of admissible samples
    unitNorms: tuple[float, ...]
    pairings: dict  # test name -> pairings <e_k, v> for k = 1..K
    unconstrainedNormal: tuple[bool, ...]  # is (e_k, 0) a regular normal to the restricted graph
    tangentToOmega: tuple[bool, ...]
    surrogate: str = SURROGATE


def _ell2_admissible(xs: np.ndarray, lam: float, eps: float) -> np.ndarray:
    """(x*, -y*) eps-normal to {(t e1, 0): t >= 0} at (lam e1, 0) and x* tangent to the ray there.

    Tangent cone of the graph: {(s e1, 0)} with s free when lam > 0, s >= 0 when lam = 0,
    so y* is unconstrained.
    """
    s = xs[:, 0]
    rest = np.linalg.norm(xs[:, 1:], axis=1)
    proj = np.abs(s) if lam > 0 else np.maximum(s, 0.0)
    eps_normal = proj <= eps
    tangent = (rest == 0) & ((s >= 0) if lam == 0 else np.ones_like(s, dtype=bool))
    return eps_normal & tangent


def ell2_psnc_demo(N: int = 1000, K: int = 100, samples: int = 400, seed: int = 0,
                   eps_levels: tuple[float, ...] = (0.0, 0.01, 0.1)) -> Ell2Report:
    """Relative PSNC holds for S = 0 on a ray in l2, while the unit vectors break the unrelative version."""
    if not 1 <= K <= N:
        raise ValueError("need 1 <= K <= N")
    rng = np.random.default_rng(seed)
    max_norm, counts = {}, {}
    for eps in eps_levels:
        best, cnt = 0.0, 0
        for lam in (0.0, 0.5):
            # half the candidates live on the first axis, half are dense
            s = np.concatenate([np.arange(-20, 21) / 20.0, rng.uniform(-1, 1, samples // 2)])
            xs = np.zeros((len(s) + samples // 2, N))
            xs[: len(s), 0] = s
            xs[len(s):] = rng.normal(size=(samples // 2, N))
            ok = _ell2_admissible(xs, lam, eps)
            cnt += int(ok.sum())
            if ok.any():
                best = max(best, float(np.linalg.norm(xs[ok], axis=1).max()))
        max_norm[str(eps)], counts[str(eps)] = best, cnt
    j = np.arange(1, N + 1, dtype=float)
    family = {"harmonic": 1.0 / j, "squares": 1.0 / j**2, "first": (j == 1).astype(float)}
    E = np.eye(N)[:K]
    unit = tuple(float(v) for v in np.linalg.norm(E, axis=1))
    pair = {name: tuple(float(v) for v in E @ vec) for name, vec in family.items()}
    # regular normals to {(t e1, 0): t >= 0} at the origin: first coordinate <= 0
    normal = tuple(bool(E[k, 0] <= 0) for k in range(K))
    tangent = tuple(bool(np.all(E[k, 1:] == 0) and E[k, 0] >= 0) for k in range(K))
    return Ell2Report(N, K, max_norm, counts, unit, pair, normal, tangent)


@dataclass(frozen=True)
class LpReport:
    M: int
    ks: tuple[int, ...]
    yNorms: tuple[float, ...]
    yNormsExpected: tuple[float, ...]
    projection: tuple[float, ...]  # coefficient mu_k of the projection onto the ray of constants
    projectionClosedForm: tuple[float, ...]
    pairingWithE: tuple[float, ...]
    testPairings: dict = field(default_factory=dict)
    relativeBound: tuple[float, ...] = ()  # largest admissible mu in the relative construction
    surrogate: str = SURROGATE


def _lp_norm(f: np.ndarray, p: float, h: float) -> float:
    return float((h * np.sum(np.abs(f) ** p)) ** (1.0 / p))


def lp43_projectional_demo(M: int = 2**10, K: int = 2**5) -> LpReport:
    """Identity on L^{4/3}(0,1) relative to the ray of constants.

    x_k* = k^{1/3} on (0, 1/k), y_k* = k^{-2/3}.  The metric projection of x_k*
    (in the dual norm of L^4) onto the ray {mu e : mu >= 0} approaches e,
    while the relative construction forces mu <= <y_k*, e> -> 0.
    """
    if not 1 <= K <= M:
        raise ValueError("need 1 <= K <= M")
    h = 1.0 / M
    t = (np.arange(M) + 0.5) * h
    q = 4.0  # dual exponent of 4/3
    ks = tuple(2**i for i in range(int(math.log2(K)) + 1))
    y_norms, expected, mus, closed, pairs, rel = [], [], [], [], [], []
    tests = {"e": np.ones(M), "first-half": (t < 0.5).astype(float), "ramp": t.copy()}
    test_pairs: dict[str, list[float]] = {name: [] for name in tests}
    for k in ks:
        y = np.full(M, k ** (-2.0 / 3.0))
        y_norms.append(_lp_norm(y, q, h))
        expected.append(k ** (-2.0 / 3.0))
        x = np.where(t < 1.0 / k, k ** (1.0 / 3.0), 0.0)
        res = minimize_scalar(lambda mu: h * np.sum(np.abs(x - mu) ** q), bounds=(0.0, float(x.max()) + 1.0),
                              method="bounded", options={"xatol": 1e-12})
        mu = float(res.x)
        mus.append(mu)
        closed.append(1.0 / ((1.0 - 1.0 / k) ** (1.0 / 3.0) + k ** (-1.0 / 3.0)))
        proj = np.full(M, mu)
        pairs.append(float(h * np.sum(proj)))
        for name, v in tests.items():
            test_pairs[name].append(float(h * np.sum(proj * v)))
        rel.append(float(h * np.sum(y)))
    return LpReport(M, ks, tuple(y_norms), tuple(expected), tuple(mus), tuple(closed), tuple(pairs),
                    {k: tuple(v) for k, v in test_pairs.items()}, tuple(rel))
