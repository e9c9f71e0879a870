"""Floating-point Euclidean projection onto small polyhedra.

For a fixed constraint matrix the projection of many points (with varying
right-hand sides) is computed by vectorised enumeration of KKT active sets.
Large row counts fall back to least-distance programming through a bounded
least-squares (BVLS) solve.
"""
from __future__ import annotations

from itertools import combinations

import numpy as np
from scipy.optimize import lsq_linear

from .rational import rank

MAX_ENUM_ROWS = 12


def _independent_rows(E: np.ndarray) -> list[int]:
    rows = [tuple(int(round(x)) if float(x).is_integer() else x for x in r) for r in E]
    keep: list[int] = []
    for i, r in enumerate(rows):
        if rank([rows[j] for j in keep] + [r], E.shape[1]) > len(keep):
            keep.append(i)
    return keep


class KKTProjector:
    """Projection onto {y : A y <= c, E y = f}; A and E fixed, c and f per query."""

    def __init__(self, A: np.ndarray, E: np.ndarray):
        self.A = np.asarray(A, dtype=float).reshape(-1, A.shape[1] if A.ndim == 2 else E.shape[1])
        d = self.A.shape[1]
        self.E = np.asarray(E, dtype=float).reshape(-1, d)
        self.d = d
        self.eb = _independent_rows(self.E) if len(self.E) else []
        self.enumerate = len(self.A) <= MAX_ENUM_ROWS
        self.groups = []
        if not self.enumerate:
            return
        free = d - len(self.eb)
        Eb = self.E[self.eb]
        int_a = [tuple(r) for r in self.A]
        int_e = [tuple(r) for r in Eb]
        for k in range(0, min(free, len(self.A)) + 1):
            subsets, Ms, Ks = [], [], []
            for I in combinations(range(len(self.A)), k):
                rows = int_e + [int_a[i] for i in I]
                if rows and rank(rows, d) < len(rows):
                    continue
                M = np.vstack([Eb, self.A[list(I)]]) if rows else np.zeros((0, d))
                G = M @ M.T
                subsets.append(I)
                Ms.append(M)
                Ks.append(np.linalg.inv(G) if len(rows) else np.zeros((0, 0)))
            if subsets:
                self.groups.append((k, np.array(subsets, dtype=int).reshape(len(subsets), k), np.array(Ms), np.array(Ks)))

    def project(self, P: np.ndarray, c: np.ndarray, f: np.ndarray | None = None, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
        """Project rows of P; c has shape (Q, rows) or (rows,).  Returns (Y, feasible)."""
        P = np.atleast_2d(np.asarray(P, dtype=float))
        Q = P.shape[0]
        c = np.broadcast_to(np.asarray(c, dtype=float).reshape(-1, len(self.A)) if len(self.A) else np.zeros((1, 0)), (Q, len(self.A)))
        if f is None:
            f = np.zeros(len(self.E))
        f = np.broadcast_to(np.asarray(f, dtype=float).reshape(-1, len(self.E)) if len(self.E) else np.zeros((1, 0)), (Q, len(self.E)))
        nsub = sum(len(g[1]) for g in self.groups)
        chunk = max(1, 200000 // max(1, nsub))
        if self.enumerate and Q > chunk:
            parts = [self.project(P[i : i + chunk], c[i : i + chunk], f[i : i + chunk], tol) for i in range(0, Q, chunk)]
            return np.vstack([p[0] for p in parts]), np.concatenate([p[1] for p in parts])
        if not self.enumerate:
            out = np.empty_like(P)
            ok = np.zeros(Q, dtype=bool)
            for q in range(Q):
                y = _ldp_project(self.A, c[q], self.E, f[q], P[q])
                if y is not None:
                    out[q], ok[q] = y, True
                else:
                    out[q] = np.nan
            return out, ok
        best = np.full(Q, np.inf)
        Y = np.full_like(P, np.nan)
        scale_c = 1.0 + np.abs(c).max(axis=1, initial=0.0) + np.abs(P).max(axis=1)
        fb = f[:, self.eb]
        ne = len(self.eb)
        for k, subsets, Ms, Ks in self.groups:
            h = np.concatenate([np.broadcast_to(fb[:, None, :], (Q, len(subsets), ne)), c[:, subsets]], axis=2)
            r = np.einsum("skd,qd->qsk", Ms, P) - h
            lam = np.einsum("sij,qsj->qsi", Ks, r)
            Yc = P[:, None, :] - np.einsum("sjd,qsj->qsd", Ms, lam)
            t = tol * scale_c[:, None]
            ok = np.all(lam[:, :, ne:] >= -t[:, :, None], axis=2)
            if len(self.A):
                ok &= np.all(np.einsum("rd,qsd->qsr", self.A, Yc) <= c[:, None, :] + t[:, :, None], axis=2)
            if len(self.E):
                ok &= np.all(np.abs(np.einsum("rd,qsd->qsr", self.E, Yc) - f[:, None, :]) <= t[:, :, None], axis=2)
            dist = np.where(ok, np.linalg.norm(Yc - P[:, None, :], axis=2), np.inf)
            j = np.argmin(dist, axis=1)
            dj = dist[np.arange(Q), j]
            better = dj < best
            best[better] = dj[better]
            Y[better] = Yc[np.arange(Q), j][better]
        return Y, np.isfinite(best)

    def distance(self, P: np.ndarray, c: np.ndarray, f: np.ndarray | None = None) -> np.ndarray:
        Y, ok = self.project(P, c, f)
        d = np.linalg.norm(Y - np.atleast_2d(P), axis=1)
        d[~ok] = np.inf
        return d


def _ldp_project(A: np.ndarray, c: np.ndarray, E: np.ndarray, f: np.ndarray, p: np.ndarray) -> np.ndarray | None:
    """Least-distance projection via the Lawson-Hanson reduction to nonnegative least squares."""
    d = len(p)
    if len(E):
        y0, *_ = np.linalg.lstsq(E, f, rcond=None)
        if np.abs(E @ y0 - f).max() > 1e-9 * (1 + np.abs(f).max()):
            return None
        _, s, vt = np.linalg.svd(E)
        r = int((s > 1e-12 * max(1.0, s.max())).sum())
        N = vt[r:].T
    else:
        y0 = np.zeros(d)
        N = np.eye(d)
    if N.shape[1] == 0:
        return y0 if np.all(A @ y0 <= c + 1e-9) else None
    wp = N.T @ (p - y0)
    G = A @ N
    h = c - A @ y0
    if len(G) == 0:
        return y0 + N @ wp
    # min ||u|| s.t. G u <= h - G wp, written as (-G) u >= -(h - G wp)
    Gp = -G
    hp = -(h - G @ wp)
    Emat = np.vstack([Gp.T, hp[None, :]])
    fvec = np.zeros(Emat.shape[0])
    fvec[-1] = 1.0
    v = lsq_linear(Emat, fvec, bounds=(0, np.inf), method="bvls", tol=1e-14).x
    resid = Emat @ v - fvec
    if np.linalg.norm(resid) < 1e-12:
        return None
    u = -resid[:-1] / resid[-1]
    return y0 + N @ (wp + u)


class PolyProjector:
    """Projection onto a fixed polyhedron given as float arrays."""

    def __init__(self, A: np.ndarray, b: np.ndarray, E: np.ndarray, f: np.ndarray):
        self.kkt = KKTProjector(A, E)
        self.b = np.asarray(b, dtype=float)
        self.f = np.asarray(f, dtype=float)

    @classmethod
    def of(cls, P) -> "PolyProjector":
        return cls(*P.arrays())

    def project(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.kkt.project(X, self.b, self.f)
