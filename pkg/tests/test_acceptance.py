"""Acceptance suite: one test and one summary line per criterion.

The trend thresholds below belong to this suite, not to the library.
"""
import math
import os
import subprocess
import sys
import time
from collections import Counter
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.optimize import nnls

from oracles import check_extremal_witness, check_fuzzy_witness, rational_points_in
from relcoder.calculus import verify_chain_rule, verify_sum_rule
from relcoder.coderivative import limiting_coderivative
from relcoder.cones import PolyCone, polar
from relcoder.corpus import WEDGE, RPLUS, hand_built
from relcoder.geometry import eps_normal_test, stratify
from relcoder.multifunction import PolyMultimap
from relcoder.oracle import (
    SampleConfig,
    chain_instances,
    corpus,
    ell2_psnc_demo,
    extremal_pairs,
    extremal_witness_search,
    fuzzy_witness_search,
    intersection_instances,
    is_linear,
    lp43_projectional_demo,
    regularity_equivalence,
    sample_coderivative,
    sample_lip,
    sum_instances,
)
from relcoder.polyhedra import Polyhedron
from relcoder.wellposedness import certify_lipschitz_like, linear_operator_certificate, theta_in_image

STABLE_TOL = 0.02
GROWTH = 2.0
ANGLE_TOL = 1e-4
CORPUS = corpus(100, 0)


def _trend(t):
    if len(t) >= 2 and math.isinf(t[-1]):
        return "diverging"
    if len(t) >= 2 and math.isfinite(t[-1]) and abs(t[-1] - t[-2]) <= STABLE_TOL * max(t[-2], 1e-12):
        return "stable"
    if len(t) >= 3 and 0 < t[-3] <= t[-2] <= t[-1] and t[-1] >= GROWTH * t[-3]:
        return "diverging"
    return "inconclusive"


def test_criterion_01_certificate_matches_sampled_modulus(criterion):
    t0 = time.perf_counter()
    counts, bad = Counter(), []
    worst = 0.0
    for inst in CORPUS:
        cert = certify_lipschitz_like(inst.S, inst.Omega, inst.base)
        est = sample_lip(inst.S, inst.Omega, inst.base, SampleConfig())
        kind = _trend(est.trend)
        counts[(cert.verdict, kind)] += 1
        if cert.verdict == "holds" and kind == "stable":
            gap = abs(est.value - cert.bound.value)
            worst = max(worst, gap / max(cert.bound.value, 1e-3))
            ok = gap <= max(0.05 * cert.bound.value, 1e-3) and est.value <= cert.bound.upperBound * 1.05
        else:
            ok = cert.verdict == "fails" and kind == "diverging"
        if not ok:
            bad.append((inst.name, cert.verdict, cert.bound.value, est.trend))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed <= 600
    criterion(1, ok, f"{len(CORPUS)} instances {dict(counts)}, mismatches {len(bad)}, "
                     f"worst relative gap {worst:.2e}, {elapsed:.0f}s (limit 600s)")
    assert not bad, bad
    assert elapsed <= 600


def test_criterion_02_bound_brackets_contain_known_values(criterion):
    cases = [("identity-3", PolyMultimap.identity(3), None, 1.0)]
    for A in ([[2, 1], [0, 1]], [[3, 0], [0, Fraction(1, 2)]], [[1, 2], [3, 4], [0, 1]], [[1, -1, 2], [0, 1, 1]]):
        ref = float(np.linalg.norm(np.array(A, float), 2))
        cases.append((f"linear {A}", PolyMultimap.linear(A), None, ref))
    cases.append(("wedge on R+", WEDGE, RPLUS, 1.0))
    fails = []
    widest = 0.0
    for name, S, Om, known in cases:
        b = certify_lipschitz_like(S, Om, ((0,) * S.n, (0,) * S.m)).bound
        width = b.upperBound - b.lowerBound
        widest = max(widest, width / (1 + known))
        slack = 1e-12 * (1 + known)
        if not (b.lowerBound - slack <= known <= b.upperBound + slack and width <= 1e-6 * (1 + b.value)):
            fails.append((name, b.lowerBound, b.upperBound, known))
    criterion(2, not fails, f"{len(cases)} hand-built maps, widest bracket {widest:.1e}*(1+value), misses {fails}")
    assert not fails


def test_criterion_03_boundary_point_separation(criterion):
    good = certify_lipschitz_like(WEDGE, RPLUS, ((0,), (0,)))
    bad = certify_lipschitz_like(WEDGE, None, ((0,), (0,)))
    w = bad.witnesses[0] if bad.witnesses else None
    ok = good.verdict == "holds" and bad.verdict == "fails" and w is not None and w[1] == 0 and w[0] != 0
    criterion(3, ok, f"Omega=R+: {good.verdict} (bound {good.bound.value:g}); Omega=R: {bad.verdict}, witness {w}")
    assert ok


def test_criterion_04_regularity_routes_agree(criterion):
    tested, bad = 0, []
    verdicts = Counter()
    for inst in CORPUS:
        if not theta_in_image(inst.S, inst.Theta, inst.base[1]):
            continue
        tested += 1
        r = regularity_equivalence(inst.S, inst.Theta, inst.base)
        verdicts[r.inverseLipschitz] += 1
        if not r.agree:
            bad.append((inst.name, r))
    ok = tested > 0 and not bad
    criterion(4, ok, f"{tested} instances with Theta in the image {dict(verdicts)}, disagreements {len(bad)}")
    assert ok, bad


def _random_rank_matrix(rng):
    m, n = (int(v) for v in rng.integers(1, 5, 2))
    r = int(rng.integers(1, min(m, n) + 1))
    B = rng.integers(-3, 4, (m, r))
    C = rng.integers(-3, 4, (r, n))
    den = int(rng.integers(1, 4))
    return [[Fraction(int(v), den) for v in row] for row in B @ C]


def test_criterion_05_linear_operator_bound(criterion):
    rng = np.random.default_rng(37)
    worst, bad, ranks = 0.0, [], Counter()
    done = 0
    while done < 20:
        A = _random_rank_matrix(rng)
        s = np.linalg.svd(np.array(A, float), compute_uv=False)
        pos = s[s > 1e-9 * s.max()] if s.max() > 0 else s[:0]
        if not len(pos):
            continue
        done += 1
        ranks[(len(A), len(A[0]), len(pos))] += 1
        c = linear_operator_certificate(A)
        ref = 1 / pos.min()
        rel = abs(c.bound.value - ref) / ref
        worst = max(worst, rel)
        if c.verdict != "holds" or rel > 0.05 or abs(c.details["reciprocalSigmaMin"] - ref) > 1e-9 * ref:
            bad.append((A, c.verdict, c.bound.value, ref))
    criterion(5, not bad, f"20 matrices (shape, rank) {sorted(ranks)}, worst relative gap {worst:.1e}")
    assert not bad


def _rule_stats(kind, instances):
    verified = violations = linear = unequal = 0
    for inst in instances:
        if kind == "chain":
            r = verify_chain_rule(inst.S1, inst.S2, inst.Omega, inst.x, inst.z, inst.y)
        else:
            r = verify_sum_rule(inst.S1, inst.S2, inst.Omega, inst.x, inst.y, inst.y1, inst.y2)
        if not r.hypothesesVerified:
            continue
        verified += 1
        violations += not r.inclusionHolds
        if is_linear(inst.S1) and is_linear(inst.S2):
            linear += 1
            unequal += not r.reverseHolds
    return verified, violations, linear, unequal


def test_criterion_06_calculus_rules_sound(criterion):
    chain = _rule_stats("chain", chain_instances(200, 0))
    total = _rule_stats("sum", sum_instances(200, 0))
    ok = chain[0] >= 100 and total[0] >= 100 and chain[1] == chain[3] == total[1] == total[3] == 0
    criterion(6, ok, f"chain: {chain[0]} verified, {chain[1]} violations, {chain[2]} linear with {chain[3]} unequal; "
                     f"sum: {total[0]} verified, {total[1]} violations, {total[2]} linear with {total[3]} unequal")
    assert ok


def _cone_gap(gens, lin, v):
    cols = list(gens) + list(lin) + [-l for l in lin]
    if not cols:
        return float(np.linalg.norm(v))
    return float(nnls(np.array(cols, float).T, v)[1])


def _slack_member(cones, v, slack=1e-6):
    """Exact membership of a rationalised ray, every row relaxed by slack * |row|."""
    q = [Fraction(float(t)).limit_denominator(10**6) for t in v]
    for c in cones:
        if all(sum(a * t for a, t in zip(row, q)) <= Fraction(slack) * Fraction(float(np.linalg.norm(row)))
               for row in c.ineqs) and \
           all(abs(sum(a * t for a, t in zip(row, q))) <= Fraction(slack) * Fraction(float(np.linalg.norm(row)))
               for row in c.eqs):
            return True
    return False


def _unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


def test_criterion_07_sampled_and_symbolic_coderivatives_match(criterion):
    bad, rays, worst = [], 0, 0.0
    for inst in CORPUS:
        D = limiting_coderivative(inst.S, inst.Omega, inst.Theta, inst.base)
        sc = sample_coderivative(inst.S, inst.Omega, inst.Theta, inst.base)
        sym = [([_unit(g) for g in c.gens], [_unit(l) for l in c.lin]) for c in D.cones]
        rays += len(sc.rays)
        for r in sc.rays:
            gap = min(_cone_gap(G, L, r) for G, L in sym)
            worst = max(worst, gap)
            if gap > ANGLE_TOL or not _slack_member(D.cones, r):
                bad.append((inst.name, "sampled ray outside", tuple(r)))
        for G, L in sym:
            for g in G:
                if not sc.approaches(g, ANGLE_TOL):
                    bad.append((inst.name, "extreme ray not approached", tuple(g)))
            for l in L:
                gap = min((_cone_gap(R, LL, l) for R, LL in sc.cones), default=1.0)
                worst = max(worst, gap)
                if gap > ANGLE_TOL:
                    bad.append((inst.name, "lineality not approached", tuple(l)))
    criterion(7, not bad, f"{len(CORPUS)} instances, {rays} sampled rays, worst gap {worst:.1e} "
                          f"(tolerance {ANGLE_TOL:g}), failures {len(bad)}")
    assert not bad, bad[:5]


def _random_union(rng, d):
    pieces = []
    for _ in range(int(rng.integers(1, 4))):
        rows = rng.integers(-2, 3, (int(rng.integers(1, 4)), d)).tolist()
        pieces.append(Polyhedron.make(d, [(r, int(rng.integers(0, 3))) for r in rows if any(r)] or [([1] + [0] * (d - 1), 5)]))
    return pieces


def test_criterion_08_cone_geometry_properties(criterion):
    rng = np.random.default_rng(8)
    involution_bad = 0
    for _ in range(1000):
        n = int(rng.integers(1, 5))
        A = rng.integers(-3, 4, (int(rng.integers(0, 7)), n)).tolist()
        E = rng.integers(-3, 4, (int(rng.integers(0, 2)), n)).tolist()
        C = PolyCone.from_hrep(n, A, E)
        involution_bad += polar(polar(C)) != C or PolyCone.from_vrep(n, C.gens, C.lin) != C
    unions = [_random_union(rng, 2) for _ in range(4)] + [_random_union(rng, 3) for _ in range(2)]
    unions.append(list(WEDGE.pieces))
    partition_bad = normal_bad = points = 0
    for pieces in unions:
        pieces = [P for P in pieces if not P.is_empty]
        strata = stratify(pieces)
        d = pieces[0].dim
        pts = []
        for P in pieces:
            pts += rational_points_in(P, rng, 600 // len(pieces))
        while len(pts) < 1000:
            pts.append(tuple(Fraction(int(v), 3) for v in rng.integers(-12, 13, d)))
        points += len(pts)
        for x in pts:
            hits = [s for s in strata if s.contains(x)]
            partition_bad += len(hits) != (1 if any(P.contains(x) for P in pieces) else 0)
        for s in strata:
            for _ in range(6):
                v = [int(t) for t in rng.integers(-3, 4, d)]
                normal_bad += eps_normal_test(pieces, s.point, v, 0) != s.regularNormal.contains(v)
                normal_bad += s.regularNormal != polar(s.tangent)
    ok = involution_bad == partition_bad == normal_bad == 0
    criterion(8, ok, f"polar involution failures {involution_bad}/1000; partition failures {partition_bad}/{points} "
                     f"points over {len(unions)} unions; regular-normal mismatches {normal_bad}")
    assert ok


def test_criterion_09_witness_searches(criterion):
    half_lo = Polyhedron.make(2, [([0, 1], 0)])
    half_up = Polyhedron.make(2, [([0, -1], 0)])
    right = Polyhedron.make(2, [([-1, 0], 0)])
    found = 0
    files = {f.name: f for f in hand_built()}
    ext = [([half_lo], [half_up], None, ((0,), (0,)))]
    e = files["extremal-halfplanes"]
    ext.append((list(e["L1"]), list(e["L2"]), e["Omega"], (e["base"]["x"], e["base"]["y"])))
    ext += [(list(i.L1), list(i.L2), i.Omega, i.base) for i in extremal_pairs(12, seed=0)]
    fz = [([half_up], [half_up], None, ((0,), (0,)), ((0,), (-1,))),
          ([half_up], [right], None, ((0,), (0,)), ((-1,), (-1,)))]
    f = files["fuzzy-transversal"]
    fz.append((list(f["L1"]), list(f["L2"]), f["Omega"], (f["base"]["x"], f["base"]["y"]), f["dual"]))
    fz += [(list(i.Theta1), list(i.Theta2), i.Omega, i.base, i.dual) for i in intersection_instances(12, seed=0)]
    for eps in (Fraction(1, 10), Fraction(1, 100)):
        for L1, L2, Om, base in ext:
            res = extremal_witness_search(L1, L2, Om, base, eps)
            check_extremal_witness(res, L1, L2, Om, len(base[0]), eps)
            found += 1
        for T1, T2, Om, base, dual in fz:
            res = fuzzy_witness_search(T1, T2, Om, base, eps, eps, dual)
            w = np.array([float(t) for t in tuple(dual[0]) + tuple(dual[1])])
            check_fuzzy_witness(res, w, T1, T2, float(eps), float(eps))
            found += 1
    total = 2 * (len(ext) + len(fz))
    criterion(9, found == total, f"{found}/{total} searches returned validated witnesses at eps, gamma in {{0.1, 0.01}}")
    assert found == total


def test_criterion_10_demos(criterion):
    r = ell2_psnc_demo(1000, 100)
    part_a = r.maxDualNorm["0.0"] == 0.0 and r.admissible["0.0"] > 0
    part_b = all(v == 1.0 for v in r.unitNorms) and all(
        abs(p - 1 / (k + 1)) <= 1e-15 for k, p in enumerate(r.pairings["harmonic"]))
    p = lp43_projectional_demo(2**10, 2**5)
    exact = all(abs(a - k ** (-2 / 3)) <= 1e-14 * k ** (-2 / 3) for a, k in zip(p.yNorms, p.ks))
    tail = p.pairingWithE[1:]
    monotone = p.ks[1:] == (2, 4, 8, 16, 32) and all(a < b for a, b in zip(tail, tail[1:]))
    ok = part_a and part_b and exact and monotone
    criterion(10, ok, f"ell2 part a {part_a}, part b {part_b}; lp43 |y*_k| = k^(-2/3) {exact}, "
                      f"pairings {', '.join(f'{v:.4f}' for v in tail)} increasing {monotone}")
    assert ok


_REPORT_SCRIPT = r"""
import sys
from pathlib import Path
from relcoder.cli import run
from relcoder.corpus import write_corpus
out = Path(sys.argv[1])
d = out / "corpus"
write_corpus(d, count=8)
jobs = [("coderivative", "wedge-omega-rplus"), ("certify", "wedge-omega-full"), ("certify", "diag-1-0"),
        ("estimate", "linear-2x2"), ("verify --rule chain-m", "chain-monotone-halfplanes"),
        ("verify --rule sum-n", "sum-halfplanes"), ("verify --rule equiv", "diag-relative-to-range"),
        ("verify --rule estimate-check", "wedge-omega-full"), ("demo --which extremal", "extremal-halfplanes"),
        ("demo --which fuzzy", "fuzzy-transversal")]
jobs += [("certify", f"random-{i:03d}") for i in range(8)] + [("estimate", f"random-{i:03d}") for i in range(8)]
for k, (cmd, name) in enumerate(jobs):
    run(cmd.split() + ["--instance", str(d / f"{name}.json"), "--seed", "5", "--out", str(out / f"{k:02d}.json")])
for which in ("ell2", "lp43"):
    run(["demo", "--which", which, "--out", str(out / f"demo-{which}.json")])
"""


def test_criterion_11_reports_are_byte_identical(criterion, tmp_path):
    src = str(Path(__file__).resolve().parent.parent / "src")
    runs = []
    for hashseed in ("1", "2"):
        out = tmp_path / f"run{hashseed}"
        env = dict(os.environ, PYTHONHASHSEED=hashseed, PYTHONPATH=src + os.pathsep + os.environ.get("PYTHONPATH", ""))
        subprocess.run([sys.executable, "-c", _REPORT_SCRIPT, str(out)], check=True, env=env)
        runs.append({p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*.json"))})
    a, b = runs
    differ = [str(k) for k in a if a[k] != b.get(k)]
    ok = len(a) > 20 and a.keys() == b.keys() and not differ
    criterion(11, ok, f"{len(a)} canonical files from two runs (different hash seeds), differing {differ}")
    assert ok
