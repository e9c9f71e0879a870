import math
from fractions import Fraction

import numpy as np
import pytest

from relcoder.coderivative import (
    CoderivativeObject,
    affine_coderivative_check,
    kernel,
    limiting_coderivative,
    mirror_coderivative,
    outer_norm,
    regular_coderivative,
    swap_negate,
    zero_image,
)
from relcoder.cones import PolyCone
from relcoder.errors import BaseNotInGraph
from relcoder.multifunction import PolyMultimap, invert
from relcoder.polyhedra import Polyhedron

F = Fraction
RPLUS = Polyhedron.make(1, [([-1], 0)])
O = ((0,), (0,))
WEDGE = PolyMultimap.make(1, 1, [Polyhedron.make(2, [([0, -1], 0), ([-1, 1], 0)])])  # 0 <= y <= x


def obj(cones, n=1, m=1):
    return CoderivativeObject(n, m, ((0,) * n, (0,) * m), "normal", tuple(cones))


def test_regular_identity_is_the_diagonal():
    D = regular_coderivative(PolyMultimap.identity(1), None, None, O)
    assert D.cones == (PolyCone.from_vrep(2, [], [(1, 1)]),)


def test_regular_singleton_omega_forces_zero_x():
    D = regular_coderivative(PolyMultimap.identity(1), Polyhedron.point((0,)), None, O)
    for c in D.cones:
        assert all(g[0] == 0 for g in c.all_rays())


def test_regular_halfplane_graph():
    S = PolyMultimap.make(1, 1, [Polyhedron.make(2, [([-1, -1], 0)])])  # y >= -x
    D = regular_coderivative(S, None, None, O)
    assert D.cones == (PolyCone.from_vrep(2, [(-1, 1)]),)


def test_base_not_in_graph():
    with pytest.raises(BaseNotInGraph):
        regular_coderivative(PolyMultimap.identity(1), None, None, ((0,), (1,)))
    with pytest.raises(BaseNotInGraph):
        limiting_coderivative(WEDGE, Polyhedron.make(1, [([-1], -1)]), None, O)


def test_limiting_wedge():
    D = limiting_coderivative(WEDGE, RPLUS, None, O)
    # upper edge y = x contributes {(t, t): t <= 0}; lower edge and apex give {(0, t): t >= 0}
    assert D.contains([-1], [-1]) and D.contains([0], [1]) and D.contains([0], [5])
    assert not D.contains([1], [1])
    assert zero_image(D).isTrivial
    for P in D.apply([0]):
        assert P.contains([0]) and not P.contains([F(1, 10)]) and not P.contains([F(-1, 10)])
    assert set(D.cones) == {PolyCone.from_vrep(2, [(-1, -1)]), PolyCone.from_vrep(2, [(0, 1)])}


def test_limiting_linear_map_is_transpose_graph():
    A = [[1, 2], [0, 3], [-1, 1]]
    S = PolyMultimap.linear(A)
    D = limiting_coderivative(S, None, None, ((1, F(1, 2)), (2, F(3, 2), F(-1, 2))))
    ys = (1, -2, F(1, 3))
    xs = tuple(sum(A[i][j] * F(ys[i]) for i in range(3)) for j in range(2))
    assert D.contains(xs, ys)
    assert not D.contains((xs[0] + 1, xs[1]), ys)
    assert len(D.cones) == 1 and len(D.cones[0].lin) == 3


def test_interior_point_object_is_zero():
    S = PolyMultimap.make(1, 1, [Polyhedron.make(2, [([1, 0], 1), ([-1, 0], 1), ([0, 1], 1), ([0, -1], 1)])])
    D = limiting_coderivative(S, None, None, O)
    assert D.cones == (PolyCone.zero(2),)
    assert D.apply([1]) == []


def test_mirror_matches_limiting_of_inverse():
    rng = np.random.default_rng(3)
    cases = [
        (PolyMultimap.identity(1), RPLUS, O),
        (WEDGE, RPLUS, O),
        (WEDGE, None, O),
    ]
    for _ in range(6):
        rows = [(r, 0) for r in rng.integers(-2, 3, (3, 3)).tolist()]
        S = PolyMultimap.make(1, 2, [Polyhedron.make(3, rows), Polyhedron.make(3, [], [([1, -1, 1], 0)])])
        cases.append((S, Polyhedron.make(2, [([int(rng.integers(-1, 2)), 1], 0)]), ((0,), (0, 0))))
    for S, Th, base in cases:
        M = mirror_coderivative(S, Th, base)
        L = limiting_coderivative(invert(S), Th, None, (base[1], base[0]))
        assert M.same_cones(swap_negate(L))


def test_mirror_identity_on_half_line():
    M = mirror_coderivative(PolyMultimap.identity(1), RPLUS, O)
    assert M.contains([1], [1]) and M.contains([-2], [-1])
    assert kernel(M).isTrivial
    full = mirror_coderivative(PolyMultimap.identity(1), None, O)
    assert full.same_cones(limiting_coderivative(PolyMultimap.identity(1), None, None, O))


def test_regular_inside_limiting_inside_unconstrained():
    rng = np.random.default_rng(9)
    for _ in range(8):
        rows = [(r, 0) for r in rng.integers(-2, 3, (3, 2)).tolist()]
        S = PolyMultimap.make(1, 1, [Polyhedron.make(2, rows), Polyhedron.make(2, [], [([1, 1], 0)])])
        Om = Polyhedron.make(1, [([int(rng.choice([-1, 1]))], 0)])
        R = regular_coderivative(S, Om, None, O)
        L = limiting_coderivative(S, Om, None, O)
        U = limiting_coderivative(S, Om, None, O, tangent_constraint=False)
        assert L.contains_object(R)
        assert U.contains_object(L)


def test_eps_regular_contains_exact_object():
    S = WEDGE
    R0 = regular_coderivative(S, RPLUS, None, O)
    Re = regular_coderivative(S, RPLUS, None, O, eps=F(1, 4))
    assert Re.approximate and not R0.approximate
    for c in R0.cones:
        for g in c.all_rays():
            assert Re.contains(g[:1], g[1:])
    # a small perturbation of a normal is admitted only with eps > 0
    assert not R0.contains([0], [F(-1, 10)]) and Re.contains([0], [F(-1, 10)])


def test_outer_norm_examples():
    r = outer_norm(obj([PolyCone.from_vrep(2, [], [(2, 1)])]))
    assert r.value == pytest.approx(2.0, abs=1e-9) and not r.exactInfinite
    assert r.lowerBound <= 2.0 <= r.upperBound and r.converged
    inf = outer_norm(obj([PolyCone.from_vrep(2, [(1, 0)])]))
    assert inf.exactInfinite and math.isinf(inf.value)
    zero = outer_norm(obj([PolyCone.zero(2)]))
    assert zero.value == 0.0


def test_outer_norm_against_sampling():
    rng = np.random.default_rng(2)
    for _ in range(15):
        n, m = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        gens = rng.integers(-3, 4, (int(rng.integers(1, 5)), n + m)).tolist()
        for g in gens:
            if not any(g[n:]):
                g[n] = 1
        C = PolyCone.from_vrep(n + m, gens)
        r = outer_norm(obj([C], n, m))
        if r.exactInfinite:
            continue
        G = C.gens_array()
        lam = rng.exponential(size=(20000, len(G))) * (rng.uniform(size=(20000, len(G))) < 0.6)
        Z = lam @ G
        ny = np.linalg.norm(Z[:, n:], axis=1)
        keep = ny > 1e-12
        ratio = np.linalg.norm(Z[keep, :n], axis=1) / ny[keep]
        assert ratio.max() <= r.upperBound + 1e-9
        assert ratio.max() >= r.value * 0.97 - 1e-9
        assert r.upperBound <= r.sandwichUpper + 1e-9


def test_zero_image_and_kernel():
    S = PolyMultimap.linear([[1, 2], [3, 4]])
    D = limiting_coderivative(S, None, None, ((0, 0), (0, 0)))
    assert zero_image(D).isTrivial and kernel(D).isTrivial
    ray = obj([PolyCone.from_vrep(2, [(1, 0)])])
    zi = zero_image(ray)
    assert not zi.isTrivial and zi.contains([3])
    assert zero_image(obj([])).isTrivial
    whole = obj([PolyCone.full(2)])
    assert kernel(whole).contains([-7]) and kernel(obj([PolyCone.zero(2)])).isTrivial


def test_affine_coderivative_check_examples():
    assert affine_coderivative_check([[1]], None, RPLUS, (0,), 0, 0)
    assert affine_coderivative_check([[2, -1]], None, Polyhedron.full(2), (1, 1), 0, 0)


def test_affine_coderivative_check_random():
    rng = np.random.default_rng(12)
    for trial in range(5):
        A = rng.integers(-2, 3, (2, 2)).tolist()
        rows = [(r, 1) for r in rng.integers(-2, 3, (4, 2)).tolist()]
        Om = Polyhedron.make(2, rows + [([1, 0], 0)])
        x0 = Om.witness
        ok = affine_coderivative_check(A, [1, 0], Om, x0, F(1, 5), F(1, 10), samples=200, seed=trial)
        assert ok
