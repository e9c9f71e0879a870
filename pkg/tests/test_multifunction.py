from fractions import Fraction

import numpy as np
import pytest

from relcoder.errors import DimensionMismatch, EmptyGraph, EmptyRestriction, EmptyValue
from relcoder.multifunction import (
    PolyMultimap,
    compose,
    dist_to_value,
    invert,
    msum,
    restrict,
    value_at,
)
from relcoder.polyhedra import Polyhedron

F = Fraction
UP = PolyMultimap.make(1, 1, [Polyhedron.make(2, [([1, -1], 0)])])  # y >= x
UP_NEG = PolyMultimap.make(1, 1, [Polyhedron.make(2, [([-1, -1], 0)])])  # y >= -x


def grid(lo, hi, k):
    return [F(lo) + F(hi - lo) * i / k for i in range(k + 1)]


def test_restrict_examples():
    I = PolyMultimap.identity(1)
    assert restrict(I).same_pieces(I)
    R = restrict(I, Polyhedron.make(1, [([-1], 0)]))
    assert R.graph_contains([2], [2]) and not R.graph_contains([-1], [-1])
    with pytest.raises(EmptyRestriction):
        restrict(I, Polyhedron.make(1, [([-1], -1)]), Polyhedron.make(1, [([1], -1)]))


def test_restrict_two_pieces_matches_membership():
    S = PolyMultimap.make(1, 1, [Polyhedron.make(2, [([-1, 0], 0)], [([1, -1], 0)]),
                                 Polyhedron.make(2, [([1, 0], 0)], [([0, 1], 0)])])
    Om = Polyhedron.make(1, [([-1], -1)])  # x >= 1 removes the left branch
    R = restrict(S, Om)
    assert len(R.pieces) == 1
    for x in grid(-3, 3, 12):
        for y in grid(-3, 3, 12):
            assert R.graph_contains([x], [y]) == (S.graph_contains([x], [y]) and x >= 1)
    assert restrict(R, Om).same_pieces(R)


def test_all_empty_pieces_rejected():
    with pytest.raises(EmptyGraph):
        PolyMultimap.make(1, 1, [Polyhedron.make(2, [([0, 0], -1)])])
    with pytest.raises(DimensionMismatch):
        PolyMultimap.make(1, 1, [Polyhedron.full(3)])


def test_invert_round_trip():
    I = PolyMultimap.identity(2)
    assert invert(I).same_pieces(I)
    A = PolyMultimap.linear([[1, 2]])
    inv = invert(A)
    assert (inv.n, inv.m) == (1, 2)
    assert inv.graph_contains([5], [1, 2]) and not inv.graph_contains([5], [1, 1])
    rng = np.random.default_rng(4)
    for _ in range(10):
        pieces = [Polyhedron.make(3, [(r, int(b)) for r, b in zip(rng.integers(-2, 3, (3, 3)).tolist(), rng.integers(0, 3, 3))])
                  for _ in range(2)]
        S = PolyMultimap.make(1, 2, pieces)
        assert invert(invert(S)).same_pieces(S)


def test_compose_examples():
    Z = compose(UP, UP)  # z >= y >= x
    for x in grid(-2, 2, 8):
        for z in grid(-2, 2, 8):
            assert Z.graph_contains([x], [z]) == (z >= x)
    A = PolyMultimap.linear([[1, 2], [0, 1]])
    B = PolyMultimap.linear([[3, -1]])
    BA = compose(A, B)
    ref = PolyMultimap.linear([[3, 5]])
    for x in [[1, 1], [F(1, 2), -2], [0, 3]]:
        y = [3 * F(x[0]) + 5 * F(x[1])]
        assert BA.graph_contains(x, y) and ref.graph_contains(x, y)
        assert not BA.graph_contains(x, [y[0] + 1])
    S2 = PolyMultimap.make(2, 1, [Polyhedron.make(3, [([1, 1, -1], 0)])])
    I = PolyMultimap.identity(2)
    C = compose(I, S2)
    for x in [[0, 0], [1, -2]]:
        for z in grid(-3, 3, 6):
            assert C.graph_contains(x, [z]) == S2.graph_contains(x, [z])
    with pytest.raises(DimensionMismatch):
        compose(UP, I)


def _has_intermediate(S1, S2, x, z):
    # exact check: is there y with (x,y) in S1 and (y,z) in S2?  Build the y-slice directly.
    for P in S1.pieces:
        for Q in S2.pieces:
            a = P.slice({0: x[0]})
            b = Q.slice({1: z[0]})
            if not a.intersect(b).is_empty:
                return True
    return False


def test_compose_two_sided_sampling():
    S1 = PolyMultimap.make(1, 1, [Polyhedron.make(2, [([1, -1], 0), ([-1, 1], 2)]),
                                  Polyhedron.make(2, [([-1, 0], 0)], [([0, 1], 0)])])
    S2 = PolyMultimap.make(1, 1, [Polyhedron.make(2, [([2, -1], 1), ([0, 1], 3)])])
    C = compose(S1, S2)
    for x in grid(-3, 3, 9):
        for z in grid(-4, 4, 9):
            assert C.graph_contains([x], [z]) == _has_intermediate(S1, S2, [x], [z])


def test_msum_examples():
    S = msum(UP, UP_NEG)
    for x in grid(-2, 2, 8):
        for y in grid(-2, 2, 8):
            assert S.graph_contains([x], [y]) == (y >= 0)
    zero = PolyMultimap.linear([[0]])
    T = msum(UP, zero)
    for x in grid(-2, 2, 5):
        for y in grid(-2, 2, 5):
            assert T.graph_contains([x], [y]) == UP.graph_contains([x], [y])
    A = PolyMultimap.linear([[1, 2]])
    B = PolyMultimap.linear([[-3, 1]])
    AB = msum(A, B)
    assert AB.graph_contains([1, 1], [1]) and not AB.graph_contains([1, 1], [0])
    with pytest.raises(DimensionMismatch):
        msum(UP, A)


def test_msum_two_sided_sampling():
    S1 = PolyMultimap.make(1, 1, [Polyhedron.make(2, [([0, 1], 1), ([0, -1], 1)])])  # |y| <= 1
    S2 = PolyMultimap.make(1, 1, [Polyhedron.make(2, [], [([1, -1], 0)]), Polyhedron.make(2, [], [([1, 1], 0)])])  # y = +-x
    S = msum(S1, S2)
    for x in grid(-2, 2, 8):
        for y in grid(-4, 4, 16):
            ref = abs(y - x) <= 1 or abs(y + x) <= 1
            assert S.graph_contains([x], [y]) == ref


def test_value_at():
    I = PolyMultimap.identity(2)
    (v,) = value_at(I, [1, F(1, 3)])
    assert v.contains([1, F(1, 3)]) and not v.contains([1, 0])
    (w,) = value_at(UP, [2])
    assert w.contains([2]) and w.contains([7]) and not w.contains([F(19, 10)])
    half = PolyMultimap.make(1, 1, [Polyhedron.make(2, [([-1, 0], 0)])])
    assert value_at(half, [-1]) == []


def test_dist_to_value_examples():
    assert dist_to_value(UP, [2], [3]) == 0.0
    assert dist_to_value(UP, [2], [0]) == pytest.approx(2.0, abs=1e-12)
    half = PolyMultimap.make(1, 1, [Polyhedron.make(2, [([-1, 0], 0)])])
    with pytest.raises(EmptyValue):
        dist_to_value(half, [-1], [0])
    with pytest.raises(EmptyValue):
        dist_to_value(half, [-1.0], [0.0])


def test_dist_to_value_against_grid():
    rng = np.random.default_rng(7)
    for _ in range(6):
        rows = [(list(r), 2) for r in rng.integers(-2, 3, (5, 3)).tolist()]
        rows += [([0, 1, 0], 2), ([0, -1, 0], 2), ([0, 0, 1], 2), ([0, 0, -1], 2)]
        P = Polyhedron.make(3, rows, [])
        if P.slice({0: 0}).is_empty:
            continue
        S = PolyMultimap.make(1, 2, [P])
        yq = rng.uniform(-3, 3, 2)
        A, b, _, _ = P.arrays()
        g = np.linspace(-2, 2, 1601)
        Y1, Y2 = np.meshgrid(g, g)
        pts = np.stack([Y1.ravel(), Y2.ravel()], 1)
        inside = (pts @ A[:, 1:].T <= b + 1e-12).all(axis=1)
        ref = np.min(np.linalg.norm(pts[inside] - yq, axis=1))
        d = dist_to_value(S, [0.0], list(yq))
        assert d <= ref + 1e-9
        assert ref - d < 4e-3  # grid spacing 2.5e-3
