from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relcoder.cones import PolyCone, polar
from relcoder.errors import DimensionMismatch, PointNotInSet, PreconditionViolated
from relcoder.geometry import (
    eps_normal_test,
    limiting_normal_cone,
    stratify,
    tangent_cone,
    tangent_stability_check,
)
from relcoder.polyhedra import Polyhedron

from oracles import feasible_direction, rational_points_in

F = Fraction
ORTHANT = Polyhedron.make(2, [([-1, 0], 0), ([0, -1], 0)])
HALFLINE = Polyhedron.make(1, [([-1], 0)])


def test_tangent_cone_examples():
    assert tangent_cone(ORTHANT, (0, 0)) == PolyCone.from_hrep(2, [[-1, 0], [0, -1]])
    assert tangent_cone(ORTHANT, (1, 0)) == PolyCone.from_hrep(2, [[0, -1]])
    assert tangent_cone(ORTHANT, (1, 1)) == PolyCone.full(2)
    with pytest.raises(PointNotInSet):
        tangent_cone(ORTHANT, (-1, 0))


def test_tangent_cone_matches_feasible_directions():
    rng = np.random.default_rng(1)
    for _ in range(20):
        A = rng.integers(-2, 3, (4, 2)).tolist()
        P = Polyhedron.make(2, [(a, 0) for a in A] + [([1, 0], 5)])
        T = tangent_cone(P, (0, 0))
        for _ in range(20):
            d = [int(v) for v in rng.integers(-3, 4, 2)]
            assert T.contains(d) == feasible_direction(P, (0, 0), d)


def test_tangent_cone_monotone_under_dropping_rows():
    rng = np.random.default_rng(2)
    for _ in range(30):
        rows = [(r, 0) for r in rng.integers(-2, 3, (4, 3)).tolist()]
        P = Polyhedron.make(3, rows)
        Q = Polyhedron.make(3, rows[1:])
        assert tangent_cone(Q, (0, 0, 0)).contains_cone(tangent_cone(P, (0, 0, 0)))


def test_eps_normal_examples():
    assert eps_normal_test(HALFLINE, (0,), (-5,), 0)
    eps = F(1, 3)
    assert eps_normal_test(HALFLINE, (0,), (eps,), eps)
    assert not eps_normal_test(HALFLINE, (0,), (eps + F(1, 10),), eps)
    assert not eps_normal_test(ORTHANT, (1, 1), (F(1, 2), 0), F(1, 4))
    with pytest.raises(PointNotInSet):
        eps_normal_test(HALFLINE, (-1,), (0,), 0)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.lists(st.integers(-2, 2), min_size=2, max_size=2), min_size=1, max_size=4),
       st.lists(st.integers(-3, 3), min_size=2, max_size=2))
def test_eps_zero_is_polar_membership(rows, v):
    P = Polyhedron.make(2, [(r, 0) for r in rows])
    assert eps_normal_test(P, (0, 0), v, 0) == polar(tangent_cone(P, (0, 0))).contains(v)


def test_eps_normal_on_union_takes_worst_piece():
    U = [Polyhedron.make(2, [([-1, 0], 0)], [([0, 1], 0)]), Polyhedron.make(2, [([0, -1], 0)], [([1, 0], 0)])]
    assert eps_normal_test(U, (0, 0), (-1, -1), 0)
    assert not eps_normal_test(U, (0, 0), (1, -1), F(1, 2))
    assert eps_normal_test(U, (0, 0), (1, -1), 1)


def test_stratify_examples():
    half = Polyhedron.make(2, [([1, 0], 0)])
    assert len(stratify([half])) == 2
    point = Polyhedron.point((1, 2))
    assert len(stratify([point])) == 1


def _dims(strata):
    return sorted(s.dimension for s in strata)


def test_stratify_two_branches():
    # {y = x} together with {y = 0, x >= 0}
    full_line = [Polyhedron.make(2, [], [([1, -1], 0)]), Polyhedron.make(2, [([-1, 0], 0)], [([0, 1], 0)])]
    assert _dims(stratify(full_line)) == [0, 1, 1, 1]
    # both branches restricted to x >= 0
    two_rays = [Polyhedron.make(2, [([-1, 0], 0)], [([1, -1], 0)]), Polyhedron.make(2, [([-1, 0], 0)], [([0, 1], 0)])]
    assert _dims(stratify(two_rays)) == [0, 1, 1]


def test_stratify_rejects_mixed_dimensions():
    with pytest.raises(DimensionMismatch):
        stratify([Polyhedron.full(1), Polyhedron.full(2)])


def test_strata_carry_polar_pairs():
    U = [Polyhedron.make(2, [([-1, 0], 0)], [([1, -1], 0)]), Polyhedron.make(2, [([1, 0], 0)], [([1, 1], 0)])]
    for s in stratify(U):
        assert s.regularNormal == polar(s.tangent)


@pytest.mark.parametrize("seed", range(3))
def test_stratification_is_a_partition(seed):
    rng = np.random.default_rng(seed)
    pieces = []
    for _ in range(int(rng.integers(1, 4))):
        rows = rng.integers(-2, 3, (3, 2)).tolist()
        pieces.append(Polyhedron.make(2, [(r, int(rng.integers(0, 3))) for r in rows]))
    strata = stratify(pieces)
    pts = []
    for P in pieces:
        pts += rational_points_in(P, rng, 15)
    pts += [tuple(F(int(v), 3) for v in rng.integers(-9, 10, 2)) for _ in range(40)]
    for x in pts:
        hits = [s for s in strata if s.contains(x)]
        in_union = any(P.contains(x) for P in pieces)
        assert len(hits) == (1 if in_union else 0)
        for s in hits:
            assert s.cell.contains(x)


def test_limiting_normal_cone_convex_is_single_cone():
    cones = limiting_normal_cone(ORTHANT, (0, 0))
    assert cones == [polar(tangent_cone(ORTHANT, (0, 0)))]
    P = Polyhedron.make(3, [([1, 1, 0], 1), ([-1, 0, 0], 0), ([0, 0, 1], 2)])
    assert limiting_normal_cone(P, (0, 1, 2)) == [polar(tangent_cone(P, (0, 1, 2)))]


def test_limiting_normal_cone_absolute_value_graph():
    U = [Polyhedron.make(2, [([-1, 0], 0)], [([1, -1], 0)]), Polyhedron.make(2, [([1, 0], 0)], [([1, 1], 0)])]
    cones = limiting_normal_cone(U, (0, 0))
    apex = PolyCone.from_vrep(2, [(1, -1), (-1, -1)])
    right = PolyCone.from_vrep(2, [], [(1, -1)])
    left = PolyCone.from_vrep(2, [], [(1, 1)])
    assert set(cones) == {apex, right, left}


def test_limiting_normal_cone_on_facet():
    P = Polyhedron.make(2, [([0, -1], 0), ([1, 0], 3)])
    assert limiting_normal_cone([P], (1, 0)) == [PolyCone.from_vrep(2, [(0, -1)])]


def test_tangent_stability_examples():
    assert tangent_stability_check(ORTHANT, (0, 0), (1, 1), 0, F(1, 10))
    assert tangent_stability_check(ORTHANT, (1, 0), (0, 1), 0, F(1, 2))
    with pytest.raises(PreconditionViolated):
        tangent_stability_check(ORTHANT, (0, 0), (-1, 0), 0, 1)


def test_tangent_stability_fails_when_new_faces_appear():
    # strip 0 <= y <= 1: from the bottom edge, direction (0,1) is blocked at the top edge
    strip = Polyhedron.make(2, [([0, -1], 0), ([0, 1], 1)])
    assert tangent_stability_check(strip, (0, 0), (0, 1), 0, F(1, 2))
    assert not tangent_stability_check(strip, (0, 0), (0, 1), F(1, 2), 2)
    assert tangent_stability_check(strip, (0, 0), (0, 1), 1, 2)
