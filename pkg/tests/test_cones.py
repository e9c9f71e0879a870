from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relcoder.cones import PolyCone, dd_convert, distance_sq_to_cone, polar, projection_onto_cone, prune_contained
from relcoder.errors import DimensionMismatch
from relcoder.lp import solve_lp
from relcoder.polyhedra import Polyhedron, project
from relcoder.qp import KKTProjector, _ldp_project

from oracles import brute_force_rays, lp_status, slsqp_project, sup_on_unit_ball_of_cone


# --- exact LP -------------------------------------------------------------

def test_lp_matches_highs_on_random_instances():
    rng = np.random.default_rng(11)
    for _ in range(150):
        n = int(rng.integers(1, 5))
        A = rng.integers(-3, 4, (int(rng.integers(1, 8)), n))
        b = rng.integers(-2, 6, len(A))
        c = rng.integers(-3, 4, n)
        ours = solve_lp(c.tolist(), A.tolist(), b.tolist())
        status, val = lp_status(c, A, b)
        assert ours.status == status
        if status == "optimal":
            assert abs(float(ours.value) - val) < 1e-7


def test_lp_returns_exact_vertex():
    res = solve_lp([1, 1], [[-1, 0], [0, -1], [1, 2]], [0, 0, 1], maximize=True)
    assert res.status == "optimal"
    assert res.value == 1
    assert all(isinstance(v, Fraction) for v in res.x)


def test_lp_equalities_and_infeasible():
    assert solve_lp([0], [[1], [-1]], [0, -1]).status == "infeasible"
    assert solve_lp([1, 0], [], [], [[1, 1]], [Fraction(1, 3)]).status == "unbounded"
    res = solve_lp([1, 0], [[-1, 0]], [0], [[1, 1]], [Fraction(1, 3)])
    assert res.value == 0 and res.x[1] == Fraction(1, 3)


# --- is_empty ---------------------------------------------------------------

def test_is_empty_examples():
    assert Polyhedron.make(1, [([1], 0), ([-1], -1)]).is_empty
    assert not Polyhedron.make(2, [([-1, 0], 0)]).is_empty


def test_is_empty_random_with_known_point():
    rng = np.random.default_rng(3)
    for _ in range(30):
        A = rng.integers(-4, 5, (3, 5))
        x0 = [Fraction(int(v), 3) for v in rng.integers(-3, 4, 5)]
        b = [sum(Fraction(int(a)) * x for a, x in zip(row, x0)) + int(rng.integers(0, 3)) for row in A]
        P = Polyhedron.make(5, list(zip(A.tolist(), b)))
        assert not P.is_empty
        assert P.contains(P.witness)


def test_zero_row_with_negative_rhs_is_flagged():
    P = Polyhedron.make(2, [([0, 0], -1)])
    assert P.flagged_empty and P.is_empty and not P.ineqs


# --- double description ----------------------------------------------------

def test_dd_examples():
    C = PolyCone.from_hrep(2, [[-1, 0], [0, -1]])
    assert set(C.gens) == {(1, 0), (0, 1)} and not C.lin
    W = dd_convert(PolyCone.from_vrep(3, [], [[1, 0, 0], [0, 1, 0], [0, 0, 1]]))
    assert W.ineqs == () and W.eqs == ()
    L = PolyCone.from_hrep(2, [[1, 0], [-1, 0]])
    assert L.gens == () and L.lin == ((0, 1),)


@pytest.mark.parametrize("seed", range(4))
def test_dd_agrees_with_brute_force(seed):
    rng = np.random.default_rng(seed)
    for _ in range(40):
        n = int(rng.integers(1, 5))
        A = rng.integers(-2, 3, (int(rng.integers(0, 7)), n)).tolist()
        E = rng.integers(-2, 3, (int(rng.integers(0, 2)), n)).tolist()
        C = PolyCone.from_hrep(n, A, E)
        rays, lin_dim = brute_force_rays(n, A, E)
        assert len(C.lin) == lin_dim
        # brute-force rays are not reduced modulo lineality, compare after reduction
        C_ref = PolyCone.from_vrep(n, list(rays), C.lin)
        assert C_ref == C


def test_polar_examples():
    assert polar(PolyCone.zero(3)) == PolyCone.full(3)
    assert polar(PolyCone.full(3)) == PolyCone.zero(3)
    orth = PolyCone.from_hrep(2, [[-1, 0], [0, -1]])
    assert polar(orth) == PolyCone.from_hrep(2, [[1, 0], [0, 1]])


cone_rows = st.integers(1, 4).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), max_size=6),
        st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), max_size=1),
    )
)


@settings(max_examples=150, deadline=None)
@given(cone_rows)
def test_polar_is_an_involution(data):
    n, A, E = data
    C = PolyCone.from_hrep(n, A, E)
    assert polar(polar(C)) == C
    assert PolyCone.from_vrep(n, C.gens, C.lin) == C


@settings(max_examples=100, deadline=None)
@given(cone_rows, st.lists(st.integers(-4, 4), min_size=4, max_size=4))
def test_polar_pairing(data, w):
    n, A, E = data
    C = PolyCone.from_hrep(n, A, E)
    v = w[:n]
    # v in polar iff <v, g> <= 0 on every generator (and = 0 on lineality)
    in_polar = all(sum(a * b for a, b in zip(v, g)) <= 0 for g in C.gens) and all(
        sum(a * b for a, b in zip(v, l)) == 0 for l in C.lin
    )
    assert polar(C).contains(v) == in_polar


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        PolyCone.from_hrep(2, [[1, 0, 0]])


def test_prune_contained_keeps_maximal_members():
    big = PolyCone.from_hrep(2, [[-1, 0]])
    small = PolyCone.from_hrep(2, [[-1, 0], [0, -1]])
    other = PolyCone.from_hrep(2, [[1, 0], [0, 1]])
    assert prune_contained([small, big, other, big]) == sorted([big, other], key=lambda c: c.key)


# --- projections -------------------------------------------------------------

@pytest.mark.parametrize("seed", range(3))
def test_exact_cone_projection_matches_float_oracle(seed):
    rng = np.random.default_rng(seed + 40)
    for _ in range(25):
        n = int(rng.integers(1, 4))
        C = PolyCone.from_hrep(n, rng.integers(-2, 3, (int(rng.integers(0, 5)), n)).tolist())
        v = [Fraction(int(x), 2) for x in rng.integers(-5, 6, n)]
        p = np.array([float(x) for x in projection_onto_cone(C, v)])
        ref = slsqp_project(C.ineqs_array(), np.zeros(len(C.ineqs)), np.array([float(x) for x in v]), C.eqs_array(), np.zeros(len(C.eqs)))
        assert np.allclose(p, ref, atol=1e-6)
        # Moreau: the squared norm of the projection equals sup <v,d> over the unit ball, squared
        sup = sup_on_unit_ball_of_cone(C.gens, C.lin, [float(x) for x in v])
        assert abs(np.linalg.norm(p) - sup) < 1e-5
        assert distance_sq_to_cone(C, v) >= 0


def test_kkt_projector_against_slsqp():
    rng = np.random.default_rng(8)
    for _ in range(60):
        d = int(rng.integers(1, 4))
        A = rng.integers(-2, 3, (int(rng.integers(0, 7)), d)).astype(float)
        E = rng.integers(-2, 3, (int(rng.integers(0, 2)), d)).astype(float)
        E = E[np.abs(E).sum(axis=1) > 0]  # SLSQP mishandles zero equality rows
        x0 = rng.normal(size=d)
        c = A @ x0 + rng.uniform(0, 1, len(A))
        f = E @ x0
        P = rng.normal(size=(4, d)) * 2
        Y, ok = KKTProjector(A, E).project(P, c, f)
        assert ok.all()
        for q in range(4):
            ref = slsqp_project(A, c, P[q], E, f)
            assert np.linalg.norm(Y[q] - ref) < 1e-5
            alt = _ldp_project(A, c, E, f, P[q])
            assert np.linalg.norm(Y[q] - alt) < 1e-7


def test_kkt_projector_reports_empty():
    A = np.array([[1.0], [-1.0]])
    Y, ok = KKTProjector(A, np.zeros((0, 1))).project(np.array([[0.0]]), np.array([0.0, -1.0]))
    assert not ok[0]


# --- Fourier-Motzkin ----------------------------------------------------------

def test_projection_of_square_with_sum():
    P = Polyhedron.make(3, [([1, 0, 0], 1), ([-1, 0, 0], 1), ([0, 1, 0], 1), ([0, -1, 0], 1)], [([1, 1, -1], 0)])
    Q = project(P, [2])
    assert Q.contains([2]) and Q.contains([-2]) and not Q.contains([Fraction(21, 10)])


def test_projection_agrees_with_lp_membership():
    rng = np.random.default_rng(5)
    for _ in range(25):
        A = rng.integers(-2, 3, (5, 3)).tolist()
        b = rng.integers(0, 4, 5).tolist()
        P = Polyhedron.make(3, list(zip(A, b)))
        Q = project(P, [0, 2])
        for _ in range(6):
            x = [Fraction(int(v), 2) for v in rng.integers(-6, 7, 2)]
            lifted = P.slice({0: x[0], 2: x[1]})
            assert Q.contains(x) == (not lifted.is_empty)
