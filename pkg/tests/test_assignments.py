import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from latticeloop.assignments import (
    EMPTY,
    PlaquetteAssignment,
    decompositions,
    enumerate_balanced_assignments,
    is_ell_connected,
)
from latticeloop.lattice import OrientedPlaquette
from latticeloop.loops import Loop, edge_flux, is_balanced

P = OrientedPlaquette((0, 0), (1, 2), 1)
Q = OrientedPlaquette((1, 0), (1, 2), 1)
FAR = OrientedPlaquette((5, 5), (1, 2), 1)


def window_plaquettes(lo, hi, dim=2):
    out = []
    for base in itertools.product(range(lo, hi + 1), repeat=dim):
        for axes in itertools.combinations(range(1, dim + 1), 2):
            for sign in (1, -1):
                out.append(OrientedPlaquette(base, axes, sign))
    return out


def brute_force(loop, a_max, plaqs):
    """Filter every multiset of window plaquettes by balance and loop-connectivity."""
    flux = {p: edge_flux([], PlaquetteAssignment.of(p)) for p in plaqs}
    base = edge_flux(loop)
    out = set()
    for k in range(1, a_max + 1):
        for combo in itertools.combinations_with_replacement(plaqs, k):
            acc = dict(base)
            for p in combo:
                for e, v in flux[p].items():
                    acc[e] = acc.get(e, 0) + v
            if any(acc.values()):
                continue
            K = PlaquetteAssignment.of(*combo)
            assert is_balanced(loop, K)
            if is_ell_connected(loop, K):
                out.add(K)
    return sorted(out)


plaquettes = st.builds(
    OrientedPlaquette,
    st.tuples(st.integers(-2, 2), st.integers(-2, 2)),
    st.just((1, 2)),
    st.sampled_from([1, -1]),
)
assignments = st.dictionaries(plaquettes, st.integers(1, 3), max_size=4).map(PlaquetteAssignment)


def test_plaquette_counts_by_area():
    p = Loop.parse("+2 +1 -2 -1", 2)
    got = enumerate_balanced_assignments(p, 5)
    by_area = [sum(1 for K in got if K.area == a) for a in range(1, 6)]
    assert by_area == [1, 0, 5, 0, 27]
    assert got[0] == PlaquetteAssignment.of(P.inverse())


@pytest.mark.parametrize(
    "text,a_max,lo,hi",
    [("+2 +1 -2 -1", 3, -3, 3), ("+1 +2 -1 -2", 3, -3, 3), ("+2 +1 +1 -2 -1 -1", 2, -2, 3)],
)
def test_enumeration_matches_brute_force(text, a_max, lo, hi):
    loop = Loop.parse(text, 2)
    assert enumerate_balanced_assignments(loop, a_max) == brute_force(loop, a_max, window_plaquettes(lo, hi))


def test_enumeration_matches_brute_force_in_three_dimensions():
    loop = Loop.parse("+3 +1 -3 -1", 3)
    assert enumerate_balanced_assignments(loop, 2) == brute_force(loop, 2, window_plaquettes(-2, 2, 3))


def test_exact_area_filter():
    p = Loop.parse("+2 +1 -2 -1", 2)
    three = enumerate_balanced_assignments(p, 3, exact_area=3)
    assert len(three) == 5 and all(K.area == 3 for K in three)


@given(assignments)
def test_decompositions_count_and_sum(K):
    parts = list(decompositions(K))
    assert len(parts) == math.prod(k + 1 for _, k in K.items())
    assert len(set(parts)) == len(parts)
    assert all(a + b == K for a, b in parts)


@given(assignments, assignments)
def test_addition_subtraction(K1, K2):
    s = K1 + K2
    assert s.area == K1.area + K2.area
    assert s - K2 == K1
    assert hash(K1 + K2) == hash(K2 + K1)


@given(assignments, st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
def test_json_and_translation(K, shift):
    assert PlaquetteAssignment.from_json(K.to_json()) == K
    assert K.translate(shift).translate(tuple(-x for x in shift)) == K
    assert K.translate(shift).area == K.area


def test_invalid_operations():
    K = PlaquetteAssignment.of(P)
    with pytest.raises(ValueError):
        K.remove(Q)
    with pytest.raises(ValueError):
        K - PlaquetteAssignment({P: 2})
    with pytest.raises(ValueError):
        PlaquetteAssignment({P: -1})
    assert PlaquetteAssignment({P: 0}) == EMPTY


def test_loop_connectivity():
    p = Loop.parse("+2 +1 -2 -1", 2)
    assert is_ell_connected(p, EMPTY)
    assert is_ell_connected(p, PlaquetteAssignment.of(P.inverse(), Q, Q.inverse()))
    assert not is_ell_connected(p, PlaquetteAssignment.of(P.inverse(), FAR, FAR.inverse()))
    # Q touches p only through a shared edge; the next square along does not
    R = OrientedPlaquette((2, 0), (1, 2), 1)
    assert not is_ell_connected(p, PlaquetteAssignment.of(R, R.inverse()))
    assert is_ell_connected(p, PlaquetteAssignment.of(Q, R, R.inverse()))
