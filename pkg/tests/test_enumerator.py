import itertools
import math
from collections import Counter

import networkx as nx
import pytest

from latticeloop.assignments import EMPTY, PlaquetteAssignment
from latticeloop.enumerator import (
    BudgetExceeded,
    _polygons,
    bad_set,
    enumerate_class,
    enumerate_gluings,
    gluing_budget,
    pps_step,
    pps_weight_relations,
    surface_sum,
    verify_pps,
)
from latticeloop.lattice import OrientedPlaquette
from latticeloop.loops import Loop, erase_backtracks
from latticeloop.maps import EmbeddedMap, blue_faces_by_edge, dual_graph, validate
from latticeloop.suites import plaquette_area3_assignments, empty_class_instance

P = OrientedPlaquette((0, 0), (1, 2), 1)
Q = OrientedPlaquette((1, 0), (1, 2), 1)
LOOP_P = Loop.parse("+2 +1 -2 -1", 2)
RECT = Loop.parse("+2 +1 +1 -2 -1 -1", 2)


def all_sigmas(labels):
    """Every blue gluing: per lattice edge, a bijection e-sides -> e^-1-sides and one back."""
    groups = {}
    for s, e in enumerate(labels):
        groups.setdefault(e.positive(), ([], []))[0 if e.sign > 0 else 1].append(s)
    per_edge = []
    for plus, minus in groups.values():
        choices = []
        for f in itertools.permutations(minus):
            for g in itertools.permutations(plus):
                choices.append(list(zip(plus, f)) + list(zip(minus, g)))
        per_edge.append(choices)
    for combo in itertools.product(*per_edge):
        sigma = [0] * len(labels)
        for pairs in combo:
            for a, b in pairs:
                sigma[a] = b
        yield tuple(sigma)


def brute_classes(loop, K):
    """Deduplicated PM and NPM codes by exhaustive gluing and a networkx separability test."""
    poly = _polygons([loop], K)
    pm, npm, total = set(), set(), 0
    for sigma in all_sigmas(poly.labels):
        total += 1
        m = EmbeddedMap(poly.loops, tuple(poly.labels), tuple(poly.yellow), sigma, tuple(poly.owner))
        if m.n_components != 1 or m.topology().genus != (0,):
            continue
        pm.add(m.canonical_code())
        g = dual_graph(m)
        separable = False
        for faces in blue_faces_by_edge(m).values():
            h = g.copy()
            h.remove_nodes_from(("B", f) for f in faces)
            separable |= not nx.is_connected(h)
        if not separable:
            npm.add(m.canonical_code())
    return pm, npm, total


CASES = [
    (LOOP_P, PlaquetteAssignment.of(P.inverse())),
    empty_class_instance(),
    (RECT, PlaquetteAssignment.of(P.inverse(), Q.inverse())),
] + [(LOOP_P, K) for K in plaquette_area3_assignments()]


@pytest.mark.parametrize("loop,K", CASES)
def test_search_matches_exhaustive_gluing(loop, K):
    pm, npm, total = brute_classes(loop, K)
    assert {m.canonical_code() for m in enumerate_class(loop, K, "PM")} == pm
    assert {m.canonical_code() for m in enumerate_class(loop, K, "NPM")} == npm
    assert enumerate_gluings(loop, K, "ALL").labelled == total


@pytest.mark.parametrize("loop,K", CASES)
def test_all_class_count_formula(loop, K):
    counts = Counter(e.positive() for e in loop.edges)
    for p, k in K.items():
        for e in p.boundary():
            counts[e.positive()] += k
    want = math.prod(math.factorial(n // 2) ** 2 for n in counts.values())
    assert enumerate_gluings(loop, K, "ALL").labelled == want


def test_every_enumerated_map_validates():
    for loop, K in CASES:
        for cls in ("PM", "NPM"):
            for m in enumerate_class(loop, K, cls):
                assert validate(m, loop, K).ok
                assert m.topology().is_disk


def test_area3_plaquette_values():
    Ks = plaquette_area3_assignments()
    assert [surface_sum(LOOP_P, K, "PM") for K in Ks] == [-1, -1, -1, -1, -4]
    assert [surface_sum(LOOP_P, K, "NPM") for K in Ks] == [0, 0, 0, 0, 0]


def test_empty_class_instance_has_no_maps():
    loop, K = empty_class_instance()
    assert enumerate_class(loop, K, "NPM") == []
    assert enumerate_class(loop, K, "PM") != []


def test_unbalanced_input_is_empty_and_null_loop():
    assert enumerate_class(LOOP_P, PlaquetteAssignment.of(P), "PM") == []
    assert surface_sum([], EMPTY) == 1
    assert surface_sum([], PlaquetteAssignment.of(P, P.inverse())) == 0


def test_budget():
    K = PlaquetteAssignment.of(P.inverse())
    assert gluing_budget([LOOP_P], K) == 4
    with pytest.raises(BudgetExceeded):
        enumerate_class(LOOP_P, K, "NPM", budget=3)
    assert len(enumerate_class(LOOP_P, K, "NPM", budget=None)) == 1


def test_string_classes_are_products():
    K = PlaquetteAssignment({P.inverse(): 2})
    maps = enumerate_class([LOOP_P, LOOP_P], K, "NPM")
    assert surface_sum([LOOP_P, LOOP_P], K, "NPM") == 1
    assert all(m.n_components == 2 for m in maps)


def test_rigidity_with_repeated_plaquettes():
    loop = Loop.parse("+2 +1 -2 -1 +2 +1 -2 -1", 2)
    K = PlaquetteAssignment({P.inverse(): 2})
    en = enumerate_gluings(loop, K, "NPM")
    assert en.maps and en.labelled == 2 * len(en.maps)


def test_pps_step_on_the_single_disk():
    K = PlaquetteAssignment.of(P.inverse())
    (m,) = enumerate_class(LOOP_P, K, "NPM")
    outs = pps_step(m)
    assert [o.case for o in outs] == ["1a"]
    (res,) = outs[0].maps
    assert res.area == 0 and erase_backtracks(res.loops[0]).is_null
    assert pps_weight_relations(m, outs) == []


@pytest.mark.parametrize("loop,K", CASES[:3] + [(LOOP_P, K) for K in plaquette_area3_assignments()])
def test_pps_verification_at_every_position(loop, K):
    for at in range(len(loop)):
        rep = verify_pps(loop, K, at)
        assert rep.ok, rep.errors


def test_bad_sets_balance_on_plaquette_neighbourhood():
    K = plaquette_area3_assignments()[-1]
    rep = verify_pps(LOOP_P, K, 0)
    assert rep.bad_negative == rep.bad_positive
    e = LOOP_P.edges[0]
    neg = [m for p in (x for x in K if e.reverse() in x.boundary()) for m in bad_set(LOOP_P, 0, "negative", p, K)]
    assert all(m.area == K.area - 1 for m in neg)
