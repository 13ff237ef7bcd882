import random
from fractions import Fraction

import pytest
from conftest import window_loop
from hypothesis import given
from hypothesis import strategies as st

from latticeloop.assignments import EMPTY, PlaquetteAssignment, enumerate_balanced_assignments
from latticeloop.enumerator import surface_sum
from latticeloop.lattice import OrientedPlaquette
from latticeloop.loops import NULL_LOOP, Loop, StringOfLoops
from latticeloop.solver import (
    BetaSeries,
    CacheConflict,
    CacheError,
    MemoTable,
    Solver,
    cache_load,
    cache_save,
    key_from_str,
    key_to_str,
    memo_key,
    phi_eval,
    phi_K,
    phi_K_string,
    phi_series,
    verify_mle,
)
from latticeloop.suites import inject_backtrack, empty_class_instance

P = OrientedPlaquette((0, 0), (1, 2), 1)
LOOP_P = Loop.parse("+2 +1 -2 -1", 2)


@st.composite
def instance(draw, a_max=3, max_len=8):
    loop = draw(window_loop(max_len))
    Ks = enumerate_balanced_assignments(loop, a_max)
    if not Ks:
        return loop, EMPTY
    return loop, draw(st.sampled_from(Ks))


def test_base_cases():
    assert phi_K(NULL_LOOP, EMPTY) == 1
    assert phi_K(NULL_LOOP, PlaquetteAssignment.of(P)) == 0
    assert phi_K(LOOP_P, EMPTY) == 0
    assert phi_K(Loop.parse("+1 -1", 2), EMPTY) == 1
    assert phi_K(LOOP_P, PlaquetteAssignment.of(P.inverse())) == 1
    assert phi_K(*empty_class_instance()) == 0


def test_unbalanced_or_disconnected_is_zero():
    far = OrientedPlaquette((4, 4), (1, 2), 1)
    assert phi_K(LOOP_P, PlaquetteAssignment.of(P)) == 0
    assert phi_K(LOOP_P, PlaquetteAssignment.of(P.inverse(), far, far.inverse())) == 0


def test_string_values():
    K2 = PlaquetteAssignment({P.inverse(): 2})
    assert phi_K_string([LOOP_P, LOOP_P], K2) == 1
    assert phi_K_string(StringOfLoops([]), EMPTY) == 1
    assert phi_K_string([LOOP_P], PlaquetteAssignment.of(P.inverse())) == 1
    assert phi_K_string([LOOP_P, LOOP_P], K2) == surface_sum([LOOP_P, LOOP_P], K2, "NPM")


def test_plaquette_series():
    s = phi_series(LOOP_P, 3)
    assert s.coefficients == {1: 1, 2: 0, 3: 0}
    assert all(type(v) is int for v in s.coefficients.values())
    moved = phi_series(LOOP_P.translate((3, -7)).rotate(2), 3)
    assert moved.coefficients == s.coefficients


def test_series_of_inverse_and_rectangle():
    assert phi_series(LOOP_P.inverse(), 3).coefficients == {1: 1, 2: 0, 3: 0}
    rect = Loop.parse("+2 +1 +1 -2 -1 -1", 2)
    assert phi_series(rect, 2).coefficients == {1: 0, 2: 1}


def test_evaluation():
    ev = phi_eval(LOOP_P, 0.1, 3)
    assert ev.value == pytest.approx(0.1)
    assert ev.last_area == 1
    assert "beta_0" in ev.caveat
    assert phi_eval(LOOP_P, 0, 3).value == 0
    exact = phi_eval(LOOP_P, Fraction(1, 7), 3).value
    assert exact == Fraction(1, 7) and isinstance(exact, Fraction)
    assert phi_eval(LOOP_P, "1/3", 2).value == Fraction(1, 3)
    with pytest.raises(ValueError):
        BetaSeries({5: 1}, 3)


@given(instance(), st.data())
def test_edge_choice_independence(inst, data):
    loop, K = inst
    s = Solver(2)
    want = s.phi_K(loop, K)
    at = data.draw(st.integers(0, len(loop) - 1))
    assert s.phi_K_at(loop, K, at) == want


@given(instance(), st.integers(0, 10**6))
def test_backtrack_invariance(inst, seed):
    loop, K = inst
    bt = inject_backtrack(loop, random.Random(seed))
    assert phi_K(bt, K) == phi_K(loop, K)


def test_termination_monitor_accepts_every_call():
    s = Solver(2, check_termination=True)
    for K in enumerate_balanced_assignments(LOOP_P, 5):
        s.phi_K(LOOP_P, K)
    rect = Loop.parse("+2 +2 +1 -2 -2 -1", 2)
    for K in enumerate_balanced_assignments(rect, 3):
        s.phi_K(rect, K)


def test_pivot_override_requires_reduced_loop():
    with pytest.raises(ValueError):
        Solver(2).phi_K_at(Loop.parse("+1 -1 +2 +1 -2 -1", 2), EMPTY, 0)


@given(instance(a_max=2, max_len=6))
def test_loop_equation_by_enumeration(inst):
    loop, K = inst
    for at in range(len(loop)):
        assert verify_mle(loop, K, at).ok


def test_loop_equation_examples():
    K = PlaquetteAssignment.of(P.inverse())
    for at in range(4):
        r = verify_mle(LOOP_P, K, at)
        assert r.ok and r.lhs == 1
    loop, K = empty_class_instance()
    assert all(verify_mle(loop, K, at).lhs == 0 == verify_mle(loop, K, at).rhs for at in range(4))


@given(instance(), st.integers(0, 7), st.tuples(st.integers(-4, 4), st.integers(-4, 4)))
def test_memo_key_is_translation_and_rotation_invariant(inst, k, shift):
    loop, K = inst
    key = memo_key(loop, K)[0]
    assert memo_key(loop.rotate(k % len(loop)).translate(shift), K.translate(shift))[0] == key
    assert key_from_str(key_to_str(key)) == key


def test_cache_round_trip(tmp_path):
    empty = MemoTable(2)
    cache_save(empty, tmp_path / "e.jsonl")
    assert cache_load(tmp_path / "e.jsonl") == empty
    s = Solver(2)
    s.phi_series(LOOP_P, 4)
    path = tmp_path / "c.jsonl"
    cache_save(s.memo, path)
    first = path.read_bytes()
    loaded = cache_load(path, 2)
    assert loaded == s.memo
    cache_save(loaded, path)
    assert path.read_bytes() == first
    again = Solver(2, loaded)
    assert again.phi_series(LOOP_P, 4).coefficients == s.phi_series(LOOP_P, 4).coefficients


def test_cache_guards(tmp_path):
    path = tmp_path / "d3.jsonl"
    cache_save(MemoTable(3), path)
    with pytest.raises(CacheError):
        cache_load(path, 2)
    with pytest.raises(CacheError):
        Solver(2, MemoTable(3))
    (tmp_path / "bad.jsonl").write_text('{"schema":"other/v9","dim":2}\n')
    with pytest.raises(CacheError):
        cache_load(tmp_path / "bad.jsonl")
    a, b = MemoTable(2), MemoTable(2)
    key = memo_key(LOOP_P, PlaquetteAssignment.of(P.inverse()))[0]
    a.entries[key], b.entries[key] = 1, 2
    with pytest.raises(CacheConflict):
        a.update(b)


def test_parallel_matches_serial():
    loop = Loop.parse("+2 +1 +1 -2 -1 -1", 2)
    serial = Solver(2).phi_series(loop, 4, jobs=1)
    par = Solver(2)
    parallel = par.phi_series(loop, 4, jobs=3)
    assert serial.coefficients == parallel.coefficients
    assert par.memo.entries
