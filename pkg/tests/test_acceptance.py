"""Acceptance criteria, one test each; every test records a PASS/FAIL line.

The lines are printed immediately (visible with ``-s``) and repeated in the
terminal summary under "acceptance criteria".
"""

import json
import os
import time

import pytest
from conftest import ACCEPTANCE_LINES

import latticeloop.maps as maps_module
from latticeloop.cli import main
from latticeloop.enumerator import enumerate_class, surface_sum
from latticeloop.loops import Loop
from latticeloop.solver import MemoTable, Solver, phi_K
from latticeloop.suites import (
    plaquette_area3_assignments,
    mle_instances,
    empty_class_instance,
    suite_backtrack,
    suite_cancellation,
    suite_mle,
    suite_oracle,
    suite_pinching,
    suite_pps,
    suite_rigidity,
    suite_weights,
)

LOOP_P = Loop.parse("+2 +1 -2 -1", 2)
# largest plaquette series bound run here; override with LATTICELOOP_ACCEPT_AMAX
SERIES_AMAX = int(os.environ.get("LATTICELOOP_ACCEPT_AMAX", "8"))


def record(n: int, title: str, ok: bool, detail: str = "") -> bool:
    line = f"criterion {n:>2} [{'PASS' if ok else 'FAIL'}] {title}" + (f": {detail}" if detail else "")
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def check_weights() -> tuple[bool, str]:
    res = suite_weights(12)
    return res.ok, f"{res.checked} checks, {len(res.failures)} failures"


def check_non_separable(a_max: int) -> tuple[bool, str]:
    npm = [surface_sum(LOOP_P, K, "NPM") for K in plaquette_area3_assignments()]
    series = Solver(2).phi_series(LOOP_P, a_max).coefficients
    want = {A: (1 if A == 1 else 0) for A in range(1, a_max + 1)}
    ok = sum(npm) == 0 and len(npm) == 5 and series == want
    return ok, f"NPM sums {npm}, series up to a_max={a_max}: {series}"


def check_oracle_window() -> tuple[bool, str]:
    res = suite_oracle(dim=2, a_max=3, max_len=8)
    return res.ok, f"d=2: {res.checked} instances, {len(res.failures)} mismatches"


def test_criterion_01_weights():
    t = time.perf_counter()
    ok, detail = check_weights()
    dt = time.perf_counter() - t
    assert record(1, "weight table and Catalan recursion", ok and dt < 1, f"{detail}, {dt:.3f}s")


def test_criterion_02_planar_sums():
    t = time.perf_counter()
    Ks = plaquette_area3_assignments()
    sums = [surface_sum(LOOP_P, K, "PM") for K in Ks]
    dt = time.perf_counter() - t
    ok = len(Ks) == 5 and sums == [-1, -1, -1, -1, -4] and sum(sums) == -8 and dt < 60
    assert record(2, "planar surface sums around the plaquette", ok, f"{sums}, total {sum(sums)}, {dt:.1f}s")


def test_criterion_03_non_separable_correction():
    t = time.perf_counter()
    ok, detail = check_non_separable(SERIES_AMAX)
    dt = time.perf_counter() - t
    ok = ok and SERIES_AMAX >= 4 and dt < 600
    assert record(3, "non-separable sums vanish and the plaquette series is beta", ok, f"{detail}, {dt:.1f}s")


def test_criterion_04_empty_class():
    t = time.perf_counter()
    loop, K = empty_class_instance()
    maps = enumerate_class(loop, K, "NPM")
    value = phi_K(loop, K)
    dt = time.perf_counter() - t
    ok = maps == [] and value == 0 and dt < 60
    assert record(4, "empty non-separable class", ok, f"{len(maps)} maps, phi_K={value}, {dt:.2f}s")


def test_criterion_05_oracle_equivalence():
    t = time.perf_counter()
    ok2, detail2 = check_oracle_window()
    res3 = suite_oracle(dim=3, a_max=2, max_len=6, seed=2024, n_random=120)
    dt = time.perf_counter() - t
    ok = ok2 and res3.ok and res3.checked >= 100 and dt < 1800
    detail = f"{detail2}; d=3: {res3.checked} random instances, {len(res3.failures)} mismatches; {dt:.1f}s"
    assert record(5, "solver equals enumerated surface sums", ok, detail)


def test_criterion_06_loop_equation():
    res = suite_mle(a_max=2, max_len=6)
    covered = empty_class_instance() in mle_instances(2, 6)
    detail = f"{res.checked} checks incl. the empty-class case, {len(res.failures)} failures"
    assert record(6, "loop equation at every edge position", res.ok and covered, detail)


def test_criterion_07_backtrack_cancellation():
    res = suite_backtrack(seed=7, n=200)
    ok = res.ok and res.checked >= 200
    detail = f"{res.checked} instances ({res.notes['nonzero']} nonzero), {len(res.failures)} failures"
    assert record(7, "backtrack invariance at fixed K", ok, detail)


def test_criterion_08_pinching():
    res = suite_pinching(a_max=3, max_len=8)
    inv = res.notes["faces_with_invalid_pinching"]
    ok = res.ok and inv > 0
    assert record(8, "pinching identities and dichotomy", ok, f"{res.checked} faces, {inv} with invalid pinchings")


def test_criterion_09_pps_structure():
    res = suite_pps(a_max=2, max_len=6)
    assert record(9, "PPS bijections, injections and weight relations", res.ok, f"{res.checked} rooted instances")


def test_criterion_10_bad_set_cancellation():
    res = suite_cancellation(a_max=2, max_len=6)
    assert record(10, "negative and positive bad sets cancel", res.ok, f"{res.checked} rooted instances")


def test_criterion_11_rigidity():
    res = suite_rigidity(a_max=3, max_len=8)
    assert record(11, "labelled gluings = prod K(p)! x maps", res.ok, f"{res.checked} instances")


def _series_bytes(capsys, jobs: str) -> str:
    assert main(["series", "--loop", "+2 +1 -2 -1", "--amax", "4", "--beta", "1/10", "--jobs", jobs]) == 0
    return capsys.readouterr().out


def test_criterion_12_determinism_persistence_mutation(capsys, tmp_path, monkeypatch):
    runs = [_series_bytes(capsys, "1"), _series_bytes(capsys, "1"), _series_bytes(capsys, "4")]
    same_json = len(set(runs)) == 1 and json.loads(runs[0])["coefficients"][0]["coeff"] == "1"

    s = Solver(2)
    s.phi_series(Loop.parse("+2 +1 +1 -2 -1 -1", 2), 3)
    path = tmp_path / "cache.jsonl"
    s.memo.save(path)
    first = path.read_bytes()
    loaded = MemoTable.load(path, 2)
    loaded.save(path)
    round_trip = loaded == s.memo and path.read_bytes() == first

    real = maps_module.blue_weight
    monkeypatch.setattr(maps_module, "blue_weight", lambda i: -real(i) if i == 2 else real(i))
    mutated = [check_weights()[0], check_non_separable(4)[0], check_oracle_window()[0]]
    monkeypatch.undo()
    caught = not any(mutated)

    detail = f"json stable {same_json}, cache round trip {round_trip}, mutation caught by 1/3/5: {[not x for x in mutated]}"
    assert record(12, "determinism, persistence and mutation sensitivity", same_json and round_trip and caught, detail)


@pytest.fixture(autouse=True, scope="module")
def _header():
    ACCEPTANCE_LINES.clear()
    yield
