"""Instance generators and the self-verification suites.

Each suite returns a :class:`SuiteResult` with the number of checks run and a
machine-readable list of failures.  The suites are shared by ``latticeloop
verify`` and the test-suite.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Iterable

from . import maps as _maps
from .assignments import PlaquetteAssignment, enumerate_balanced_assignments
from .enumerator import DEFAULT_BUDGET, enumerate_class, enumerate_gluings, surface_sum, verify_pps
from .lattice import OrientedPlaquette
from .loops import Loop, canonicalize, has_backtrack
from .maps import catalan
from .pinching import check_face, has_disjoint_vertices
from .solver import Solver, verify_mle

Instance = tuple[Loop, PlaquetteAssignment]


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list[dict[str, Any]] = field(default_factory=list)
    notes: dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, **info: Any) -> None:
        self.failures.append(info)

    def to_json(self) -> dict[str, Any]:
        return {
            "suite": self.name,
            "ok": self.ok,
            "checked": self.checked,
            "failures": self.failures,
            "notes": self.notes,
        }


def describe(loop: Loop, K: PlaquetteAssignment) -> dict[str, Any]:
    return {"loop": loop.text(), "K": K.to_json()}


# --- instance generators ------------------------------------------------------------------


@lru_cache(maxsize=None)
def window_loops(width: int, max_len: int, dim: int = 2) -> tuple[Loop, ...]:
    """Backtrack-free closed walks of length at most ``max_len`` inside a ``width^dim`` vertex box.

    One representative per translation and rotation class.
    """
    found: dict[tuple[int, ...], Loop] = {}
    for v0 in itertools.product(range(width), repeat=dim):
        stack: list[tuple[tuple[int, ...], tuple[int, ...]]] = [(v0, ())]
        while stack:
            v, steps = stack.pop()
            if steps and v == v0:
                loop = Loop(v0, steps)
                if not has_backtrack(loop):
                    found.setdefault(canonicalize(loop).steps, loop)
            if len(steps) == max_len:
                continue
            for ax in range(1, dim + 1):
                for sg in (1, -1):
                    if steps and steps[-1] == -sg * ax:
                        continue
                    nv = list(v)
                    nv[ax - 1] += sg
                    if 0 <= nv[ax - 1] < width:
                        stack.append((tuple(nv), steps + (sg * ax,)))
    return tuple(found[k] for k in sorted(found, key=lambda s: (len(s), s)))


@lru_cache(maxsize=None)
def window_instances(width: int = 4, max_len: int = 8, a_max: int = 3, dim: int = 2) -> tuple[Instance, ...]:
    """Every window loop paired with every balanced loop-connected ``K`` of area at most ``a_max``."""
    return tuple(
        (loop, K) for loop in window_loops(width, max_len, dim) for K in enumerate_balanced_assignments(loop, a_max)
    )


def empty_class_instance() -> Instance:
    """Plaquette ``p`` with ``{p^-1, q, q^-1}``, ``q`` the square right of ``p``: no non-separable map."""
    p = OrientedPlaquette((0, 0), (1, 2), 1)
    q = OrientedPlaquette((1, 0), (1, 2), 1)
    return Loop.parse("+2 +1 -2 -1", 2), PlaquetteAssignment.of(p.inverse(), q, q.inverse())


def plaquette_area3_assignments() -> list[PlaquetteAssignment]:
    """The balanced, loop-connected area-3 assignments of the 2D origin plaquette."""
    return enumerate_balanced_assignments(Loop.parse("+2 +1 -2 -1", 2), 3, exact_area=3)


def random_instances(seed: int, n: int = 100, dim: int = 3, max_len: int = 6, a_max: int = 2) -> list[Instance]:
    """``n`` random translates and rotations of the window instances in dimension ``dim``."""
    rng = random.Random(seed)
    pool = [inst for inst in window_instances(3, max_len, a_max, dim)]
    if not pool:
        raise ValueError("no instances in the requested bounds")
    out = []
    for _ in range(n):
        loop, K = rng.choice(pool)
        shift = tuple(rng.randint(-5, 5) for _ in range(dim))
        loop = loop.rotate(rng.randrange(len(loop))).translate(shift)
        out.append((loop, K.translate(shift)))
    return out


def inject_backtrack(loop: Loop, rng: random.Random) -> Loop:
    """Insert a random ``e e^-1`` pair at a random position of ``loop``."""
    i = rng.randrange(len(loop) + 1)
    step = rng.choice([1, -1]) * rng.randint(1, loop.dim)
    steps = loop.steps[:i] + (step, -step) + loop.steps[i:]
    return Loop(loop.base, steps)


# --- suites -------------------------------------------------------------------------------


def suite_weights(k_max: int = 12) -> SuiteResult:
    res = SuiteResult("weights")
    table = [_maps.blue_weight(i) for i in range(1, 6)]
    res.checked += 1
    if table != [1, -1, 2, -5, 14]:
        res.fail(check="table", got=table)
    for i in range(1, 2 * k_max):
        res.checked += 1
        if _maps.blue_weight(i) != (-1) ** (i - 1) * catalan(i - 1):
            res.fail(check="closed form", i=i)
    # generating-function recursion over degrees 2k
    w = lambda k: _maps.blue_weight(k)  # noqa: E731
    for k in range(2, k_max + 1):
        res.checked += 1
        total = w(k) + sum(w(h) * w(k - h) for h in range(1, k))
        if total != 0:
            res.fail(check="recursion", k=k, value=total)
    return res


def suite_oracle(
    dim: int = 2, a_max: int = 3, max_len: int | None = None, seed: int = 0, n_random: int = 100,
    budget: int = DEFAULT_BUDGET,
) -> SuiteResult:
    """Solver against the enumerator's non-separable surface sums."""
    res = SuiteResult("oracle")
    solver = Solver(dim)
    if dim == 2:
        insts = list(window_instances(4, max_len or 8, a_max, 2))
    else:
        insts = random_instances(seed, n_random, dim, max_len or 6, a_max)
    for loop, K in insts:
        res.checked += 1
        a = solver.phi_K(loop, K)
        b = surface_sum(loop, K, "NPM", budget)
        if a != b:
            res.fail(**describe(loop, K), solver=str(a), oracle=str(b))
    return res


def mle_instances(a_max: int = 2, max_len: int = 6) -> list[Instance]:
    return list(window_instances(4, max_len, a_max, 2)) + [empty_class_instance()]


def suite_mle(a_max: int = 2, max_len: int = 6, budget: int = DEFAULT_BUDGET) -> SuiteResult:
    """Loop equation with every term enumerated, at every edge position."""
    res = SuiteResult("mle")
    for loop, K in mle_instances(a_max, max_len):
        for at in range(len(loop)):
            res.checked += 1
            r = verify_mle(loop, K, at, budget)
            if not r.ok:
                res.fail(**describe(loop, K), at=at, lhs=str(r.lhs), rhs=str(r.rhs))
    return res


def suite_backtrack(seed: int = 0, n: int = 200, a_max: int = 3, budget: int = DEFAULT_BUDGET) -> SuiteResult:
    """Fixed-``K`` invariance under an injected backtrack, on the solver and on the enumerator."""
    res = SuiteResult("backtrack")
    rng = random.Random(seed)
    loops = [l for l in window_loops(4, 6, 2)]
    solver = Solver(2)
    nonzero = 0
    while res.checked < n:
        loop = rng.choice(loops)
        bt = inject_backtrack(loop, rng)
        Ks = enumerate_balanced_assignments(bt, a_max)
        if not Ks:
            continue
        K = rng.choice(Ks)
        res.checked += 1
        s1, s2 = solver.phi_K(bt, K), solver.phi_K(loop, K)
        e1, e2 = surface_sum(bt, K, "NPM", budget), surface_sum(loop, K, "NPM", budget)
        nonzero += e2 != 0
        if not (s1 == s2 == e1 == e2):
            res.fail(**describe(bt, K), reduced=loop.text(), values=[str(x) for x in (s1, s2, e1, e2)])
    res.notes["nonzero"] = nonzero
    return res


def npm_corpus(a_max: int = 3, max_len: int = 8) -> Iterable[tuple[Loop, PlaquetteAssignment, _maps.EmbeddedMap]]:
    for loop, K in window_instances(4, max_len, a_max, 2):
        for m in enumerate_class(loop, K, "NPM"):
            yield loop, K, m


def suite_pinching(a_max: int = 3, max_len: int = 8) -> SuiteResult:
    """Single-vertex, all-collections and dichotomy identities on every blue face of degree at least 4."""
    res = SuiteResult("pinching")
    invalid = 0
    for loop, K, m in npm_corpus(a_max, max_len):
        for f, cyc in enumerate(m.blue_faces):
            if len(cyc) < 4 or not has_disjoint_vertices(m, f):
                continue
            res.checked += 1
            fc = check_face(m, f)
            invalid += fc.has_invalid
            bad = [k for k in ("single_vertex", "all_collections", "dichotomy", "arcs_ok") if not getattr(fc, k)]
            if bad:
                res.fail(**describe(loop, K), face=f, failed=bad)
    res.notes["faces_with_invalid_pinching"] = invalid
    if not invalid:
        res.fail(check="corpus has no face with an invalid pinching")
    return res


def suite_pps(a_max: int = 2, max_len: int = 6, budget: int = DEFAULT_BUDGET, cancellation: bool = False) -> SuiteResult:
    """Split bijections, deformation injectivity and weight relations; optionally only the bad-set equality."""
    res = SuiteResult("cancellation" if cancellation else "pps")
    for loop, K in mle_instances(a_max, max_len):
        if cancellation and K.area == 0:
            continue
        for at in range(len(loop)):
            res.checked += 1
            r = verify_pps(loop, K, at, budget)
            if cancellation:
                if r.bad_negative != r.bad_positive:
                    res.fail(**describe(loop, K), at=at, negative=str(r.bad_negative), positive=str(r.bad_positive))
            elif not r.ok:
                res.fail(**describe(loop, K), at=at, errors=r.errors)
    return res


def suite_rigidity(a_max: int = 3, max_len: int = 8, budget: int = DEFAULT_BUDGET) -> SuiteResult:
    """Labelled gluings equal ``prod K(p)!`` times the deduplicated non-separable count."""
    res = SuiteResult("rigidity")
    for loop, K in window_instances(4, max_len, a_max, 2):
        res.checked += 1
        en = enumerate_gluings(loop, K, "NPM", budget)
        factor = math.prod(math.factorial(k) for _, k in K.items())
        if en.labelled != factor * len(en.maps):
            res.fail(**describe(loop, K), labelled=en.labelled, maps=len(en.maps), factor=factor)
    return res


def suite_cancellation(a_max: int = 2, max_len: int = 6, budget: int = DEFAULT_BUDGET) -> SuiteResult:
    """Negative and positive bad sets carry equal weight at every edge position."""
    return suite_pps(a_max, max_len, budget, cancellation=True)


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "weights": suite_weights,
    "oracle": suite_oracle,
    "mle": suite_mle,
    "backtrack": suite_backtrack,
    "pinching": suite_pinching,
    "pps": suite_pps,
    "cancellation": suite_cancellation,
    "rigidity": suite_rigidity,
}
