"""Brute-force oracle: every embedded map with a given boundary and assignment.

Yellow polygons (one per plaquette copy and one per boundary loop) are glued
through blue faces by choosing, for each unoriented lattice edge, the
counter-clockwise successor of every side.  For the planar classes the search
is pruned with an Euler-characteristic bound; surviving complexes are
classified and deduplicated by canonical code.

The pinching-peeling-separating (PPS) step and the bad sets that complement
its deformation images also live here, since both are defined on the
enumerated classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .assignments import PlaquetteAssignment, decompositions
from .lattice import OrientedEdge, OrientedPlaquette, plaquette_boundary, plaquettes_containing
from .loops import Loop, StringOfLoops, as_string, merge, negative_splittings, positive_splittings
from .maps import (
    EmbeddedMap,
    UnionFind,
    disjoint_union,
    empty_map,
    is_non_separable,
    weight_infinity,
)
from .pinching import pinch

DEFAULT_BUDGET = 10**6
CLASSES = ("ALL", "PM", "NPM")


class BudgetExceeded(RuntimeError):
    """The gluing search space exceeds the configured budget."""


# --- gluing search --------------------------------------------------------------------


@dataclass
class _Polygons:
    loops: tuple[Loop, ...]
    labels: list[OrientedEdge]
    yellow: list[int]
    owner: list[tuple]
    n_yellow: int


def _polygons(loops: Sequence[Loop], K: PlaquetteAssignment) -> _Polygons:
    labels: list[OrientedEdge] = []
    yellow: list[int] = []
    owner: list[tuple] = []
    n_yellow = 0
    for i, l in enumerate(loops):
        start = len(labels)
        n = len(l)
        for j, e in enumerate(l.edges):
            labels.append(e)
            yellow.append(start + (j + 1) % n)
            owner.append(("L", i, j))
        n_yellow += 1
    for p, k in K.items():
        bd = plaquette_boundary(p)
        for c in range(k):
            start = len(labels)
            for j, e in enumerate(bd):
                labels.append(e)
                yellow.append(start + (j + 1) % 4)
                owner.append(("P", p, c))
            n_yellow += 1
    return _Polygons(tuple(loops), labels, yellow, owner, n_yellow)


def gluing_budget(loops: Sequence[Loop], K: PlaquetteAssignment) -> int:
    """Sum over unoriented edges of ``(n_e!)^2``."""
    poly = _polygons(loops, K)
    counts: dict[OrientedEdge, int] = {}
    for e in poly.labels:
        if e.sign > 0:
            counts[e] = counts.get(e, 0) + 1
    return sum(math.factorial(n) ** 2 for n in counts.values())


def _search(poly: _Polygons, prune: bool, on_leaf) -> None:
    """Call ``on_leaf(sigma)`` for every blue gluing (pruned to connected-planar candidates)."""
    labels, Y = poly.labels, poly.yellow
    n = len(labels)
    groups: dict[OrientedEdge, tuple[list[int], list[int]]] = {}
    first_seen: dict[OrientedEdge, int] = {}
    for s, e in enumerate(labels):
        u = e.positive()
        first_seen.setdefault(u, s)
        groups.setdefault(u, ([], []))[0 if e.sign > 0 else 1].append(s)
    order = sorted(groups, key=lambda u: (len(groups[u][0]), first_seen[u]))
    plus = [groups[u][0] for u in order]
    minus = [groups[u][1] for u in order]
    n_edges = len(order)
    target = n + 2 - poly.n_yellow

    sigma = [-1] * n
    first = list(range(n))  # indexed by path ends
    last = list(range(n))  # indexed by path starts
    st = {"cyc": 0, "paths": n, "done": 0, "open": 0, "free": sum(len(p) for p in plus)}

    def link(x: int, y: int):
        a = Y[x]
        sigma[x] = y
        f = first[a]
        if f == y:
            st["cyc"] += 1
            st["paths"] -= 1
            return None
        l = last[y]
        rec = (f, last[f], l, first[l])
        last[f] = l
        first[l] = f
        st["paths"] -= 1
        return rec

    def unlink(x: int, rec) -> None:
        sigma[x] = -1
        if rec is None:
            st["cyc"] -= 1
        else:
            f, lf, l, fl = rec
            last[f] = lf
            first[l] = fl
        st["paths"] += 1

    def ok() -> bool:
        if not prune:
            return True
        return st["cyc"] + st["paths"] + st["done"] + st["open"] + st["free"] >= target

    def start(ei: int) -> None:
        while ei < n_edges and not plus[ei]:
            ei += 1
        if ei == n_edges:
            on_leaf(tuple(sigma))
            return
        s0 = plus[ei].pop(0)
        st["free"] -= 1
        st["open"] += 1
        extend(ei, s0, s0)
        st["open"] -= 1
        st["free"] += 1
        plus[ei].insert(0, s0)

    def extend(ei: int, s0: int, cur: int) -> None:
        ms, ps = minus[ei], plus[ei]
        for idx in range(len(ms)):
            m = ms.pop(idx)
            r1 = link(cur, m)
            if ok():
                r2 = link(m, s0)
                if ok():
                    st["open"] -= 1
                    st["done"] += 1
                    start(ei)
                    st["done"] -= 1
                    st["open"] += 1
                unlink(m, r2)
                for jdx in range(len(ps)):
                    p = ps.pop(jdx)
                    st["free"] -= 1
                    r3 = link(m, p)
                    if ok():
                        extend(ei, s0, p)
                    unlink(m, r3)
                    st["free"] += 1
                    ps.insert(jdx, p)
            unlink(cur, r1)
            ms.insert(idx, m)

    start(0)


def _is_connected(Y: Sequence[int], sigma: Sequence[int]) -> bool:
    n = len(Y)
    if n == 0:
        return True
    uf = UnionFind(n)
    comps = n
    for s in range(n):
        comps -= uf.union(s, Y[s])
        comps -= uf.union(s, sigma[s])
    return comps == 1


@dataclass
class Enumeration:
    """Deduplicated maps of one class plus the number of labelled gluings realising them."""

    maps: list[EmbeddedMap]
    labelled: int = 0
    codes: list[bytes] = field(default_factory=list)

    def weight_sum(self) -> int:
        return sum(weight_infinity(m) for m in self.maps)


def _check_budget(loops: Sequence[Loop], K: PlaquetteAssignment, budget: int | None) -> None:
    if budget is None:
        return
    need = gluing_budget(loops, K)
    if need > budget:
        raise BudgetExceeded(f"gluing search needs {need} > budget {budget}")


@lru_cache(maxsize=4096)
def _enumerate_connected(loops: tuple[Loop, ...], K: PlaquetteAssignment, cls: str) -> Enumeration:
    poly = _polygons(loops, K)
    found: dict[bytes, EmbeddedMap] = {}
    count = 0

    def on_leaf(sigma: tuple[int, ...]) -> None:
        nonlocal count
        m = EmbeddedMap(poly.loops, tuple(poly.labels), tuple(poly.yellow), sigma, tuple(poly.owner))
        if cls != "ALL":
            if not _is_connected(poly.yellow, sigma):
                return
            topo = m.topology()
            if topo.genus != (0,):
                return
            if cls == "NPM" and not is_non_separable(m):
                return
        count += 1
        code = m.canonical_code()
        found.setdefault(code, m)

    _search(poly, prune=cls != "ALL", on_leaf=on_leaf)
    codes = sorted(found)
    return Enumeration([found[c] for c in codes], count, codes)


def _balanced_sides(loops: Sequence[Loop], K: PlaquetteAssignment) -> bool:
    from .loops import is_balanced

    return is_balanced(loops, K)


def enumerate_gluings(
    s: Loop | StringOfLoops | Iterable[Loop],
    K: PlaquetteAssignment,
    cls: str = "NPM",
    budget: int | None = DEFAULT_BUDGET,
) -> Enumeration:
    """Enumerate a class with labelled-gluing statistics.

    ``ALL`` is every gluing of the polygons.  ``PM`` and ``NPM`` are products
    of planar (respectively planar non-separable) disks, one per loop, summed
    over the ordered decompositions of ``K`` among the loops.
    """
    if cls not in CLASSES:
        raise ValueError(f"unknown class {cls!r}")
    loops = as_string(s).loops
    if not loops:
        if K.area == 0:
            return Enumeration([empty_map()], 1, [empty_map().canonical_code()])
        return Enumeration([], 0, [])
    if not _balanced_sides(loops, K):
        return Enumeration([], 0, [])
    if cls == "ALL" or len(loops) == 1:
        _check_budget(loops, K, budget)
        return _enumerate_connected(tuple(loops), K, cls)
    # product structure over the loops
    out: dict[bytes, EmbeddedMap] = {}
    labelled = 0
    for parts in _split_assignment(K, len(loops)):
        if not all(_balanced_sides([l], k) for l, k in zip(loops, parts)):
            continue
        factors = []
        for l, k in zip(loops, parts):
            _check_budget([l], k, budget)
            factors.append(_enumerate_connected((l,), k, cls))
        if any(not f.maps for f in factors):
            continue
        mult = 1
        for f in factors:
            mult *= f.labelled
        labelled += mult
        for combo in _product([f.maps for f in factors]):
            m = disjoint_union(combo)
            out.setdefault(m.canonical_code(), m)
    codes = sorted(out)
    return Enumeration([out[c] for c in codes], labelled, codes)


def _split_assignment(K: PlaquetteAssignment, n: int):
    if n == 1:
        yield (K,)
        return
    for k1, rest in decompositions(K):
        for tail in _split_assignment(rest, n - 1):
            yield (k1,) + tail


def _product(lists):
    if not lists:
        yield ()
        return
    for x in lists[0]:
        for rest in _product(lists[1:]):
            yield (x,) + rest


def enumerate_class(
    s: Loop | StringOfLoops | Iterable[Loop],
    K: PlaquetteAssignment,
    cls: str = "NPM",
    budget: int | None = DEFAULT_BUDGET,
) -> list[EmbeddedMap]:
    """Deduplicated maps with boundary ``s`` and assignment ``K`` in class ALL, PM or NPM."""
    return enumerate_gluings(s, K, cls, budget).maps


def surface_sum(
    s: Loop | StringOfLoops | Iterable[Loop],
    K: PlaquetteAssignment,
    cls: str = "NPM",
    budget: int | None = DEFAULT_BUDGET,
) -> int:
    """Exact sum of large-N weights over the class; the null loop gives ``[K = 0]``."""
    return sum(weight_infinity(m) for m in enumerate_class(s, K, cls, budget))


def clear_cache() -> None:
    _enumerate_connected.cache_clear()


# --- PPS step -----------------------------------------------------------------------------


@dataclass(frozen=True)
class PPSOutcome:
    """One branch of the PPS step.

    ``case`` is ``"1a"`` (negative deformation), ``"1b"`` (negative splitting),
    ``"2a"`` (positive deformation) or ``"2b"`` (positive splitting).  For
    case 2 ``pinched`` is the intermediate map and ``half_degree`` the
    half-degree of the new blue face through the pivot side.
    """

    case: str
    maps: tuple[EmbeddedMap, ...]
    plaquette: OrientedPlaquette | None = None
    position: int | None = None
    half_degree: int = 0
    pinched: EmbeddedMap | None = None

    @property
    def weight(self) -> int:
        w = 1
        for m in self.maps:
            w *= weight_infinity(m)
        return w


def _delete_sides(Y: dict[int, int], sides: Iterable[int]) -> None:
    for x in sides:
        nxt = Y.pop(x)
        if nxt == x:
            continue
        pred = next(k for k, v in Y.items() if v == x)
        Y[pred] = nxt


def _rebuild(m: EmbeddedMap, Y: dict[int, int], sigma: dict[int, int], roots: list[int | None]) -> EmbeddedMap:
    labels = {s: m.labels[s] for s in Y}
    return EmbeddedMap.from_permutations(labels, Y, {s: sigma[s] for s in Y}, roots)


def _split_components(m: EmbeddedMap) -> tuple[EmbeddedMap, ...]:
    parts = m.components()
    if len(parts) != len(m.loops):
        raise AssertionError("splitting left a closed component")
    return tuple(parts)


def pps_step(m: EmbeddedMap) -> list[PPSOutcome]:
    """Apply one PPS step at the position-0 side of the (single) boundary loop."""
    if len(m.loops) != 1 or m.loops[0].is_null:
        raise ValueError("PPS needs a map with one non-null boundary loop")
    if m.area == 0:
        raise ValueError("PPS needs a non-empty plaquette assignment")
    side0 = m.loop_roots[0]
    face = [side0]
    t = m.blue[side0]
    while t != side0:
        face.append(t)
        t = m.blue[t]
    delta = len(face) // 2
    sigma = dict(enumerate(m.blue))
    if delta == 1:
        t = face[1]
        Y = dict(enumerate(m.yellow))
        y0, yt = Y[side0], Y[t]
        Y[side0], Y[t] = yt, y0
        _delete_sides(Y, (side0, t))
        o = m.owner[t]
        if o[0] == "P":
            return [PPSOutcome("1a", (_rebuild(m, Y, sigma, [yt]),), plaquette=o[1])]
        roots = [None if yt == side0 else yt, None if y0 == t else y0]
        merged = _rebuild(m, Y, sigma, roots)
        return [PPSOutcome("1b", _split_components(merged), position=o[2])]
    out = []
    for i in range(1, delta):
        ci = face[2 * i]
        mi = pinch(m, side0, ci)
        # peel at the pinched vertex: reconnect the yellow corners before side0 and c_i
        Y = dict(enumerate(mi.yellow))
        y0 = Y[side0]
        p0, pc = mi.yellow_inv[side0], mi.yellow_inv[ci]
        Y[p0], Y[pc] = ci, side0
        sig = dict(enumerate(mi.blue))
        o = m.owner[ci]
        if o[0] == "P":
            res = _rebuild(mi, Y, sig, [ci])
            out.append(PPSOutcome("2a", (res,), plaquette=o[1], half_degree=i, pinched=mi))
        else:
            res = _rebuild(mi, Y, sig, [ci, y0])
            out.append(
                PPSOutcome("2b", _split_components(res), position=o[2], half_degree=i, pinched=mi)
            )
    return out


def pps_weight_relations(m: EmbeddedMap, outcomes: Sequence[PPSOutcome]) -> list[str]:
    """Violations of the per-step weight and area relations (empty when all hold)."""
    errs = []
    w = weight_infinity(m)
    a = m.area
    for oc in outcomes:
        area_out = sum(x.area for x in oc.maps)
        if oc.case in ("1a", "2a") and area_out != a - 1:
            errs.append(f"{oc.case}: area {area_out} != {a} - 1")
        if oc.case in ("1b", "2b") and area_out != a:
            errs.append(f"{oc.case}: area {area_out} != {a}")
        if oc.case in ("1a", "1b") and oc.weight != w:
            errs.append(f"{oc.case}: weight {oc.weight} != {w}")
        if oc.pinched is not None and weight_infinity(oc.pinched) != oc.weight:
            errs.append(f"{oc.case}: weight changed after peeling")
    if outcomes and outcomes[0].case in ("2a", "2b"):
        if w != -sum(oc.weight for oc in outcomes):
            errs.append(f"case 2: weight {w} != -({' + '.join(str(oc.weight) for oc in outcomes)})")
    return errs


# --- bad sets -------------------------------------------------------------------------------


def _faces_chain_connected(m: EmbeddedMap, e: OrientedEdge, src: set[int], dst: set[int]) -> bool:
    """Is some blue face in ``src`` linked to one in ``dst`` through blue faces over ``e`` sharing vertices?"""
    faces = [i for i in range(len(m.blue_faces)) if m.blue_edge(i) == e.positive()]
    if not (src & set(faces)) or not (dst & set(faces)):
        return False
    verts = {f: {m.vertex_of[s] for s in m.blue_faces[f]} for f in faces}
    seen = set(src & set(faces))
    stack = list(seen)
    while stack:
        f = stack.pop()
        if f in dst:
            return True
        for g in faces:
            if g not in seen and verts[f] & verts[g]:
                seen.add(g)
                stack.append(g)
    return False


def _faces_at_vertex(m: EmbeddedMap, v: int) -> set[int]:
    return {m.blue_face_of[s] for s in range(m.n_sides) if m.vertex_of[s] == v}


def is_bad_negative(m: EmbeddedMap, e: OrientedEdge) -> bool:
    """``m`` has boundary ``a b c pi``; blue faces over ``e`` join the first and last vertex of ``pi``."""
    root = m.loop_roots[0]
    start_pi = m.vertex_of[m.yellow[m.yellow[m.yellow[root]]]]
    end_pi = m.vertex_of[root]
    return _faces_chain_connected(m, e, _faces_at_vertex(m, start_pi), _faces_at_vertex(m, end_pi))


def is_bad_positive(m: EmbeddedMap, e: OrientedEdge) -> bool:
    """``m`` has boundary ``e d f g e' pi``; blue faces over ``e`` join the sides ``e`` and ``e'``."""
    root = m.loop_roots[0]
    s4 = root
    for _ in range(4):
        s4 = m.yellow[s4]
    return _faces_chain_connected(m, e, {m.blue_face_of[root]}, {m.blue_face_of[s4]})


def deformed(loop: Loop, at: int, mode: str, p: OrientedPlaquette) -> Loop:
    """``loop`` (rooted at ``at``) merged with ``p`` through the pivot edge."""
    rooted = loop.rotate(at)
    e = rooted.edges[0]
    target = e.reverse() if mode == "negative" else e
    pl = Loop.from_edges(plaquette_boundary(p))
    return merge(rooted, 0, pl, pl.edges.index(target), mode)


def bad_set(
    loop: Loop,
    at: int,
    mode: str,
    p: OrientedPlaquette,
    K: PlaquetteAssignment,
    budget: int | None = DEFAULT_BUDGET,
) -> list[EmbeddedMap]:
    """Maps of ``NPM(loop -/+ p, K \\ p)`` carrying the obstructing blue-face chain over the pivot edge."""
    e = loop.edges[at]
    new_loop = deformed(loop, at, mode, p)
    pred = is_bad_negative if mode == "negative" else is_bad_positive
    return [m for m in enumerate_class(new_loop, K.remove(p), "NPM", budget) if pred(m, e)]


# --- PPS structure verification ------------------------------------------------------------


@dataclass
class PPSReport:
    loop: Loop
    K: PlaquetteAssignment
    at: int
    errors: list[str] = field(default_factory=list)
    bad_negative: int = 0
    bad_positive: int = 0
    n_maps: int = 0

    @property
    def ok(self) -> bool:
        return not self.errors


def _split_targets(pairs: list[tuple[Loop, Loop]], positions: list[int], K: PlaquetteAssignment, budget) -> set:
    out = set()
    for (l1, l2), j in zip(pairs, positions):
        for k1, k2 in decompositions(K):
            for m1 in enumerate_class(l1, k1, "NPM", budget):
                for m2 in enumerate_class(l2, k2, "NPM", budget):
                    out.add((j, m1.canonical_code(), m2.canonical_code()))
    return out


def verify_pps(loop: Loop, K: PlaquetteAssignment, at: int = 0, budget: int | None = DEFAULT_BUDGET) -> PPSReport:
    """Check the PPS step on every map of ``NPM(loop, K)`` by double enumeration.

    Splittings must be bijections onto the split classes; deformations must
    be injective with image exactly the deformed class minus its bad set; the
    weight relations must hold per step; and the bad sets must cancel.
    """
    rooted = loop.rotate(at)
    rep = PPSReport(loop, K, at)
    err = rep.errors.append
    e = rooted.edges[0]
    maps = enumerate_class(rooted, K, "NPM", budget)
    rep.n_maps = len(maps)
    neg_def: dict[OrientedPlaquette, list[bytes]] = {}
    pos_def: dict[OrientedPlaquette, list[bytes]] = {}
    neg_split: list = []
    pos_split: list = []
    for m in maps:
        outs = pps_step(m)
        for msg in pps_weight_relations(m, outs):
            err(msg)
        for oc in outs:
            codes = tuple(x.canonical_code() for x in oc.maps)
            if oc.case == "1a":
                neg_def.setdefault(oc.plaquette, []).append(codes[0])
            elif oc.case == "2a":
                pos_def.setdefault(oc.plaquette, []).append(codes[0])
            elif oc.case == "1b":
                neg_split.append((oc.position,) + codes)
            else:
                pos_split.append((oc.position,) + codes)
    # splittings
    for name, got, pairs_fn in (
        ("negative", neg_split, negative_splittings),
        ("positive", pos_split, positive_splittings),
    ):
        pairs = pairs_fn(rooted, 0)
        target_edge = e.reverse() if name == "negative" else e
        positions = [j for j in range(1, len(rooted)) if rooted.edges[j] == target_edge]
        want = _split_targets(pairs, positions, K, budget)
        if len(set(got)) != len(got):
            err(f"{name} splitting is not injective")
        if set(got) != want:
            err(f"{name} splitting image differs from the split class ({len(set(got))} vs {len(want)})")
    # deformations
    bad_sums = {}
    for mode, got, plaqs in (
        ("negative", neg_def, plaquettes_containing(e.reverse())),
        ("positive", pos_def, plaquettes_containing(e)),
    ):
        total = 0
        for p in plaqs:
            if K.get(p, 0) == 0:
                if p in got:
                    err(f"{mode} deformation by {p} outside K")
                continue
            image = got.get(p, [])
            if len(set(image)) != len(image):
                err(f"{mode} deformation by {p} is not injective")
            target = enumerate_class(deformed(rooted, 0, mode, p), K.remove(p), "NPM", budget)
            bad = bad_set(rooted, 0, mode, p, K, budget)
            bad_codes = {m.canonical_code() for m in bad}
            good = {m.canonical_code() for m in target} - bad_codes
            if set(image) != good:
                err(f"{mode} deformation by {p}: image {len(set(image))} != class minus bad {len(good)}")
            total += sum(weight_infinity(m) for m in bad)
        bad_sums[mode] = total
    rep.bad_negative, rep.bad_positive = bad_sums["negative"], bad_sums["positive"]
    if rep.bad_negative != rep.bad_positive:
        err(f"bad-set sums differ: {rep.bad_negative} != {rep.bad_positive}")
    return rep
