"""Pinching of blue faces and the cancellation identities built on it.

A vertex of a blue face ``B = (c_0, c_1, ..., c_{2k-1})`` (counter-clockwise
sides) is addressed by the side whose tail corner it is, or by its position
``a`` in that cycle.  Vertices at even and odd positions form the two partite
classes.  Pinching ``c_a`` with ``c_b`` redirects ``sigma(c_{a-1}) = c_b`` and
``sigma(c_{b-1}) = c_a``, splitting ``B`` into two faces sharing one vertex.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

from . import maps as _maps
from .maps import EmbeddedMap, UnionFind, is_non_separable, weight_infinity


class Pinching(NamedTuple):
    """Identify the tail corners of sides ``u`` and ``v`` of blue face ``face``."""

    face: int
    u: int
    v: int


def face_cycle(m: EmbeddedMap, face: int) -> list[int]:
    return m.blue_faces[face]


def has_disjoint_vertices(m: EmbeddedMap, face: int) -> bool:
    cyc = face_cycle(m, face)
    return len({m.vertex_of[s] for s in cyc}) == len(cyc)


def pinch(m: EmbeddedMap, u: int | Pinching, v: int | None = None) -> EmbeddedMap:
    """Pinch the tail corners of sides ``u`` and ``v`` (same blue face, same class)."""
    if isinstance(u, Pinching):
        u, v = u.u, u.v
    assert v is not None
    if u == v:
        raise ValueError("cannot pinch a vertex with itself")
    if m.blue_face_of[u] != m.blue_face_of[v]:
        raise ValueError("pinched sides lie on different blue faces")
    if m.labels[u] != m.labels[v]:
        raise ValueError("pinched vertices belong to different classes")
    sigma = list(m.blue)
    binv = m.blue_inv
    sigma[binv[u]] = v
    sigma[binv[v]] = u
    return EmbeddedMap(m.loops, m.labels, m.yellow, tuple(sigma), m.owner)


def single_vertex_pinch_set(m: EmbeddedMap, face: int, v: int) -> list[EmbeddedMap]:
    """All maps obtained by pinching the tail corner of side ``v`` with another same-class vertex of ``face``."""
    cyc = face_cycle(m, face)
    if len(cyc) < 4:
        raise ValueError("single-vertex pinching needs a blue face of degree at least 4")
    if not has_disjoint_vertices(m, face):
        raise ValueError("blue face does not have disjoint vertices")
    a = cyc.index(v)
    return [pinch(m, v, cyc[(a + 2 * h) % len(cyc)]) for h in range(1, len(cyc) // 2)]


# --- collections -------------------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    """``status`` is ``"feasible"``, ``"resolved"`` or ``"non_feasible"``.

    ``blocks`` are the vertex groups (cycle positions) identified by the
    feasible or resolved collection; ``collection`` lists one pinching chain
    per block.
    """

    status: str
    blocks: tuple[tuple[int, ...], ...] = ()
    collection: tuple[Pinching, ...] = ()


def _cross(a: Sequence[int], b: Sequence[int]) -> bool:
    for a1, a2 in itertools.combinations(sorted(a), 2):
        inside = [x for x in b if a1 < x < a2]
        if inside and len(inside) < len(b):
            return True
    return False


def classify_collection(m: EmbeddedMap, face: int, pinchings: Sequence[Pinching]) -> Classification:
    """Resolve crossing same-class pinchings into one block; crossing opposite-class ones are non-feasible."""
    cyc = face_cycle(m, face)
    pos = {s: i for i, s in enumerate(cyc)}
    uf = UnionFind(len(cyc))
    for pn in pinchings:
        if pn.face != face or pn.u not in pos or pn.v not in pos:
            raise ValueError(f"{pn} is not on face {face}")
        a, b = pos[pn.u], pos[pn.v]
        if a == b or (a - b) % 2:
            raise ValueError(f"{pn} pinches a vertex with itself or across classes")
        uf.union(a, b)
    resolved = False
    while True:
        groups: dict[int, list[int]] = {}
        for i in range(len(cyc)):
            groups.setdefault(uf.find(i), []).append(i)
        blocks = [g for g in groups.values() if len(g) > 1]
        merged = False
        for x, y in itertools.combinations(blocks, 2):
            if x[0] % 2 == y[0] % 2 and _cross(x, y):
                uf.union(x[0], y[0])
                merged = resolved = True
                break
        if not merged:
            break
    for x, y in itertools.combinations(blocks, 2):
        if _cross(x, y):
            return Classification("non_feasible")
    blocks_t = tuple(sorted(tuple(sorted(b)) for b in blocks))
    chain = tuple(
        Pinching(face, cyc[b[i]], cyc[b[i + 1]]) for b in blocks_t for i in range(len(b) - 1)
    )
    return Classification("resolved" if resolved else "feasible", blocks_t, chain)


def apply_blocks(m: EmbeddedMap, face: int, blocks: Sequence[Sequence[int]]) -> EmbeddedMap:
    """Pinch together each block of cycle positions (a non-crossing monochromatic partition)."""
    cyc = face_cycle(m, face)
    n = len(cyc)
    sigma = list(m.blue)
    for block in blocks:
        b = sorted(block)
        for i, a in enumerate(b):
            sigma[cyc[(a - 1) % n]] = cyc[b[i - 1]]
    return EmbeddedMap(m.loops, m.labels, m.yellow, tuple(sigma), m.owner)


def apply_collection(m: EmbeddedMap, face: int, pinchings: Sequence[Pinching]) -> EmbeddedMap:
    c = classify_collection(m, face, pinchings)
    if c.status == "non_feasible":
        raise ValueError("pinching collection is not feasible")
    return apply_blocks(m, face, c.blocks)


def noncrossing_partitions(positions: Sequence[int]) -> Iterator[list[tuple[int, ...]]]:
    """Non-crossing partitions of ``positions`` (in cyclic order) into same-parity blocks."""
    if not positions:
        yield []
        return
    first, rest = positions[0], list(positions[1:])
    same = [x for x in rest if x % 2 == first % 2]
    for r in range(len(same) + 1):
        for chosen in itertools.combinations(same, r):
            block = (first,) + chosen
            cuts = list(chosen)
            segments = []
            prev = first
            for c in cuts + [None]:
                segments.append([x for x in rest if x > prev and (c is None or x < c)])
                prev = c if c is not None else prev
            for parts in itertools.product(*(list(noncrossing_partitions(seg)) for seg in segments)):
                out = [block]
                for p in parts:
                    out.extend(p)
                yield out


@dataclass
class CollectionResult:
    valid: list[EmbeddedMap]
    invalid: list[EmbeddedMap]


def all_collections(m: EmbeddedMap, face: int) -> CollectionResult:
    """Every feasible collection on ``face`` applied once, split into non-separable and separable results."""
    if not has_disjoint_vertices(m, face):
        raise ValueError("blue face does not have disjoint vertices")
    n = len(face_cycle(m, face))
    seen: dict[bytes, EmbeddedMap] = {}
    for part in noncrossing_partitions(list(range(n))):
        blocks = [b for b in part if len(b) > 1]
        res = apply_blocks(m, face, blocks)
        seen.setdefault(res.canonical_code(), res)
    valid, invalid = [], []
    for code in sorted(seen):
        res = seen[code]
        (valid if is_non_separable(res) else invalid).append(res)
    return CollectionResult(valid, invalid)


def other_faces_weight(m: EmbeddedMap, face: int) -> int:
    w = 1
    for i, f in enumerate(m.blue_faces):
        if i != face:
            w *= _maps.blue_weight(len(f) // 2)
    return w


def invalid_pinchings(m: EmbeddedMap, face: int) -> list[Pinching]:
    """Single pinchings on ``face`` whose result is separable."""
    cyc = face_cycle(m, face)
    out = []
    for a, b in itertools.combinations(range(len(cyc)), 2):
        if (a - b) % 2 == 0:
            pn = Pinching(face, cyc[a], cyc[b])
            if not is_non_separable(pinch(m, pn)):
                out.append(pn)
    return out


def arcs(m: EmbeddedMap, face: int) -> set[tuple[int, int]]:
    """Same-class position pairs on ``face`` joined by a chain of blue faces over one other lattice edge."""
    cyc = face_cycle(m, face)
    own = m.blue_edge(face)
    verts = [m.vertex_of[s] for s in cyc]
    by_edge: dict = {}
    for i in range(len(m.blue_faces)):
        e = m.blue_edge(i)
        if e != own:
            by_edge.setdefault(e, []).append(i)
    out = set()
    nv = m.n_vertices
    for faces in by_edge.values():
        uf = UnionFind(nv + len(faces))
        for k, f in enumerate(faces):
            for s in m.blue_faces[f]:
                uf.union(nv + k, m.vertex_of[s])
        touched = {uf.find(nv + k) for k in range(len(faces))}
        for a, b in itertools.combinations(range(len(cyc)), 2):
            if (a - b) % 2 == 0 and uf.find(verts[a]) == uf.find(verts[b]) and uf.find(verts[a]) in touched:
                out.add((a, b))
    return out


@dataclass
class FaceCheck:
    """Outcome of the pinching identities on one blue face."""

    single_vertex: bool | None
    all_collections: bool
    dichotomy: bool
    has_invalid: bool
    arcs_ok: bool


def check_face(m: EmbeddedMap, face: int) -> FaceCheck:
    """Run the single-vertex identity, the all-collections identity and the valid/invalid dichotomy."""
    cyc = face_cycle(m, face)
    w = weight_infinity(m)
    single_vertex = None
    if len(cyc) >= 4:
        single_vertex = all(
            w + sum(weight_infinity(x) for x in single_vertex_pinch_set(m, face, v)) == 0 for v in cyc
        )
    res = all_collections(m, face)
    const = other_faces_weight(m, face)
    total = sum(weight_infinity(x) for x in res.valid + res.invalid)
    collections_ok = total == const
    inv = invalid_pinchings(m, face)
    valid_sum = sum(weight_infinity(x) for x in res.valid)
    if inv:
        dichotomy = valid_sum == 0
    else:
        dichotomy = valid_sum == const and not res.invalid
    a = arcs(m, face)
    arcs_ok = (not inv) or bool(a)
    return FaceCheck(single_vertex, collections_ok, dichotomy, bool(inv), arcs_ok)
