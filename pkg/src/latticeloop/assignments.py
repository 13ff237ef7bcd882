"""Plaquette assignments: finite multisets of oriented plaquettes.

Also holds the loop-connectivity test and the bounded enumeration of balanced,
loop-connected assignments around a loop.
"""

from __future__ import annotations

import itertools
import json
from collections.abc import Mapping
from typing import Any, Iterable, Iterator, Sequence

from .lattice import OrientedEdge, OrientedPlaquette, Vertex, check_plaquette, square_edges, squares_containing
from .loops import Loop, edge_flux

Square = tuple[Vertex, tuple[int, int]]


class PlaquetteAssignment(Mapping):
    """Immutable map from oriented plaquettes to positive counts."""

    __slots__ = ("_items", "_map", "_hash")

    def __init__(self, entries: Mapping[OrientedPlaquette, int] | Iterable[tuple[OrientedPlaquette, int]] = ()):
        acc: dict[OrientedPlaquette, int] = {}
        pairs = entries.items() if isinstance(entries, Mapping) else entries
        for p, k in pairs:
            if k < 0:
                raise ValueError(f"negative count {k} for {p}")
            if k:
                if p not in acc:
                    check_plaquette(p)
                acc[p] = acc.get(p, 0) + k
        self._items = tuple(sorted(acc.items()))
        self._map = dict(self._items)
        self._hash = None

    @classmethod
    def of(cls, *plaquettes: OrientedPlaquette) -> PlaquetteAssignment:
        return cls((p, 1) for p in plaquettes)

    def __getitem__(self, p: OrientedPlaquette) -> int:
        return self._map[p]

    def get(self, p, default=0):
        return self._map.get(p, default)

    def __iter__(self) -> Iterator[OrientedPlaquette]:
        return (p for p, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, p: object) -> bool:
        return p in self._map

    def items(self):
        return self._items

    def __eq__(self, other: object) -> bool:
        if isinstance(other, PlaquetteAssignment):
            return self._items == other._items
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._items)
        return self._hash

    def __lt__(self, other: PlaquetteAssignment) -> bool:
        return (self.area, self._items) < (other.area, other._items)

    def __repr__(self) -> str:
        inner = ", ".join(f"{_short(p)}:{k}" for p, k in self._items)
        return f"K{{{inner}}}"

    @property
    def area(self) -> int:
        return sum(k for _, k in self._items)

    def __add__(self, other: PlaquetteAssignment) -> PlaquetteAssignment:
        return PlaquetteAssignment(list(self._items) + list(other._items))

    def __sub__(self, other: PlaquetteAssignment) -> PlaquetteAssignment:
        out = dict(self._map)
        for p, k in other._items:
            if out.get(p, 0) < k:
                raise ValueError(f"cannot remove {k} copies of {p}")
            out[p] -= k
        return PlaquetteAssignment(out)

    def remove(self, p: OrientedPlaquette) -> PlaquetteAssignment:
        if self._map.get(p, 0) < 1:
            raise ValueError(f"{p} is not in the assignment")
        out = dict(self._map)
        out[p] -= 1
        return PlaquetteAssignment(out)

    def translate(self, offset: Sequence[int]) -> PlaquetteAssignment:
        return PlaquetteAssignment((p.translate(offset), k) for p, k in self._items)

    def support_squares(self) -> set[Square]:
        return {p.square for p in self._map}

    def to_json(self) -> list[dict[str, Any]]:
        return [dict(p.to_json(), count=k) for p, k in self._items]

    @classmethod
    def from_json(cls, data: Iterable[dict[str, Any]]) -> PlaquetteAssignment:
        return cls((OrientedPlaquette.from_json(d), int(d.get("count", 1))) for d in data)

    @classmethod
    def loads(cls, text: str) -> PlaquetteAssignment:
        return cls.from_json(json.loads(text))


EMPTY = PlaquetteAssignment()


def _short(p: OrientedPlaquette) -> str:
    return f"{p.base}{p.axes}{'+' if p.sign > 0 else '-'}"


def area(K: PlaquetteAssignment) -> int:
    return K.area


def remove(K: PlaquetteAssignment, p: OrientedPlaquette) -> PlaquetteAssignment:
    return K.remove(p)


def decompositions(K: PlaquetteAssignment) -> Iterator[tuple[PlaquetteAssignment, PlaquetteAssignment]]:
    """All ordered pairs ``(K1, K2)`` with ``K1 + K2 = K``; ``prod(K(p) + 1)`` of them."""
    items = K.items()
    for counts in itertools.product(*(range(k + 1) for _, k in items)):
        k1 = PlaquetteAssignment((p, c) for (p, _), c in zip(items, counts))
        k2 = PlaquetteAssignment((p, k - c) for (p, k), c in zip(items, counts))
        yield k1, k2


# --- connectivity -------------------------------------------------------------------


def square_neighbours(sq: Square) -> list[Square]:
    """Squares sharing an edge with ``sq``."""
    out = set()
    for e in square_edges(sq):
        out.update(squares_containing(e))
    out.discard(sq)
    return sorted(out)


def loop_edge_set(loops: Iterable[Loop]) -> set[OrientedEdge]:
    return {e.positive() for l in loops for e in l.edges}


def is_ell_connected(loop: Loop | Iterable[Loop], K: PlaquetteAssignment) -> bool:
    """Every connected component of the support of ``K`` shares an edge with the loop."""
    support = K.support_squares()
    if not support:
        return True
    loops = [loop] if isinstance(loop, Loop) else list(loop)
    ledges = loop_edge_set(loops)
    touching = [sq for sq in support if any(e in ledges for e in square_edges(sq))]
    seen = set(touching)
    stack = list(touching)
    while stack:
        sq = stack.pop()
        for nb in square_neighbours(sq):
            if nb in support and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(support)


# --- enumeration --------------------------------------------------------------------


def _connected_supports(loop: Loop, max_size: int) -> Iterator[frozenset[Square]]:
    """Non-empty square sets of size at most ``max_size`` with every component touching ``loop``.

    Connected-subset enumeration rooted at a virtual vertex adjacent to every
    square through a loop edge; include/exclude branching on the frontier
    yields each set exactly once.
    """
    root_nbrs = sorted({sq for e in loop_edge_set([loop]) for sq in squares_containing(e)})

    def rec(current: frozenset, ext: list, forbidden: set) -> Iterator[frozenset]:
        if current:
            yield current
        if len(current) == max_size:
            return
        ext = list(ext)
        forbidden = set(forbidden)
        while ext:
            v = ext.pop()
            new_current = current | {v}
            known = set(ext) | new_current | forbidden
            grow = [u for u in square_neighbours(v) if u not in known]
            yield from rec(new_current, ext + grow, forbidden)
            forbidden.add(v)

    yield from rec(frozenset(), root_nbrs, set())


def _assign_counts(loop: Loop, squares: list[Square], budget: int) -> Iterator[PlaquetteAssignment]:
    """Counts ``(a, b)`` for ``(p, p^{-1})`` on each square, each square used, balanced with ``loop``."""
    flux = edge_flux(loop)
    sq_edges = [square_edges(sq) for sq in squares]
    # orientation of each square's positive plaquette along its edges
    orient = []
    for sq in squares:
        p = OrientedPlaquette(sq[0], sq[1], 1)
        orient.append({e.positive(): e.sign for e in p.boundary()})
    last_use: dict[OrientedEdge, int] = {}
    for idx, edges in enumerate(sq_edges):
        for e in edges:
            last_use[e] = idx
    # edges of the loop not on any square cannot be balanced
    for e, v in flux.items():
        if v and e not in last_use:
            return
    closing = [[] for _ in squares]
    for e, idx in last_use.items():
        closing[idx].append(e)
    n = len(squares)
    cur = dict(flux)
    counts: list[tuple[int, int]] = []

    def rec(idx: int, left: int) -> Iterator[PlaquetteAssignment]:
        if idx == n:
            entries = []
            for sq, (a, b) in zip(squares, counts):
                if a:
                    entries.append((OrientedPlaquette(sq[0], sq[1], 1), a))
                if b:
                    entries.append((OrientedPlaquette(sq[0], sq[1], -1), b))
            yield PlaquetteAssignment(entries)
            return
        reserve = n - idx - 1
        for total in range(1, left - reserve + 1):
            for a in range(total + 1):
                b = total - a
                net = a - b
                for e, o in orient[idx].items():
                    cur[e] = cur.get(e, 0) + o * net
                if all(cur.get(e, 0) == 0 for e in closing[idx]):
                    counts.append((a, b))
                    yield from rec(idx + 1, left - total)
                    counts.pop()
                for e, o in orient[idx].items():
                    cur[e] -= o * net

    yield from rec(0, budget)


def enumerate_balanced_assignments(loop: Loop, a_max: int, exact_area: int | None = None) -> list[PlaquetteAssignment]:
    """Balanced, loop-connected assignments with ``1 <= area <= a_max``, sorted by (area, entries)."""
    if loop.is_null:
        raise ValueError("loop must be non-null")
    out = set()
    for support in _connected_supports(loop, a_max):
        for K in _assign_counts(loop, sorted(support), a_max):
            if exact_area is None or K.area == exact_area:
                out.add(K)
    return sorted(out)
