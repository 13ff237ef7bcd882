"""Lattice loops and strings: parsing, backtrack erasure, splittings, mergers,
deformations, edge counts and canonical forms.

A loop is stored rooted, as a base vertex plus a sequence of signed axis
steps.  Cyclic equivalence only enters through :func:`canonicalize`.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Iterator, NamedTuple, Sequence

from .lattice import (
    OrientedEdge,
    OrientedPlaquette,
    Vertex,
    plaquette_boundary,
    plaquettes_containing,
    translate_vertex,
    unit_step,
)

if TYPE_CHECKING:
    from .assignments import PlaquetteAssignment


class LoopParseError(ValueError):
    """Malformed loop text; ``column`` is 1-based."""

    def __init__(self, message: str, column: int | None = None):
        super().__init__(message if column is None else f"column {column}: {message}")
        self.column = column


@dataclass(frozen=True, slots=True)
class Loop:
    """Closed walk on Z^d.  The null loop has no steps and an empty base."""

    base: Vertex
    steps: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.steps:
            object.__setattr__(self, "base", ())
            return
        d = len(self.base)
        if d < 2:
            raise ValueError("lattice dimension must be at least 2")
        disp = [0] * d
        for s in self.steps:
            if s == 0 or abs(s) > d:
                raise ValueError(f"step {s} out of range for dimension {d}")
            disp[abs(s) - 1] += 1 if s > 0 else -1
        if any(disp):
            raise ValueError("walk does not close")

    @classmethod
    def from_edges(cls, edges: Sequence[OrientedEdge]) -> Loop:
        if not edges:
            return NULL_LOOP
        for a, b in zip(edges, list(edges[1:]) + [edges[0]]):
            if a.head != b.tail:
                raise ValueError("edges do not form a closed walk")
        return cls(edges[0].tail, tuple(e.step for e in edges))

    @classmethod
    def parse(cls, text: str, dim: int) -> Loop:
        """Parse ``"[@x,y,...] +1 +2 -1 -2"``; the default base is the origin."""
        base: Vertex = (0,) * dim
        steps = []
        for m in re.finditer(r"\S+", text):
            tok, col = m.group(), m.start() + 1
            if tok.startswith("@"):
                if steps:
                    raise LoopParseError("base prefix must come first", col)
                try:
                    base = tuple(int(x) for x in tok[1:].split(","))
                except ValueError:
                    raise LoopParseError(f"bad base vertex {tok!r}", col) from None
                if len(base) != dim:
                    raise LoopParseError(f"base has {len(base)} coordinates, expected {dim}", col)
                continue
            if not re.fullmatch(r"[+-][1-9][0-9]*", tok):
                raise LoopParseError(f"bad step token {tok!r}", col)
            step = int(tok)
            if abs(step) > dim:
                raise LoopParseError(f"axis {abs(step)} exceeds dimension {dim}", col)
            steps.append(step)
        if not steps:
            raise LoopParseError("empty loop")
        try:
            return cls(base, tuple(steps))
        except ValueError as exc:
            raise LoopParseError(str(exc)) from None

    @property
    def is_null(self) -> bool:
        return not self.steps

    @property
    def dim(self) -> int:
        return len(self.base)

    def __len__(self) -> int:
        return len(self.steps)

    def vertices(self) -> list[Vertex]:
        """Tail of each edge, in order."""
        out = []
        v = self.base
        for s in self.steps:
            out.append(v)
            v = unit_step(v, abs(s), 1 if s > 0 else -1)
        return out

    @property
    def edges(self) -> tuple[OrientedEdge, ...]:
        return tuple(
            OrientedEdge(v, abs(s), 1 if s > 0 else -1) for v, s in zip(self.vertices(), self.steps)
        )

    def edge(self, i: int) -> OrientedEdge:
        return self.edges[i]

    def rotate(self, k: int) -> Loop:
        """Same cycle, rooted at edge ``k``."""
        if self.is_null:
            return self
        k %= len(self.steps)
        return Loop(self.vertices()[k], self.steps[k:] + self.steps[:k])

    def translate(self, offset: Sequence[int]) -> Loop:
        if self.is_null:
            return self
        return Loop(translate_vertex(self.base, offset), self.steps)

    def inverse(self) -> Loop:
        return Loop.from_edges([e.reverse() for e in reversed(self.edges)])

    def tokens(self) -> list[str]:
        return [f"{s:+d}" for s in self.steps]

    def text(self, with_base: bool = True) -> str:
        toks = " ".join(self.tokens())
        if with_base and self.base and any(self.base):
            return "@" + ",".join(map(str, self.base)) + " " + toks
        return toks

    def __str__(self) -> str:
        return self.text() if self.steps else "<null>"


NULL_LOOP = Loop((), ())


def plaquette_loop(p: OrientedPlaquette) -> Loop:
    return Loop.from_edges(plaquette_boundary(p))


class EdgePosition(NamedTuple):
    """A specific edge copy: loop index within a string and edge index within the loop."""

    loop: int
    index: int


class StringOfLoops:
    """Multiset of loops; null members are dropped unless nothing else remains."""

    __slots__ = ("loops",)

    def __init__(self, loops: Iterable[Loop] = ()):
        kept = tuple(l for l in loops if not l.is_null)
        self.loops: tuple[Loop, ...] = kept

    def __iter__(self) -> Iterator[Loop]:
        return iter(self.loops)

    def __len__(self) -> int:
        return len(self.loops)

    def __getitem__(self, i: int) -> Loop:
        return self.loops[i]

    @property
    def is_null(self) -> bool:
        return not self.loops

    def edge_at(self, pos: EdgePosition) -> OrientedEdge:
        return self.loops[pos.loop].edges[pos.index]

    def _multiset(self) -> tuple:
        return tuple(sorted((l.base, l.steps) for l in self.loops))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, StringOfLoops) and self._multiset() == other._multiset()

    def __hash__(self) -> int:
        return hash(self._multiset())

    def __repr__(self) -> str:
        return f"StringOfLoops({[str(l) for l in self.loops]})"


def as_string(s: Loop | StringOfLoops | Iterable[Loop]) -> StringOfLoops:
    if isinstance(s, StringOfLoops):
        return s
    if isinstance(s, Loop):
        return StringOfLoops([s])
    return StringOfLoops(s)


# --- backtracks -----------------------------------------------------------------


def erase_backtracks(loop: Loop) -> Loop:
    """Cyclically remove adjacent pairs ``e e^{-1}`` until none remain."""
    stack: list[OrientedEdge] = []
    for e in loop.edges:
        if stack and stack[-1] == e.reverse():
            stack.pop()
        else:
            stack.append(e)
    lo, hi = 0, len(stack)
    while hi - lo >= 2 and stack[lo] == stack[hi - 1].reverse():
        lo += 1
        hi -= 1
    return Loop.from_edges(stack[lo:hi])


def has_backtrack(loop: Loop) -> bool:
    n = len(loop.steps)
    return any(loop.steps[i] == -loop.steps[(i + 1) % n] for i in range(n)) if n else False


# --- splittings and mergers ---------------------------------------------------------


def _check_position(loop: Loop, at: int) -> None:
    if not 0 <= at < len(loop.steps):
        raise IndexError(f"edge position {at} out of range for loop of length {len(loop.steps)}")


def positive_splittings(loop: Loop, at: int) -> list[tuple[Loop, Loop]]:
    """Split ``e pi2 e' pi3`` (rooted at ``at``) into ``(e pi3, pi2 e')`` for every other copy ``e'``."""
    _check_position(loop, at)
    edges = loop.rotate(at).edges
    e = edges[0]
    out = []
    for j in range(1, len(edges)):
        if edges[j] == e:
            out.append((Loop.from_edges((e,) + edges[j + 1 :]), Loop.from_edges(edges[1 : j + 1])))
    return out


def negative_splittings(loop: Loop, at: int) -> list[tuple[Loop, Loop]]:
    """Split ``e pi2 e^{-1} pi3`` (rooted at ``at``) into ``(pi3, pi2)`` for every copy of ``e^{-1}``."""
    _check_position(loop, at)
    edges = loop.rotate(at).edges
    r = edges[0].reverse()
    out = []
    for j in range(1, len(edges)):
        if edges[j] == r:
            out.append((Loop.from_edges(edges[j + 1 :]), Loop.from_edges(edges[1:j])))
    return out


def merge(loop1: Loop, at1: int, loop2: Loop, at2: int, mode: str) -> Loop:
    """Merge ``pi1 e pi2`` with ``pi3 e' pi4``.

    Positive mode (``e' = e``) gives ``pi1 e pi4 pi3 e' pi2``; negative mode
    (``e' = e^{-1}``) gives ``pi1 pi4 pi3 pi2``.
    """
    _check_position(loop1, at1)
    _check_position(loop2, at2)
    a, b = loop1.edges, loop2.edges
    e, f = a[at1], b[at2]
    pi1, pi2 = a[:at1], a[at1 + 1 :]
    pi3, pi4 = b[:at2], b[at2 + 1 :]
    if mode == "positive":
        if f != e:
            raise ValueError("positive merger needs two copies of the same oriented edge")
        return Loop.from_edges(pi1 + (e,) + pi4 + pi3 + (f,) + pi2)
    if mode == "negative":
        if f != e.reverse():
            raise ValueError("negative merger needs an edge and its reverse")
        return Loop.from_edges(pi1 + pi4 + pi3 + pi2)
    raise ValueError(f"unknown merge mode {mode!r}")


def deformations(loop: Loop, at: int, mode: str, d: int | None = None) -> list[tuple[Loop, OrientedPlaquette]]:
    """Merge ``loop`` at ``at`` with every plaquette through ``e`` (positive) or ``e^{-1}`` (negative)."""
    _check_position(loop, at)
    e = loop.edges[at]
    target = e if mode == "positive" else e.reverse()
    out = []
    for p in plaquettes_containing(target, d):
        pl = plaquette_loop(p)
        out.append((merge(loop, at, pl, pl.edges.index(target), mode), p))
    return out


# --- edge counts and balance --------------------------------------------------------


def edge_counts(s: Loop | StringOfLoops | Iterable[Loop], K: PlaquetteAssignment | None = None) -> Counter:
    """Occurrences of each oriented edge in ``s`` plus the plaquette boundaries of ``K``."""
    c: Counter = Counter()
    for l in as_string(s):
        c.update(l.edges)
    if K is not None:
        for p, k in K.items():
            for e in plaquette_boundary(p):
                c[e] += k
    return c


def n_e(s: Loop | StringOfLoops, K: PlaquetteAssignment | None, e: OrientedEdge) -> int:
    n = sum(l.edges.count(e) for l in as_string(s))
    if K is not None:
        n += sum(K.get(p, 0) for p in plaquettes_containing(e))
    return n


def edge_flux(s: Loop | StringOfLoops | Iterable[Loop], K: PlaquetteAssignment | None = None) -> dict:
    """Net count ``n_e - n_{e^{-1}}`` per positively oriented edge, zeros dropped."""
    flux: dict = {}
    for e, k in edge_counts(s, K).items():
        key = e.positive()
        flux[key] = flux.get(key, 0) + (k if e.sign > 0 else -k)
    return {e: v for e, v in flux.items() if v}


def is_balanced(s: Loop | StringOfLoops | Iterable[Loop], K: PlaquetteAssignment | None = None) -> bool:
    return not edge_flux(s, K)


# --- canonical form -----------------------------------------------------------------


class CanonicalLoop(NamedTuple):
    """Translation and rotation normal form: ``loop.rotate(rotation).translate(-offset)`` has steps ``steps``."""

    steps: tuple[int, ...]
    rotation: int
    offset: Vertex


def canonicalize(loop: Loop) -> CanonicalLoop:
    """Lexicographically least step sequence over rotations; its first edge is the pivot."""
    st = loop.steps
    n = len(st)
    if n == 0:
        return CanonicalLoop((), 0, ())
    best_r = min(range(n), key=lambda r: st[r:] + st[:r])
    return CanonicalLoop(st[best_r:] + st[:best_r], best_r, loop.vertices()[best_r])
