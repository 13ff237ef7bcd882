"""Embedded maps: combinatorial surfaces glued from yellow polygons through blue faces.

Representation
--------------
Every map edge separates one yellow face from one blue face, so map edges are
in bijection with the *sides* of the yellow polygons.  A map is stored as

* ``labels[s]``: the oriented lattice edge of side ``s`` read clockwise around
  its yellow face (equivalently counter-clockwise around its blue face);
* ``yellow[s]``: the clockwise successor of ``s`` in its yellow face;
* ``blue[s]``: the counter-clockwise successor of ``s`` in its blue face;
* ``owner[s]``: ``("L", i, j)`` for position ``j`` of boundary loop ``i`` or
  ``("P", p, c)`` for copy ``c`` of plaquette ``p``.

The tail corner of ``yellow[s]`` and the tail corner of ``blue[s]`` are the
same map vertex (both equal the head of ``s``), so vertices are the classes of
tail corners under ``yellow[s] ~ blue[s]``.  A half-edge view with explicit
partner darts is available through :meth:`EmbeddedMap.to_darts`.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, NamedTuple, Sequence

import networkx as nx

from .assignments import PlaquetteAssignment
from .lattice import OrientedEdge, OrientedPlaquette, Vertex, plaquette_boundary
from .loops import NULL_LOOP, Loop, StringOfLoops, as_string


# --- weights --------------------------------------------------------------------------


def catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def blue_weight(i: int) -> int:
    """Large-N weight of a blue face of degree ``2i``: ``(-1)^(i-1) Cat(i-1)``."""
    if i < 1:
        raise ValueError("half-degree must be positive")
    return (-1) ** (i - 1) * catalan(i - 1)


def mobius(cycle_type: Iterable[int]) -> int:
    """Product of ``blue_weight`` over the cycle lengths of a permutation."""
    out = 1
    for c in cycle_type:
        out *= blue_weight(c)
    return out


# --- union-find -------------------------------------------------------------------------


class UnionFind:
    __slots__ = ("parent",)

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra < rb:
            ra, rb = rb, ra
        self.parent[ra] = rb
        return True

    def labels(self) -> tuple[list[int], int]:
        """Dense class index per element, and the number of classes."""
        ids: dict[int, int] = {}
        out = []
        for x in range(len(self.parent)):
            out.append(ids.setdefault(self.find(x), len(ids)))
        return out, len(ids)


def cycles(perm: Sequence[int]) -> list[list[int]]:
    seen = [False] * len(perm)
    out = []
    for s in range(len(perm)):
        if not seen[s]:
            cyc = []
            t = s
            while not seen[t]:
                seen[t] = True
                cyc.append(t)
                t = perm[t]
            out.append(cyc)
    return out


# --- topology record ------------------------------------------------------------------


class MapTopology(NamedTuple):
    V: int
    E: int
    F_internal: int
    chi: int
    genus: tuple[int, ...]
    b: int
    c: int
    eta: int

    @property
    def is_disk(self) -> bool:
        return self.c == 1 and self.b == 1 and self.genus == (0,)


# --- half-edge view ---------------------------------------------------------------------


@dataclass(frozen=True)
class Dart:
    id: int
    next_in_face: int
    partner: int
    label: OrientedEdge


FACE_TAGS = ("blue", "yellow", "external-yellow", "external-blue")


@dataclass(frozen=True)
class DartSystem:
    """Darts with counter-clockwise face successors; ``face_tags[d]`` tags the face of dart ``d``."""

    darts: tuple[Dart, ...]
    face_tags: tuple[str, ...]

    def faces(self) -> list[list[int]]:
        return cycles([d.next_in_face for d in self.darts])


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return self.ok


# --- the map ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EmbeddedMap:
    loops: tuple[Loop, ...]
    labels: tuple[OrientedEdge, ...]
    yellow: tuple[int, ...]
    blue: tuple[int, ...]
    owner: tuple[tuple, ...]

    @property
    def n_sides(self) -> int:
        return len(self.labels)

    @cached_property
    def yellow_inv(self) -> tuple[int, ...]:
        inv = [0] * self.n_sides
        for s, t in enumerate(self.yellow):
            inv[t] = s
        return tuple(inv)

    @cached_property
    def blue_inv(self) -> tuple[int, ...]:
        inv = [0] * self.n_sides
        for s, t in enumerate(self.blue):
            inv[t] = s
        return tuple(inv)

    @cached_property
    def blue_faces(self) -> list[list[int]]:
        """Blue faces as counter-clockwise side cycles, each starting at its smallest side."""
        return cycles(self.blue)

    @cached_property
    def yellow_faces(self) -> list[list[int]]:
        return cycles(self.yellow)

    @cached_property
    def blue_face_of(self) -> list[int]:
        out = [0] * self.n_sides
        for i, f in enumerate(self.blue_faces):
            for s in f:
                out[s] = i
        return out

    @cached_property
    def yellow_face_of(self) -> list[int]:
        out = [0] * self.n_sides
        for i, f in enumerate(self.yellow_faces):
            for s in f:
                out[s] = i
        return out

    @cached_property
    def _vertices(self) -> tuple[list[int], int]:
        uf = UnionFind(self.n_sides)
        for s in range(self.n_sides):
            uf.union(self.yellow[s], self.blue[s])
        return uf.labels()

    @property
    def vertex_of(self) -> list[int]:
        """Map vertex at the tail corner of each side."""
        return self._vertices[0]

    def head_vertex(self, s: int) -> int:
        return self.vertex_of[self.yellow[s]]

    @property
    def n_vertices(self) -> int:
        return self._vertices[1]

    @cached_property
    def _components(self) -> tuple[list[int], int]:
        uf = UnionFind(self.n_sides)
        for s in range(self.n_sides):
            uf.union(s, self.yellow[s])
            uf.union(s, self.blue[s])
        return uf.labels()

    def is_external(self, s: int) -> bool:
        return self.owner[s][0] == "L"

    @cached_property
    def loop_roots(self) -> list[int | None]:
        """Side at position 0 of each boundary loop (``None`` for the null loop)."""
        roots: list[int | None] = [None] * len(self.loops)
        for s, o in enumerate(self.owner):
            if o[0] == "L" and o[2] == 0:
                roots[o[1]] = s
        return roots

    @cached_property
    def assignment(self) -> PlaquetteAssignment:
        counts: dict[OrientedPlaquette, int] = {}
        for f in self.yellow_faces:
            o = self.owner[f[0]]
            if o[0] == "P":
                counts[o[1]] = counts.get(o[1], 0) + 1
        return PlaquetteAssignment(counts)

    @property
    def area(self) -> int:
        return self.assignment.area

    @property
    def boundary(self) -> StringOfLoops:
        return StringOfLoops(self.loops)

    def blue_edge(self, face: int) -> OrientedEdge:
        """Unoriented lattice edge (positive representative) of a blue face."""
        return self.labels[self.blue_faces[face][0]].positive()

    # --- invariants ---

    def topology(self) -> MapTopology:
        n = self.n_sides
        comp, nc = self._components
        vcomp = {}
        for s in range(n):
            vcomp[self.vertex_of[s]] = comp[s]
        V = [0] * nc
        for c in vcomp.values():
            V[c] += 1
        E = [0] * nc
        for s in range(n):
            E[comp[s]] += 1
        F = [0] * nc
        b = [0] * nc
        for f in self.blue_faces:
            F[comp[f[0]]] += 1
        for f in self.yellow_faces:
            if self.is_external(f[0]):
                b[comp[f[0]]] += 1
            else:
                F[comp[f[0]]] += 1
        genus = []
        for i in range(nc):
            chi_i = V[i] - E[i] + F[i]
            g2 = 2 - b[i] - chi_i
            if g2 < 0 or g2 % 2:
                raise ValueError(f"inconsistent Euler characteristic {chi_i} with {b[i]} boundaries")
            genus.append(g2 // 2)
        chi = sum(V) - n + sum(F)
        return MapTopology(sum(V), n, sum(F), chi, tuple(genus), sum(b), nc, chi - sum(b))

    @property
    def n_components(self) -> int:
        return self._components[1]

    def weight(self) -> int:
        return weight_infinity(self)

    # --- canonical code ---

    def canonical_code(self) -> bytes:
        return canonical_code(self)

    # --- conversions ---

    def to_darts(self) -> DartSystem:
        darts = []
        tags = []
        yinv = self.yellow_inv
        for s in range(self.n_sides):
            darts.append(Dart(2 * s, 2 * yinv[s], 2 * s + 1, self.labels[s].reverse()))
            tags.append("external-yellow" if self.is_external(s) else "yellow")
            darts.append(Dart(2 * s + 1, 2 * self.blue[s] + 1, 2 * s, self.labels[s]))
            tags.append("blue")
        return DartSystem(tuple(darts), tuple(tags))

    def to_json(self) -> dict[str, Any]:
        ds = self.to_darts()
        return {
            "loops": [l.tokens() for l in self.loops],
            "bases": [list(l.base) for l in self.loops],
            "darts": [
                {
                    "id": d.id,
                    "next": d.next_in_face,
                    "partner": d.partner,
                    "label": d.label.to_json(),
                    "face": tag,
                }
                for d, tag in zip(ds.darts, ds.face_tags)
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"), sort_keys=True)

    # --- construction ---

    @classmethod
    def from_permutations(
        cls,
        labels: dict[int, OrientedEdge],
        yellow: dict[int, int],
        blue: dict[int, int],
        roots: Sequence[int | None],
    ) -> EmbeddedMap:
        """Renumber a side system into standard form.

        ``roots[i]`` is the side at position 0 of boundary loop ``i`` (``None``
        for a null loop).  Every other yellow cycle must be a plaquette.
        """
        order: list[int] = []
        owners: list[tuple] = []
        loops = []
        in_loop = set()
        for i, r in enumerate(roots):
            if r is None:
                loops.append(NULL_LOOP)
                continue
            cyc = [r]
            t = yellow[r]
            while t != r:
                cyc.append(t)
                t = yellow[t]
            loops.append(Loop.from_edges([labels[x] for x in cyc]))
            for j, x in enumerate(cyc):
                order.append(x)
                owners.append(("L", i, j))
                in_loop.add(x)
        faces = []
        seen = set(in_loop)
        for s in sorted(labels):
            if s in seen:
                continue
            cyc = [s]
            t = yellow[s]
            while t != s:
                cyc.append(t)
                t = yellow[t]
            seen.update(cyc)
            p, start = plaquette_of_cycle([labels[x] for x in cyc])
            cyc = cyc[start:] + cyc[:start]
            faces.append((p, min(cyc), cyc))
        faces.sort(key=lambda f: (f[0], f[1]))
        copies: dict[OrientedPlaquette, int] = {}
        for p, _, cyc in faces:
            c = copies.get(p, 0)
            copies[p] = c + 1
            for x in cyc:
                order.append(x)
                owners.append(("P", p, c))
        new = {old: i for i, old in enumerate(order)}
        return cls(
            loops=tuple(loops),
            labels=tuple(labels[x] for x in order),
            yellow=tuple(new[yellow[x]] for x in order),
            blue=tuple(new[blue[x]] for x in order),
            owner=tuple(owners),
        )

    def restricted(self, sides: Iterable[int], roots: Sequence[int | None]) -> EmbeddedMap:
        sides = list(sides)
        return EmbeddedMap.from_permutations(
            {s: self.labels[s] for s in sides},
            {s: self.yellow[s] for s in sides},
            {s: self.blue[s] for s in sides},
            roots,
        )

    def components(self) -> list[EmbeddedMap]:
        """Connected components as separate maps, ordered by their first boundary loop."""
        comp, nc = self._components
        groups: dict[int, list[int]] = {}
        for s in range(self.n_sides):
            groups.setdefault(comp[s], []).append(s)
        out = []
        used = set()
        for r in self.loop_roots:
            if r is None:
                out.append(empty_map())
                continue
            c = comp[r]
            if c in used:
                continue
            used.add(c)
            roots = [x for x in self.loop_roots if x is not None and comp[x] == c]
            out.append(self.restricted(groups[c], roots))
        for c, sides in sorted(groups.items()):
            if c not in used:
                out.append(self.restricted(sides, []))
        return out


def empty_map() -> EmbeddedMap:
    """The map with null boundary and no faces."""
    return EmbeddedMap((NULL_LOOP,), (), (), (), ())


def plaquette_of_cycle(edges: Sequence[OrientedEdge]) -> tuple[OrientedPlaquette, int]:
    """The plaquette traversed by a 4-cycle of edges, and the index of its first boundary edge."""
    if len(edges) != 4:
        raise ValueError(f"internal yellow face of degree {len(edges)}")
    tails = [e.tail for e in edges]
    base = min(tails)
    axes = tuple(sorted({e.axis for e in edges}))
    if len(axes) != 2:
        raise ValueError("yellow face is not a unit square")
    for sign in (1, -1):
        p = OrientedPlaquette(base, axes, sign)  # type: ignore[arg-type]
        bd = plaquette_boundary(p)
        if bd[0] in edges:
            k = list(edges).index(bd[0])
            if list(edges[k:]) + list(edges[:k]) == bd:
                return p, k
    raise ValueError("yellow face labels do not traverse a plaquette")


def disjoint_union(maps: Sequence[EmbeddedMap]) -> EmbeddedMap:
    labels: dict[int, OrientedEdge] = {}
    yellow: dict[int, int] = {}
    blue: dict[int, int] = {}
    roots: list[int | None] = []
    off = 0
    for m in maps:
        for s in range(m.n_sides):
            labels[s + off] = m.labels[s]
            yellow[s + off] = m.yellow[s] + off
            blue[s + off] = m.blue[s] + off
        roots.extend(None if r is None else r + off for r in m.loop_roots)
        off += m.n_sides
    return EmbeddedMap.from_permutations(labels, yellow, blue, roots)


# --- weights and topology as functions ------------------------------------------------


def weight_infinity(m: EmbeddedMap) -> int:
    w = 1
    for f in m.blue_faces:
        w *= blue_weight(len(f) // 2)
    return w


def topology(m: EmbeddedMap) -> MapTopology:
    return m.topology()


# --- canonical code ---------------------------------------------------------------------


def _bfs_code(m: EmbeddedMap, roots: Sequence[int]) -> tuple:
    ids: dict[int, int] = {}
    order: list[int] = []
    starts = []
    for r in roots:
        if r in ids:
            continue
        starts.append((len(order), m.labels[r].tail))
        ids[r] = len(order)
        order.append(r)
        i = len(order) - 1
        while i < len(order):
            s = order[i]
            for t in (m.yellow[s], m.blue[s]):
                if t not in ids:
                    ids[t] = len(order)
                    order.append(t)
            i += 1
    out: list = [tuple(starts)]
    for s in order:
        o = m.owner[s]
        kind = (o[1], o[2]) if o[0] == "L" else ()
        out.append((m.labels[s].step, kind, ids[m.yellow[s]], ids[m.blue[s]]))
    return tuple(out)


def canonical_code(m: EmbeddedMap) -> bytes:
    """Isomorphism-invariant code for rooted labelled maps.

    Components carrying boundary loops are traversed breadth-first from the
    position-0 side of each loop.  Closed components, if any, use the least
    code over all possible roots.
    """
    roots = [r for r in m.loop_roots if r is not None]
    parts: list = [tuple(tuple(l.steps) for l in m.loops)]
    if roots:
        parts.append(_bfs_code(m, roots))
    comp, nc = m._components
    rooted = {comp[r] for r in roots}
    closed: dict[int, list[int]] = {}
    for s in range(m.n_sides):
        if comp[s] not in rooted:
            closed.setdefault(comp[s], []).append(s)
    parts.append(tuple(sorted(min(_bfs_code(m, [r]) for r in sides) for sides in closed.values())))
    return repr(tuple(parts)).encode()


# --- dual graph and separability ---------------------------------------------------------


def dual_graph(m: EmbeddedMap) -> nx.MultiGraph:
    """Faces as nodes (``("Y", i)`` yellow incl. external, ``("B", i)`` blue), one edge per map edge."""
    g = nx.MultiGraph()
    for i, f in enumerate(m.yellow_faces):
        g.add_node(("Y", i), color="yellow", external=m.is_external(f[0]))
    for i, f in enumerate(m.blue_faces):
        g.add_node(("B", i), color="blue", external=False, edge=m.blue_edge(i))
    for s in range(m.n_sides):
        g.add_edge(("Y", m.yellow_face_of[s]), ("B", m.blue_face_of[s]), side=s)
    return g


def _dual_adjacency(m: EmbeddedMap) -> tuple[int, list[list[int]]]:
    ny = len(m.yellow_faces)
    nodes = ny + len(m.blue_faces)
    adj: list[list[int]] = [[] for _ in range(nodes)]
    for s in range(m.n_sides):
        y, b = m.yellow_face_of[s], ny + m.blue_face_of[s]
        adj[y].append(b)
        adj[b].append(y)
    return ny, adj


def _connected_without(adj: list[list[int]], removed: set[int]) -> bool:
    alive = [v for v in range(len(adj)) if v not in removed]
    if len(alive) <= 1:
        return True
    seen = {alive[0]}
    stack = [alive[0]]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in seen and u not in removed:
                seen.add(u)
                stack.append(u)
    return len(seen) == len(alive)


def blue_faces_by_edge(m: EmbeddedMap) -> dict[OrientedEdge, list[int]]:
    out: dict[OrientedEdge, list[int]] = {}
    for i in range(len(m.blue_faces)):
        out.setdefault(m.blue_edge(i), []).append(i)
    return out


def is_non_separable(m: EmbeddedMap) -> bool:
    """No lattice edge's blue faces disconnect the dual graph when removed."""
    if m.n_sides == 0:
        return True
    if m.n_components != 1:
        raise ValueError("non-separability is defined for connected maps")
    ny, adj = _dual_adjacency(m)
    for faces in blue_faces_by_edge(m).values():
        if not _connected_without(adj, {ny + f for f in faces}):
            return False
    return True


def enclosure_loops(m: EmbeddedMap, e: OrientedEdge) -> list[frozenset[int]]:
    """Inclusion-minimal families of blue faces over ``e`` whose removal disconnects the dual graph."""
    faces = blue_faces_by_edge(m).get(e.positive(), [])
    ny, adj = _dual_adjacency(m)
    found: list[frozenset[int]] = []
    for k in range(1, len(faces) + 1):
        for fam in itertools.combinations(faces, k):
            fs = frozenset(fam)
            if any(f <= fs for f in found):
                continue
            if not _connected_without(adj, {ny + f for f in fs}):
                found.append(fs)
    return found


# --- validation -------------------------------------------------------------------------


def validate(
    m: EmbeddedMap | DartSystem,
    s: Loop | StringOfLoops | Iterable[Loop],
    K: PlaquetteAssignment,
) -> ValidationReport:
    """Check the embedded-map axioms and that ``m`` has boundary ``s`` and assignment ``K``."""
    ds = m.to_darts() if isinstance(m, EmbeddedMap) else m
    rep = ValidationReport()
    err = rep.errors.append
    darts = ds.darts
    n = len(darts)
    if any(d.id != i for i, d in enumerate(darts)):
        err("dart identifiers must be 0..n-1 in order")
        return rep
    for d in darts:
        if not (0 <= d.partner < n and 0 <= d.next_in_face < n):
            err(f"dart {d.id}: pointer out of range")
            return rep
    if sorted(d.next_in_face for d in darts) != list(range(n)):
        err("next_in_face is not a permutation")
        return rep
    for d in darts:
        p = darts[d.partner]
        if d.partner == d.id or p.partner != d.id:
            err(f"dart {d.id}: partner is not a fixed-point-free involution")
        elif p.label != d.label.reverse():
            err(f"dart {d.id}: partner label is not the reversed edge")
        if darts[d.next_in_face].label.tail != d.label.head:
            err(f"dart {d.id}: face boundary is not a closed walk")
    faces = ds.faces()
    tag_of = {}
    for f in faces:
        tags = {ds.face_tags[x] for x in f}
        if len(tags) != 1 or not tags <= set(FACE_TAGS):
            err(f"face at dart {f[0]}: inconsistent or unknown tags {sorted(tags)}")
            continue
        tag = tags.pop()
        for x in f:
            tag_of[x] = tag
        if tag == "external-blue":
            err(f"face at dart {f[0]}: external face is blue")
        elif tag == "blue":
            labels = [darts[x].label for x in f]
            und = {e.positive() for e in labels}
            if len(f) % 2:
                err(f"face at dart {f[0]}: blue face of odd degree {len(f)}")
            elif len(und) != 1:
                err(f"face at dart {f[0]}: blue face spans several lattice edges")
            elif any(labels[i] != labels[(i + 1) % len(f)].reverse() for i in range(len(f))):
                err(f"face at dart {f[0]}: blue face does not alternate e and e^-1")
        elif tag == "yellow":
            cw = [darts[x].label.reverse() for x in reversed(f)]
            try:
                plaquette_of_cycle(cw)
            except ValueError as exc:
                err(f"face at dart {f[0]}: {exc}")
    if rep.errors:
        return rep
    for d in darts:
        a, b = tag_of[d.id], tag_of[d.partner]
        if (a == "blue") == (b == "blue"):
            err(f"dart {d.id}: dual edge does not join a blue and a yellow face")
    # vertices: corner (dart, end) with end 0 = tail, 1 = head
    uf = UnionFind(2 * n)
    for d in darts:
        uf.union(2 * d.id + 1, 2 * d.next_in_face)
        uf.union(2 * d.id, 2 * d.partner + 1)
    where: dict[int, Vertex] = {}
    for d in darts:
        for end, v in ((0, d.label.tail), (1, d.label.head)):
            r = uf.find(2 * d.id + end)
            if where.setdefault(r, v) != v:
                err(f"dart {d.id}: vertex class maps to two lattice vertices")
    # boundary string and assignment
    want_loops = sorted(_cyclic_key(l) for l in as_string(s))
    got_loops = []
    counts: dict[OrientedPlaquette, int] = {}
    for f in faces:
        tag = tag_of[f[0]]
        cw = [darts[x].label.reverse() for x in reversed(f)]
        if tag == "external-yellow":
            got_loops.append(_cyclic_key(Loop.from_edges(cw)))
        elif tag == "yellow":
            p, _ = plaquette_of_cycle(cw)
            counts[p] = counts.get(p, 0) + 1
    if sorted(got_loops) != want_loops:
        err(f"external faces read {len(got_loops)} loops not matching the boundary string")
    if PlaquetteAssignment(counts) != K:
        err("internal yellow faces do not match the plaquette assignment")
    return rep


def _cyclic_key(l: Loop) -> tuple:
    n = len(l.steps)
    vs = l.vertices()
    return min((l.steps[r:] + l.steps[:r], vs[r]) for r in range(n)) if n else ((), ())
