"""Geometry of the hypercubic lattice Z^d: vertices, oriented edges and plaquettes.

Vertices are plain integer tuples.  Edges and plaquettes are immutable named
tuples, so they hash quickly, compare lexicographically and can be shared
freely between threads and processes.
"""

from __future__ import annotations

from typing import Any, NamedTuple, Sequence

Vertex = tuple[int, ...]


def unit_step(vertex: Vertex, axis: int, sign: int) -> Vertex:
    """Return ``vertex + sign * unit(axis)`` (axes are 1-based)."""
    k = axis - 1
    return vertex[:k] + (vertex[k] + sign,) + vertex[k + 1 :]


def translate_vertex(vertex: Vertex, offset: Sequence[int]) -> Vertex:
    return tuple(a + b for a, b in zip(vertex, offset))


class OrientedEdge(NamedTuple):
    """Nearest-neighbour edge from ``tail`` to ``tail + sign * unit(axis)``."""

    tail: Vertex
    axis: int
    sign: int

    @property
    def head(self) -> Vertex:
        return unit_step(self.tail, self.axis, self.sign)

    @property
    def dim(self) -> int:
        return len(self.tail)

    @property
    def step(self) -> int:
        """Signed axis token, e.g. ``+2`` or ``-1``."""
        return self.sign * self.axis

    def reverse(self) -> OrientedEdge:
        return OrientedEdge(self.head, self.axis, -self.sign)

    def positive(self) -> OrientedEdge:
        """The positively oriented representative of the unoriented edge."""
        return self if self.sign > 0 else self.reverse()

    def translate(self, offset: Sequence[int]) -> OrientedEdge:
        return OrientedEdge(translate_vertex(self.tail, offset), self.axis, self.sign)

    def to_json(self) -> dict[str, Any]:
        return {"tail": list(self.tail), "axis": self.axis, "sign": self.sign}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> OrientedEdge:
        edge = cls(tuple(int(x) for x in data["tail"]), int(data["axis"]), int(data["sign"]))
        _check_edge(edge)
        return edge


def _check_edge(e: OrientedEdge) -> None:
    if len(e.tail) < 2:
        raise ValueError(f"lattice dimension must be at least 2, got {len(e.tail)}")
    if not 1 <= e.axis <= len(e.tail):
        raise ValueError(f"axis {e.axis} out of range for dimension {len(e.tail)}")
    if e.sign not in (1, -1):
        raise ValueError(f"edge sign must be +1 or -1, got {e.sign}")


def check_plaquette(p: OrientedPlaquette) -> None:
    i, j = p.axes
    if not (1 <= i < j <= len(p.base)) or p.sign not in (1, -1):
        raise ValueError(f"malformed plaquette {tuple(p)!r}")


class OrientedPlaquette(NamedTuple):
    """Oriented unit square.

    ``base`` is the lexicographically smallest corner and ``axes = (i, j)`` with
    ``i < j`` spans the square.  With ``sign = +1`` the edge joining the two
    smallest corners (``base`` and ``base + unit(j)``) is traversed upwards,
    which in two dimensions is the clockwise orientation.
    """

    base: Vertex
    axes: tuple[int, int]
    sign: int

    @property
    def dim(self) -> int:
        return len(self.base)

    @property
    def square(self) -> tuple[Vertex, tuple[int, int]]:
        """Unoriented square ``(base, axes)`` shared by ``p`` and ``p^{-1}``."""
        return (self.base, self.axes)

    def inverse(self) -> OrientedPlaquette:
        return OrientedPlaquette(self.base, self.axes, -self.sign)

    def boundary(self) -> list[OrientedEdge]:
        return plaquette_boundary(self)

    def translate(self, offset: Sequence[int]) -> OrientedPlaquette:
        return OrientedPlaquette(translate_vertex(self.base, offset), self.axes, self.sign)

    def to_json(self) -> dict[str, Any]:
        return {"base": list(self.base), "axes": list(self.axes), "sign": self.sign}

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> OrientedPlaquette:
        i, j = (int(a) for a in data["axes"])
        p = cls(tuple(int(x) for x in data["base"]), (i, j), int(data["sign"]))
        check_plaquette(p)
        return p


def reverse_edge(e: OrientedEdge) -> OrientedEdge:
    return e.reverse()


def is_positively_oriented(e: OrientedEdge) -> bool:
    """True iff the head is lexicographically larger than the tail."""
    return e.sign > 0


def plaquette_boundary(p: OrientedPlaquette) -> list[OrientedEdge]:
    """The four boundary edges of ``p`` in traversal order, starting at ``base``."""
    i, j = p.axes
    b = p.base
    if p.sign > 0:
        moves = ((j, 1), (i, 1), (j, -1), (i, -1))
    else:
        moves = ((i, 1), (j, 1), (i, -1), (j, -1))
    edges = []
    v = b
    for axis, sign in moves:
        edges.append(OrientedEdge(v, axis, sign))
        v = unit_step(v, axis, sign)
    return edges


def plaquette_steps(p: OrientedPlaquette) -> tuple[int, int, int, int]:
    i, j = p.axes
    return (j, i, -j, -i) if p.sign > 0 else (i, j, -i, -j)


def plaquettes_containing(e: OrientedEdge, d: int | None = None) -> list[OrientedPlaquette]:
    """All oriented plaquettes whose boundary traverses ``e`` in its direction.

    There are ``2(d - 1)``: for every other axis ``k`` the edge lies on the
    squares displaced by ``+unit(k)`` and ``-unit(k)``, each with exactly one
    orientation matching ``e``.
    """
    if d is None:
        d = e.dim
    if d != e.dim:
        raise ValueError(f"edge has dimension {e.dim}, expected {d}")
    low = e.tail if e.sign > 0 else e.head
    a = e.axis
    out = []
    for k in range(1, d + 1):
        if k == a:
            continue
        for shift in (0, -1):
            base = unit_step(low, k, shift) if shift else low
            axes = (min(a, k), max(a, k))
            for sign in (1, -1):
                p = OrientedPlaquette(base, axes, sign)
                if e in plaquette_boundary(p):
                    out.append(p)
                    break
    out.sort()
    return out


def squares_containing(u: OrientedEdge) -> list[tuple[Vertex, tuple[int, int]]]:
    """Unoriented squares incident to the unoriented edge of ``u``."""
    return sorted({p.square for p in plaquettes_containing(u)})


def square_edges(square: tuple[Vertex, tuple[int, int]]) -> list[OrientedEdge]:
    """Positively oriented edges of an unoriented square."""
    base, axes = square
    return [e.positive() for e in plaquette_boundary(OrientedPlaquette(base, axes, 1))]
