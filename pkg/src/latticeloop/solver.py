"""Exact large-N Wilson loop coefficients from the fixed-assignment master loop equation.

Every map contributing to ``phi^K(l)`` has area ``area(K)``, so
``phi^K(l) = c(l, K) * beta^area(K)`` with an integer ``c``.  The recursion at
a pivot edge ``e`` of ``l = e pi`` reads

    c(l, K) =   sum over negative splittings  sum_{K1+K2=K} c(l1, K1) c(l2, K2)
              - sum over positive splittings  sum_{K1+K2=K} c(l1, K1) c(l2, K2)
              + sum_{p in P(e^-1), K(p)>0} c(l (-) p, K \\ p)
              - sum_{q in P(e),    K(q)>0} c(l (+) q, K \\ q)

with ``c(null, K) = [K = 0]``.  Values are memoised on the translation and
rotation class of ``(l, K)``.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .assignments import PlaquetteAssignment, decompositions, enumerate_balanced_assignments, is_ell_connected
from .lattice import OrientedPlaquette, plaquette_boundary, plaquettes_containing
from .loops import (
    Loop,
    StringOfLoops,
    as_string,
    canonicalize,
    edge_flux,
    erase_backtracks,
    merge,
    negative_splittings,
    positive_splittings,
)

CACHE_SCHEMA = "latticeloop/cache/v1"
SERIES_SCHEMA = "latticeloop/series/v1"

MemoKey = tuple[tuple[int, ...], tuple[tuple[OrientedPlaquette, int], ...]]


class CacheError(ValueError):
    """Unreadable cache file, or schema/dimension mismatch."""


class CacheConflict(ValueError):
    """Two caches disagree on the value of one key."""


# --- memo table ---------------------------------------------------------------------------


def key_to_str(key: MemoKey) -> str:
    steps, items = key
    loop = " ".join(f"{s:+d}" for s in steps)
    parts = [
        f"{','.join(map(str, p.base))}/{p.axes[0]},{p.axes[1]}/{p.sign:+d}/{k}" for p, k in items
    ]
    return loop + "|" + ";".join(parts)


def key_from_str(text: str) -> MemoKey:
    loop, _, kpart = text.partition("|")
    steps = tuple(int(t) for t in loop.split())
    items = []
    for part in filter(None, kpart.split(";")):
        base, axes, sign, k = part.split("/")
        i, j = (int(x) for x in axes.split(","))
        items.append((OrientedPlaquette(tuple(int(x) for x in base.split(",")), (i, j), int(sign)), int(k)))
    return steps, tuple(items)


class MemoTable:
    """Solver cache: canonical ``(loop, K)`` keys to integer coefficients for one dimension."""

    def __init__(self, dim: int, entries: dict[MemoKey, int] | None = None):
        self.dim = dim
        self.entries: dict[MemoKey, int] = dict(entries or {})

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MemoTable) and self.dim == other.dim and self.entries == other.entries

    def update(self, other: MemoTable | dict[MemoKey, int]) -> None:
        """Union in place; a disagreeing value raises :class:`CacheConflict`."""
        items = other.entries if isinstance(other, MemoTable) else other
        if isinstance(other, MemoTable) and other.dim != self.dim:
            raise CacheError(f"cannot merge a d={other.dim} cache into d={self.dim}")
        for k, v in items.items():
            old = self.entries.get(k)
            if old is not None and old != v:
                raise CacheConflict(f"conflicting values {old} and {v} for key {key_to_str(k)}")
            self.entries[k] = v

    def dumps(self) -> str:
        lines = [json.dumps({"schema": CACHE_SCHEMA, "dim": self.dim}, separators=(",", ":"))]
        for ks, v in sorted((key_to_str(k), v) for k, v in self.entries.items()):
            lines.append(json.dumps({"key": ks, "coeff": str(v)}, separators=(",", ":")))
        return "\n".join(lines) + "\n"

    def save(self, path: str | os.PathLike) -> None:
        tmp = Path(str(path) + ".tmp")
        tmp.write_text(self.dumps())
        os.replace(tmp, path)

    @classmethod
    def loads(cls, text: str, dim: int | None = None) -> MemoTable:
        lines = text.splitlines()
        if not lines:
            raise CacheError("empty cache file")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise CacheError(f"bad cache header: {exc}") from None
        if header.get("schema") != CACHE_SCHEMA:
            raise CacheError(f"unsupported cache schema {header.get('schema')!r}")
        if dim is not None and header.get("dim") != dim:
            raise CacheError(f"cache is for d={header.get('dim')}, run uses d={dim}")
        table = cls(int(header["dim"]))
        for n, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                table.entries[key_from_str(rec["key"])] = int(rec["coeff"])
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise CacheError(f"line {n}: {exc}") from None
        return table

    @classmethod
    def load(cls, path: str | os.PathLike, dim: int | None = None) -> MemoTable:
        return cls.loads(Path(path).read_text(), dim)


def cache_save(table: MemoTable, path: str | os.PathLike) -> None:
    table.save(path)


def cache_load(path: str | os.PathLike, dim: int | None = None) -> MemoTable:
    return MemoTable.load(path, dim)


# --- solver -------------------------------------------------------------------------------


def memo_key(loop: Loop, K: PlaquetteAssignment) -> tuple[MemoKey, Loop, PlaquetteAssignment]:
    """Canonical key plus the canonically rooted, origin-based loop and assignment."""
    canon = canonicalize(loop)
    shift = tuple(-x for x in canon.offset)
    rooted = Loop((0,) * loop.dim, canon.steps)
    Kt = K.translate(shift)
    return (canon.steps, Kt.items()), rooted, Kt


class Solver:
    """Memoised master-loop-equation solver for one lattice dimension."""

    def __init__(self, dim: int, memo: MemoTable | None = None, check_termination: bool = False):
        if dim < 2:
            raise ValueError("lattice dimension must be at least 2")
        self.dim = dim
        self.memo = memo if memo is not None else MemoTable(dim)
        if self.memo.dim != dim:
            raise CacheError(f"cache is for d={self.memo.dim}, solver uses d={dim}")
        self.check_termination = check_termination

    # public API

    def phi_K(self, loop: Loop, K: PlaquetteAssignment) -> int:
        """Integer ``c`` with ``phi^K(loop) = c * beta^area(K)``."""
        return self._phi(loop, K, None)

    def phi_K_at(self, loop: Loop, K: PlaquetteAssignment, at: int) -> int:
        """Same value, but the top-level recursion pivots at edge ``at`` of the backtrack-free ``loop``."""
        if erase_backtracks(loop) != loop:
            raise ValueError("pivot override needs a backtrack-free loop")
        return self._phi(loop, K, at)

    def phi_K_string(self, s: Loop | StringOfLoops | Iterable[Loop], K: PlaquetteAssignment) -> int:
        """Sum over ordered decompositions of ``K`` among the loops of the product of loop values."""
        loops = list(as_string(s))
        return self._string(loops, K)

    # internals

    def _string(self, loops: list[Loop], K: PlaquetteAssignment) -> int:
        if not loops:
            return 1 if K.area == 0 else 0
        if len(loops) == 1:
            return self.phi_K(loops[0], K)
        head, rest = loops[0], loops[1:]
        flux = edge_flux([head])
        total = 0
        for k1, k2 in decompositions(K):
            if not _balances(flux, k1):
                continue
            v = self.phi_K(head, k1)
            if v:
                total += v * self._string(rest, k2)
        return total

    def _phi(self, loop: Loop, K: PlaquetteAssignment, at: int | None) -> int:
        loop = erase_backtracks(loop)
        if loop.is_null:
            return 1 if K.area == 0 else 0
        if K.area == 0:
            return 0
        if edge_flux(loop, K) or not is_ell_connected(loop, K):
            return 0
        if at is not None:
            return self._mle(loop, K, at)
        key, rooted, Kt = memo_key(loop, K)
        cached = self.memo.entries.get(key)
        if cached is not None:
            return cached
        value = self._mle(rooted, Kt, 0)
        self.memo.entries[key] = value
        return value

    def _sub(self, parent: tuple[int, int], loop: Loop, K: PlaquetteAssignment) -> int:
        if self.check_termination and (K.area, len(loop)) >= parent:
            raise AssertionError(f"recursion measure did not decrease: {(K.area, len(loop))} >= {parent}")
        return self.phi_K(loop, K)

    def _convolve(self, parent, l1: Loop, l2: Loop, K: PlaquetteAssignment) -> int:
        flux = edge_flux([l1])
        total = 0
        for k1, k2 in decompositions(K):
            if not _balances(flux, k1):
                continue
            v = self._sub(parent, l1, k1)
            if v:
                total += v * self._sub(parent, l2, k2)
        return total

    def _mle(self, loop: Loop, K: PlaquetteAssignment, at: int) -> int:
        parent = (K.area, len(loop))
        e = loop.edges[at]
        total = 0
        for l1, l2 in negative_splittings(loop, at):
            total += self._convolve(parent, l1, l2, K)
        for l1, l2 in positive_splittings(loop, at):
            total -= self._convolve(parent, l1, l2, K)
        for sign, target, mode in ((1, e.reverse(), "negative"), (-1, e, "positive")):
            for p in plaquettes_containing(target, self.dim):
                if K.get(p, 0):
                    pl = Loop.from_edges(plaquette_boundary(p))
                    new = merge(loop, at, pl, pl.edges.index(target), mode)
                    total += sign * self._sub(parent, new, K.remove(p))
        return total

    # series

    def phi_series(self, loop: Loop, a_max: int, jobs: int = 1) -> BetaSeries:
        """Coefficients ``c_A`` for ``1 <= A <= a_max``."""
        if a_max < 1:
            raise ValueError("a_max must be at least 1")
        reduced = erase_backtracks(loop)
        if reduced.is_null:
            raise ValueError("series needs a loop that is non-null after backtrack erasure")
        Ks = enumerate_balanced_assignments(reduced, a_max)
        if jobs <= 1 or len(Ks) < 2:
            values = [self.phi_K(reduced, K) for K in Ks]
        else:
            values = self._parallel(reduced, Ks, jobs)
        coeffs = {A: 0 for A in range(1, a_max + 1)}
        for K, v in zip(Ks, values):
            coeffs[K.area] += v
        return BetaSeries(coeffs, a_max)

    def _parallel(self, loop: Loop, Ks: Sequence[PlaquetteAssignment], jobs: int) -> list[int]:
        chunks = [list(range(i, len(Ks), jobs)) for i in range(jobs)]
        chunks = [c for c in chunks if c]
        values: list[int] = [0] * len(Ks)
        with ProcessPoolExecutor(max_workers=len(chunks)) as ex:
            futs = [
                ex.submit(_worker, self.dim, dict(self.memo.entries), loop, [Ks[i] for i in c]) for c in chunks
            ]
            results = [f.result() for f in futs]
        for c, (vals, entries) in zip(chunks, results):
            for i, v in zip(c, vals):
                values[i] = v
            self.memo.update(entries)
        return values


def _worker(dim: int, entries: dict, loop: Loop, Ks: list[PlaquetteAssignment]):
    s = Solver(dim, MemoTable(dim, entries))
    vals = [s.phi_K(loop, K) for K in Ks]
    return vals, s.memo.entries


def _balances(loop_flux: dict, K: PlaquetteAssignment) -> bool:
    """Would ``(loop, K)`` be balanced, given the loop's edge flux?"""
    if not K:
        return not loop_flux
    flux = dict(loop_flux)
    for p, k in K.items():
        for e in plaquette_boundary(p):
            u = e.positive()
            flux[u] = flux.get(u, 0) + (k if e.sign > 0 else -k)
    return not any(flux.values())


# --- series -------------------------------------------------------------------------------


@dataclass
class EvalResult:
    value: Fraction | float
    last_area: int
    last_term: Fraction | float
    caveat: str = (
        "truncated at area a_max; the convergence radius beta_0(d) is not known explicitly, "
        "so the final term is only a heuristic size indicator"
    )


@dataclass
class BetaSeries:
    """``sum_A c_A beta^A`` truncated at ``a_max``."""

    coefficients: dict[int, int]
    a_max: int

    def __post_init__(self) -> None:
        if any(a > self.a_max or a < 0 for a in self.coefficients):
            raise ValueError("coefficient area outside [0, a_max]")

    def coeff(self, area: int) -> int:
        return self.coefficients.get(area, 0)

    def evaluate(self, beta: Fraction | float | int | str) -> EvalResult:
        if isinstance(beta, str):
            beta = Fraction(beta)
        value = 0 * beta
        last_term = 0 * beta
        last_area = 0
        for A in sorted(self.coefficients):
            term = self.coefficients[A] * beta**A
            value += term
            if self.coefficients[A]:
                last_area, last_term = A, abs(term)
        return EvalResult(value, last_area, last_term)

    def to_json(self, dim: int, loop: Loop) -> dict:
        return {
            "schema": SERIES_SCHEMA,
            "dim": dim,
            "loop": loop.tokens(),
            "base": list(loop.base),
            "a_max": self.a_max,
            "coefficients": [{"area": A, "coeff": str(self.coefficients[A])} for A in sorted(self.coefficients)],
        }


# --- module-level conveniences ------------------------------------------------------------

_default: dict[int, Solver] = {}


def default_solver(dim: int) -> Solver:
    if dim not in _default:
        _default[dim] = Solver(dim)
    return _default[dim]


def phi_K(loop: Loop, K: PlaquetteAssignment) -> int:
    if loop.is_null:
        return 1 if K.area == 0 else 0
    return default_solver(loop.dim).phi_K(loop, K)


def phi_K_string(s: Loop | StringOfLoops | Iterable[Loop], K: PlaquetteAssignment) -> int:
    loops = list(as_string(s))
    if not loops:
        return 1 if K.area == 0 else 0
    return default_solver(loops[0].dim).phi_K_string(loops, K)


def phi_series(loop: Loop, a_max: int, jobs: int = 1) -> BetaSeries:
    return default_solver(loop.dim).phi_series(loop, a_max, jobs)


def phi_eval(loop: Loop, beta: Fraction | float | int | str, a_max: int) -> EvalResult:
    return phi_series(loop, a_max).evaluate(beta)


# --- direct check of the loop equation by enumeration ---------------------------------------


@dataclass
class MLEReport:
    loop: Loop
    K: PlaquetteAssignment
    at: int
    lhs: int
    rhs: int
    terms: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.lhs == self.rhs


def verify_mle(loop: Loop, K: PlaquetteAssignment, at: int, budget: int | None = None) -> MLEReport:
    """Both sides of the loop equation at edge ``at``, every term summed over enumerated maps."""
    from .enumerator import DEFAULT_BUDGET, surface_sum

    b = DEFAULT_BUDGET if budget is None else budget
    S = lambda l, k: surface_sum(l, k, "NPM", b)  # noqa: E731
    e = loop.edges[at]

    def conv(pairs):
        tot = 0
        for l1, l2 in pairs:
            for k1, k2 in decompositions(K):
                v = S(l1, k1)
                if v:
                    tot += v * S(l2, k2)
        return tot

    terms = {
        "negative_splittings": conv(negative_splittings(loop, at)),
        "positive_splittings": conv(positive_splittings(loop, at)),
        "negative_deformations": 0,
        "positive_deformations": 0,
    }
    for target, mode, name in ((e.reverse(), "negative", "negative_deformations"), (e, "positive", "positive_deformations")):
        for p in plaquettes_containing(target):
            if K.get(p, 0):
                pl = Loop.from_edges(plaquette_boundary(p))
                terms[name] += S(merge(loop, at, pl, pl.edges.index(target), mode), K.remove(p))
    rhs = (
        terms["negative_splittings"]
        - terms["positive_splittings"]
        + terms["negative_deformations"]
        - terms["positive_deformations"]
    )
    return MLEReport(loop, K, at, S(loop, K), rhs, terms)
