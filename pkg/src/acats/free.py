"""Words in the free category on an AC graph and the maximal functorial distance.

The maximal functorial distance between two parallel words is computed as
a rewrite distance: the cheapest chain of elementary moves turning one word
into the other, where a move

* contracts an adjacent pair ``(f, g)`` to a single letter ``h`` (cost ``d(f, g, h)``),
* expands a letter ``h`` into ``(f, g)`` (same cost), or
* deletes or inserts an identity letter (cost 0).

Every functorial distance is bounded by each move's cost, so by the triangle
inequality it is bounded by the rewrite distance; the rewrite distance is
itself functorial, hence the maximum. Words are limited to length ``L``,
which can only make the search miss shortcuts, so the result is an upper
bound that can only decrease as ``L`` grows.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import (
    INF,
    ACStructure,
    _require_identities,
    check_graphcomp,
    check_transitivity,
    id_key,
)
from .metcat import MetrizedCategory
from .report import DEFAULT_TOLERANCE, DomainError, TruncationError, ValidationReport


@dataclass(frozen=True)
class PathWord:
    """A composable arrow sequence from ``src`` to ``dst``; empty words are identities."""

    src: object
    dst: object
    letters: tuple = ()

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        if not self.letters:
            return f"()_{self.src}"
        return "(" + ",".join(map(str, self.letters)) + ")"


def word(ac: ACStructure, letters: Sequence = (), base=None) -> PathWord:
    """Build a checked word; ``base`` is required (only) for the empty word."""
    letters = tuple(letters)
    if not letters:
        if base is None:
            raise DomainError("the empty word needs a base object")
        if base not in ac.objects:
            raise DomainError(f"unknown object {base!r}")
        return PathWord(base, base, ())
    arrows = [ac.arrow(a) for a in letters]
    for p, q in zip(arrows, arrows[1:]):
        if p.dst != q.src:
            raise DomainError(f"{p.id!r} and {q.id!r} are not composable")
    if base is not None and base != arrows[0].src:
        raise DomainError(f"word does not start at {base!r}")
    return PathWord(arrows[0].src, arrows[-1].dst, letters)


def concat(a: PathWord, b: PathWord) -> PathWord:
    if a.dst != b.src:
        raise DomainError(f"cannot concatenate: {a} ends at {a.dst!r}, {b} starts at {b.src!r}")
    return PathWord(a.src, b.dst, a.letters + b.letters)


@dataclass(frozen=True)
class MoveGraphConfig:
    max_len: int = 4
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.max_len < 1:
            raise DomainError("max_len must be a positive integer")


@dataclass(frozen=True)
class FunctorialDistanceEstimate:
    value: float
    kind: str  # "exact" or "upper-bound-at-L"
    max_len: int

    def __float__(self):
        return self.value


class MoveGraph:
    """Implicit elementary-move graph on words of length at most ``max_len``.

    Words are handled internally as tuples of arrow indices.
    """

    def __init__(self, ac: ACStructure, max_len: int):
        _require_identities(ac, "the move graph")
        self.ac = ac
        self.max_len = max_len
        self.ids = [a.id for a in ac.arrows]
        self.index = {a: i for i, a in enumerate(self.ids)}
        self.src = [a.src for a in ac.arrows]
        self.dst = [a.dst for a in ac.arrows]
        self.unit = {x: self.index[e] for x, e in ac.identities.items()}
        self.is_unit = set(self.unit.values())
        contract: dict = {}
        expand: dict = {i: [] for i in range(len(self.ids))}
        for (x, y, z), blk in ac._blocks.items():
            if blk.size == 0:
                continue
            A = [self.index[a] for a in ac.hom(x, y)]
            B = [self.index[b] for b in ac.hom(y, z)]
            C = [self.index[c] for c in ac.hom(x, z)]
            for (i, j, k), v in np.ndenumerate(blk):
                v = float(v)
                contract.setdefault((A[i], B[j]), []).append((C[k], v))
                expand[C[k]].append((A[i], B[j], v))
        self.contract = contract
        self.expand = expand

    def encode(self, w: PathWord) -> tuple:
        return tuple(self.index[a] for a in w.letters)

    def decode(self, t: tuple, src, dst) -> PathWord:
        return PathWord(src, dst, tuple(self.ids[i] for i in t))

    def neighbors(self, w: tuple, src) -> Iterable[tuple]:
        n = len(w)
        L = self.max_len
        for i in range(n - 1):
            for h, c in self.contract.get((w[i], w[i + 1]), ()):
                yield w[:i] + (h,) + w[i + 2:], c
        for i in range(n):
            if w[i] in self.is_unit:
                yield w[:i] + w[i + 1:], 0.0
        if n < L:
            for i in range(n):
                for f, g, c in self.expand[w[i]]:
                    yield w[:i] + (f, g) + w[i + 1:], c
            for i in range(n + 1):
                obj = src if i == 0 else self.dst[w[i - 1]]
                yield w[:i] + (self.unit[obj],) + w[i:], 0.0

    def distances(self, start: tuple, src, targets: Iterable[tuple] | None = None,
                  bound: float = INF) -> dict:
        """Dijkstra from ``start``; stops once every target is settled.

        States farther than ``bound`` are not expanded.
        """
        pending = set(targets) if targets is not None else None
        dist = {start: 0.0}
        done = {}
        heap = [(0.0, start)]
        while heap:
            dw, w = heapq.heappop(heap)
            if w in done:
                continue
            done[w] = dw
            if pending is not None:
                pending.discard(w)
                if not pending:
                    break
            for v, c in self.neighbors(w, src):
                nd = dw + c
                if nd > bound or v in done:
                    continue
                if nd < dist.get(v, INF):
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        return done

    def words(self, x, y) -> list[tuple]:
        """All words from ``x`` to ``y`` of length at most ``max_len``."""
        out = [()] if x == y else []
        frontier = [((), x)]
        for _ in range(self.max_len):
            nxt = []
            for w, end in frontier:
                for i, a in enumerate(self.ids):
                    if self.src[i] == end:
                        nxt.append((w + (i,), self.dst[i]))
            out.extend(w for w, end in nxt if end == y)
            frontier = nxt
        return out


def _check_parallel(a: PathWord, b: PathWord) -> None:
    if (a.src, a.dst) != (b.src, b.dst):
        raise DomainError(f"{a} and {b} are not parallel")


def _estimate(value: float, L: int) -> FunctorialDistanceEstimate:
    # zero is also the trivial lower bound, so a zero upper bound is exact
    return FunctorialDistanceEstimate(value, "exact" if value == 0 else "upper-bound-at-L", L)


def elementary_moves(ac: ACStructure, w: PathWord, max_len: int) -> list[tuple[PathWord, float]]:
    """Every word one elementary move away from ``w`` (within ``max_len``), with its cost."""
    if len(w) > max_len:
        raise DomainError(f"word of length {len(w)} exceeds max_len {max_len}")
    g = MoveGraph(ac, max_len)
    return [(g.decode(v, w.src, w.dst), c) for v, c in g.neighbors(g.encode(w), w.src)]


def dmax_estimate(ac: ACStructure, a: PathWord, b: PathWord, cfg: MoveGraphConfig = MoveGraphConfig(),
                  graph: MoveGraph | None = None) -> FunctorialDistanceEstimate:
    """Cheapest zig-zag of elementary moves from ``a`` to ``b`` among words of length <= L."""
    _check_parallel(a, b)
    L = cfg.max_len
    if max(len(a), len(b)) > L:
        raise DomainError(f"query words longer than max_len {L}")
    if a == b:
        return FunctorialDistanceEstimate(0.0, "exact", L)
    g = graph if graph is not None and graph.max_len == L else MoveGraph(ac, L)
    tb = g.encode(b)
    done = g.distances(g.encode(a), a.src, [tb])
    return _estimate(done.get(tb, INF), L)


def dmax_from(ac: ACStructure, a: PathWord, targets: Sequence[PathWord], cfg: MoveGraphConfig = MoveGraphConfig(),
              graph: MoveGraph | None = None) -> list[FunctorialDistanceEstimate]:
    """``dmax_estimate(a, t)`` for several parallel targets with one search."""
    for t in targets:
        _check_parallel(a, t)
    L = cfg.max_len
    g = graph if graph is not None and graph.max_len == L else MoveGraph(ac, L)
    enc = [g.encode(t) for t in targets]
    done = g.distances(g.encode(a), a.src, enc)
    return [_estimate(done.get(t, INF), L) for t in enc]


def verify_embedding(ac: ACStructure, cfg: MoveGraphConfig = MoveGraphConfig(), equality_tolerance: float = 1e-6,
                     transitive: bool | None = None) -> ValidationReport:
    """Compare ``dmax((f, g), (h))`` with ``d(f, g, h)`` on every composable triple.

    The upper bound is always checked. Equality, and the Yoneda lower bound
    below the estimate, are checked when the structure is absolutely
    transitive and satisfies the graph hypothesis (computed unless given).
    """
    from .yoneda import yoneda_lower_bound

    if transitive is None:
        transitive = check_graphcomp(ac) and check_transitivity(ac).passed
    rep = ValidationReport()
    rep.notes["absolutely_transitive_with_graphcomp"] = bool(transitive)
    rep.notes["max_len"] = cfg.max_len
    tol = ac.tolerance
    g = MoveGraph(ac, cfg.max_len)
    worst = 0.0
    for x, y, z in itertools.product(ac.objects, repeat=3):
        C = ac.hom(x, z)
        if not C:
            continue
        targets = [PathWord(x, z, (h,)) for h in C]
        for f, gg in itertools.product(ac.hom(x, y), ac.hom(y, z)):
            start = PathWord(x, z, (f, gg))
            bound = max(ac.d(f, gg, h) for h in C) + tol
            enc = [g.encode(t) for t in targets]
            done = g.distances(g.encode(start), x, enc, bound=bound)
            for h, t in zip(C, enc):
                e = done.get(t, INF)
                d = ac.d(f, gg, h)
                wit = (f, gg, h)
                rep.tick("upper_bound")
                if e > d + tol:
                    rep.add("upper_bound", wit, e, d)
                if transitive:
                    rep.tick("equality")
                    if abs(e - d) > equality_tolerance:
                        rep.add("equality", wit, abs(e - d), 0.0)
                    worst = max(worst, abs(e - d))
                    lb = yoneda_lower_bound(ac, f, gg, h)
                    rep.tick("yoneda_lower_bound")
                    if lb > e + equality_tolerance:
                        rep.add("yoneda_lower_bound", wit, lb, e)
    rep.notes["max_abs_deviation"] = worst
    return rep


def build_cmax(ac: ACStructure, cfg: MoveGraphConfig = MoveGraphConfig(), strict: bool = False) -> tuple[MetrizedCategory, dict]:
    """Quotient of the truncated free category by ``dmax == 0``.

    Returns the metrized category (arrows are shortest representative
    words) and the map from each letter ``f`` to the class of ``(f)``.
    Composites whose representative concatenation exceeds ``L`` are left
    undefined, giving a partial category; with ``strict=True`` that raises
    :class:`TruncationError` instead.
    """
    L = cfg.max_len
    g = MoveGraph(ac, L)
    tol = cfg.tolerance
    arrows, compose, matrices = [], {}, {}
    cls_of: dict = {}
    reps: dict = {}
    for x, y in itertools.product(ac.objects, repeat=2):
        ws = g.words(x, y)
        ws.sort(key=lambda t: (len(t), [id_key(g.ids[i]) for i in t]))
        dist = {w: g.distances(w, x, ws) for w in ws}
        classes: list[list] = []
        for w in ws:
            for c in classes:
                if dist[c[0]].get(w, INF) <= tol:
                    c.append(w)
                    break
            else:
                classes.append([w])
        hom_reps = []
        for c in classes:
            r = g.decode(c[0], x, y)
            hom_reps.append(r)
            for w in c:
                cls_of[w, x, y] = r
        reps[x, y] = hom_reps
        arrows.extend((r, x, y) for r in hom_reps)
        enc = [g.encode(r) for r in hom_reps]
        matrices[x, y] = np.array([[dist[p].get(q, INF) for q in enc] for p in enc]).reshape(len(enc), len(enc))
    missing = []
    for x, y, z in itertools.product(ac.objects, repeat=3):
        for r1, r2 in itertools.product(reps[x, y], reps[y, z]):
            cat = concat(r1, r2)
            if len(cat) > L:
                missing.append((r1, r2))
                continue
            compose[r1, r2] = cls_of[g.encode(cat), x, z]
    if missing and strict:
        r1, r2 = missing[0]
        raise TruncationError(f"max_len {L} too small: {r1} then {r2} has no representative")
    identities = {x: cls_of[(), x, x] for x in ac.objects}
    mc = MetrizedCategory.from_matrices(ac.objects, arrows, identities, compose, matrices, tol,
                                        partial=bool(missing))
    inclusion = {a.id: cls_of[(g.index[a.id],), a.src, a.dst] for a in ac.arrows}
    return mc, inclusion
