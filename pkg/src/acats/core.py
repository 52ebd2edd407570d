"""Approximate categorical structures and their axiom checks.

An AC structure is a finite graph ``(X, A)`` with designated identity loops
and a real number ``d(f, g, h)`` for every composable triple
``f: x -> y, g: y -> z, h: x -> z``, measuring how far ``h`` is from being
a composite of ``f`` then ``g``.

Triple values are stored densely, one numpy block per object triple
``(x, y, z)`` with shape ``(|A(x,y)|, |A(y,z)|, |A(x,z)|)``; every check
below is a broadcast over such blocks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping

import numpy as np

from .report import (
    DEFAULT_TOLERANCE,
    DEFAULT_WITNESS_CAP,
    DomainError,
    PreconditionError,
    SeparationError,
    StructureError,
    ValidationReport,
)

INF = math.inf

ObjectId = Hashable
ArrowId = Hashable


def id_key(a: Any) -> tuple:
    """Sort key putting numbers before strings, each in natural order."""
    if isinstance(a, (int, float)) and not isinstance(a, bool):
        return (0, a, "")
    return (1, 0, str(a))


@dataclass(frozen=True)
class Arrow:
    id: ArrowId
    src: ObjectId
    dst: ObjectId


class ACStructure:
    """A finite AC structure (or semi-categorical structure if ``identities`` is None).

    ``d`` is either a mapping ``{(f, g, h): value}`` keyed by arrow ids or a
    callable ``d(f, g, h)``. It must be total on composable triples.
    """

    def __init__(
        self,
        objects: Iterable[ObjectId],
        arrows: Iterable[Arrow | tuple],
        identities: Mapping[ObjectId, ArrowId] | None,
        d: Mapping[tuple, float] | Callable[[ArrowId, ArrowId, ArrowId], float],
        tolerance: float = DEFAULT_TOLERANCE,
    ):
        self._init_graph(objects, arrows, identities, tolerance)
        lookup = d if callable(d) else None
        blocks = {}
        for (x, y, z) in self._object_triples():
            A, B, C = self._hom[x, y], self._hom[y, z], self._hom[x, z]
            blk = np.empty((len(A), len(B), len(C)))
            for i, f in enumerate(A):
                for j, g in enumerate(B):
                    for k, h in enumerate(C):
                        try:
                            v = lookup(f, g, h) if lookup else d[f, g, h]
                        except KeyError:
                            raise StructureError(f"missing triple entry d({f!r}, {g!r}, {h!r})") from None
                        v = float(v)
                        if math.isnan(v):
                            raise StructureError(f"NaN at d({f!r}, {g!r}, {h!r})")
                        blk[i, j, k] = v
            blk.setflags(write=False)
            blocks[x, y, z] = blk
        self._blocks = blocks

    # -- construction helpers -------------------------------------------------

    def _init_graph(self, objects, arrows, identities, tolerance):
        self.objects = tuple(objects)
        if len(set(self.objects)) != len(self.objects):
            raise StructureError("duplicate object id")
        objset = set(self.objects)
        arrs = []
        for a in arrows:
            a = a if isinstance(a, Arrow) else Arrow(*a)
            if a.src not in objset or a.dst not in objset:
                raise StructureError(f"arrow {a.id!r} refers to an unknown object")
            arrs.append(a)
        self.arrows = tuple(arrs)
        self._arrow = {a.id: a for a in arrs}
        if len(self._arrow) != len(arrs):
            raise StructureError("duplicate arrow id")
        hom: dict[tuple, list] = {(x, y): [] for x in self.objects for y in self.objects}
        for a in arrs:
            hom[a.src, a.dst].append(a.id)
        self._hom = {k: tuple(v) for k, v in hom.items()}
        self._pos = {}
        for ids in self._hom.values():
            for i, f in enumerate(ids):
                self._pos[f] = i
        if identities is not None:
            identities = dict(identities)
            for x in self.objects:
                if x not in identities:
                    raise StructureError(f"object {x!r} has no identity")
                e = identities[x]
                a = self._arrow.get(e)
                if a is None:
                    raise StructureError(f"identity {e!r} of {x!r} is not an arrow")
                if a.src != x or a.dst != x:
                    raise StructureError(f"identity {e!r} of {x!r} is not a loop at {x!r}")
            if set(identities) - objset:
                raise StructureError("identity declared for an unknown object")
        self.identities = identities
        self.tolerance = float(tolerance)

    def _object_triples(self):
        return itertools.product(self.objects, repeat=3)

    @classmethod
    def _from_blocks(cls, objects, arrows, identities, blocks, tolerance) -> "ACStructure":
        self = cls.__new__(cls)
        self._init_graph(objects, arrows, identities, tolerance)
        out = {}
        for (x, y, z) in self._object_triples():
            shape = (len(self._hom[x, y]), len(self._hom[y, z]), len(self._hom[x, z]))
            blk = np.array(blocks[x, y, z], dtype=float).reshape(shape)
            blk.setflags(write=False)
            out[x, y, z] = blk
        self._blocks = out
        return self

    def with_tolerance(self, tolerance: float) -> "ACStructure":
        return ACStructure._from_blocks(self.objects, self.arrows, self.identities, self._blocks, tolerance)

    # -- accessors ------------------------------------------------------------

    @property
    def has_identities(self) -> bool:
        return self.identities is not None

    def arrow(self, f: ArrowId) -> Arrow:
        try:
            return self._arrow[f]
        except KeyError:
            raise DomainError(f"unknown arrow {f!r}") from None

    def src(self, f: ArrowId) -> ObjectId:
        return self.arrow(f).src

    def dst(self, f: ArrowId) -> ObjectId:
        return self.arrow(f).dst

    def hom(self, x: ObjectId, y: ObjectId) -> tuple:
        return self._hom[x, y]

    def identity(self, x: ObjectId) -> ArrowId:
        if self.identities is None:
            raise DomainError("semi-categorical structure has no identities")
        return self.identities[x]

    def position(self, f: ArrowId) -> int:
        return self._pos[f]

    def block(self, x: ObjectId, y: ObjectId, z: ObjectId) -> np.ndarray:
        return self._blocks[x, y, z]

    def d(self, f: ArrowId, g: ArrowId, h: ArrowId) -> float:
        F, G, H = self.arrow(f), self.arrow(g), self.arrow(h)
        if F.dst != G.src or F.src != H.src or G.dst != H.dst:
            raise DomainError(f"({f!r}, {g!r}, {h!r}) is not a composable triple")
        return float(self._blocks[F.src, F.dst, G.dst][self._pos[f], self._pos[g], self._pos[h]])

    def triples(self) -> Iterator[tuple]:
        """Yield ``(f, g, h, d(f,g,h))`` over all composable triples."""
        for (x, y, z), blk in self._blocks.items():
            A, B, C = self._hom[x, y], self._hom[y, z], self._hom[x, z]
            for (i, j, k), v in np.ndenumerate(blk):
                yield A[i], B[j], C[k], float(v)

    def triple_table(self) -> dict:
        return {(f, g, h): v for f, g, h, v in self.triples()}

    def composable_pairs(self) -> Iterator[tuple]:
        for x, y, z in self._object_triples():
            for f in self._hom[x, y]:
                for g in self._hom[y, z]:
                    yield f, g

    def same_graph(self, other: "ACStructure") -> bool:
        return (self.objects == other.objects and self.arrows == other.arrows
                and self.identities == other.identities)

    def restrict(self, keep: Iterable[ArrowId], identities: Mapping | None = None) -> "ACStructure":
        """Restriction to a subset of arrows (which must contain the identities).

        ``identities`` replaces the designated identities, e.g. by other
        members of their class in a quotient.
        """
        keep = set(keep)
        unknown = keep - set(self._arrow)
        if unknown:
            raise DomainError(f"unknown arrows {sorted(map(str, unknown))}")
        identities = self.identities if identities is None else dict(identities)
        if identities is not None:
            missing = [x for x, e in identities.items() if e not in keep]
            if missing:
                raise DomainError(f"restriction drops the identity of {missing[0]!r}")
        arrows = [a for a in self.arrows if a.id in keep]
        blocks = {}
        for (x, y, z), blk in self._blocks.items():
            ix = [[i for i, f in enumerate(self._hom[p, q]) if f in keep] for p, q in ((x, y), (y, z), (x, z))]
            blocks[x, y, z] = blk[np.ix_(*ix)]
        return ACStructure._from_blocks(self.objects, arrows, identities, blocks, self.tolerance)

    def __eq__(self, other):
        if not isinstance(other, ACStructure):
            return NotImplemented
        return (self.same_graph(other) and self.tolerance == other.tolerance
                and all(np.array_equal(self._blocks[k], other._blocks[k]) for k in self._blocks))

    __hash__ = None

    def __repr__(self):
        return (f"ACStructure({len(self.objects)} objects, {len(self.arrows)} arrows, "
                f"{sum(b.size for b in self._blocks.values())} triples)")


# -- helpers ------------------------------------------------------------------


def _tol(ac: ACStructure, tolerance: float | None) -> float:
    return ac.tolerance if tolerance is None else float(tolerance)


def _record(report: ValidationReport, axiom: str, lhs: np.ndarray, rhs: np.ndarray,
            tol: float, label: Callable[[tuple], tuple]) -> None:
    """Add every index where ``lhs > rhs + tol`` to ``report`` (lhs/rhs broadcast)."""
    lhs, rhs = np.broadcast_arrays(lhs, rhs)
    report.tick(axiom, lhs.size)
    if lhs.size == 0:
        return
    with np.errstate(invalid="ignore"):
        # inf - inf is nan, which never counts as a violation
        gap = lhs - rhs
        bad = gap > tol
    n = int(np.count_nonzero(bad))
    if not n:
        return
    room = max(report.witness_cap - len(report.violations), 0)
    idxs = [tuple(i) for i in np.argwhere(bad)[:room]]
    worst = np.unravel_index(int(np.argmax(np.where(bad, gap, -INF))), gap.shape)
    if worst not in idxs:
        idxs.append(worst)
    for idx in idxs:
        report.add(axiom, label(idx), lhs[idx], rhs[idx], gap[idx])
    report.counts[axiom] += n - len(idxs)
    if len(report.violations) > report.witness_cap:
        del report.violations[report.witness_cap:]


def _labeler(*homs):
    return lambda idx: tuple(h[i] for h, i in zip(homs, idx))


def _identity_pos(ac: ACStructure, x) -> int:
    return ac.position(ac.identity(x))


def _require_identities(ac: ACStructure, what: str) -> None:
    if not ac.has_identities:
        raise DomainError(f"{what} needs identities; structure is semi-categorical")


# -- validate -----------------------------------------------------------------


def validate(ac: ACStructure, tolerance: float | None = None,
             witness_cap: int = DEFAULT_WITNESS_CAP) -> ValidationReport:
    """Check identity, nonnegativity and both associativity axioms.

    Semi-categorical structures (no identities) get the associativity and
    nonnegativity checks only.
    """
    tol = _tol(ac, tolerance)
    rep = ValidationReport(witness_cap=witness_cap)
    (_thin_validate if _is_thin(ac) else _generic_validate)(ac, rep, tol)
    return rep


def _generic_validate(ac: ACStructure, rep: ValidationReport, tol: float) -> None:
    H = ac.hom
    for x, y, z in ac._object_triples():
        _record(rep, "nonnegativity", np.zeros(()), ac.block(x, y, z), tol, _labeler(H(x, y), H(y, z), H(x, z)))
    if ac.has_identities:
        for x, y in itertools.product(ac.objects, repeat=2):
            A = H(x, y)
            if not A:
                continue
            ix, iy = _identity_pos(ac, x), _identity_pos(ac, y)
            n = np.arange(len(A))
            # d(f, 1_y, f) and d(1_x, f, f)
            left = ac.block(x, y, y)[n, iy, n]
            right = ac.block(x, x, y)[ix, n, n]
            lab = lambda idx, A=A, e=ac.identity(y): (A[idx[0]], e, A[idx[0]])
            _record(rep, "left_identity", np.abs(left), np.zeros(()), tol, lab)
            lab = lambda idx, A=A, e=ac.identity(x): (e, A[idx[0]], A[idx[0]])
            _record(rep, "right_identity", np.abs(right), np.zeros(()), tol, lab)
            # d(f, 1_y, g) = d(1_x, f, g)
            a = ac.block(x, y, y)[:, iy, :]
            b = ac.block(x, x, y)[ix, :, :]
            with np.errstate(invalid="ignore"):
                sym = np.abs(a - b)
            _record(rep, "phi_symmetry_of_identities", sym, np.zeros(()), tol, _labeler(A, A))
    _associativity(ac, rep, tol)


def _is_thin(ac: ACStructure) -> bool:
    return len(ac.objects) > 2 and all(len(ac.hom(x, y)) <= 1 for x in ac.objects for y in ac.objects)


def _associativity(ac: ACStructure, rep: ValidationReport, tol: float) -> None:
    H = ac.hom
    for x, y, z, w in itertools.product(ac.objects, repeat=4):
        T1 = ac.block(x, y, z)  # f g a
        T2 = ac.block(y, z, w)  # g h b
        T3 = ac.block(x, y, w)  # f b c
        T4 = ac.block(x, z, w)  # a h c
        if min(T1.size, T2.size, T3.size, T4.size) == 0:
            continue
        # axes (f, g, h, a, b, c)
        t1 = T1[:, :, None, :, None, None]
        t2 = T2[None, :, :, None, :, None]
        t3 = T3[:, None, None, None, :, :]
        t4 = T4.transpose(1, 0, 2)[None, None, :, :, None, :]
        lab = _labeler(H(x, y), H(y, z), H(z, w), H(x, z), H(y, w), H(x, w))
        _record(rep, "left_associativity", t4, t1 + t2 + t3, tol, lab)
        _record(rep, "right_associativity", t3, t1 + t2 + t4, tol, lab)


def _thin_validate(ac: ACStructure, rep: ValidationReport, tol: float) -> None:
    """``validate`` when every hom set has at most one arrow, vectorized over objects.

    Reports exactly what the per-block loops would, in the same order.
    """
    O = ac.objects
    n = len(O)
    pos = {x: i for i, x in enumerate(O)}
    arrow = {(x, y): ac.hom(x, y)[0] for x in O for y in O if ac.hom(x, y)}
    D = np.full((n, n, n), np.nan)
    for (x, y, z), blk in ac._blocks.items():
        if blk.size:
            D[pos[x], pos[y], pos[z]] = blk[0, 0, 0]

    def check(valid, families, tick_empty=False):
        """``families``: (axiom, lhs, rhs, witness) checked together, in index order."""
        hits = []
        count = int(np.count_nonzero(valid))
        for axiom, lhs, rhs, witness in families:
            lhs, rhs = np.broadcast_arrays(lhs, rhs)
            with np.errstate(invalid="ignore"):
                gap = np.where(np.isposinf(lhs) & np.isposinf(rhs), 0.0, lhs - rhs)
            if count or tick_empty:
                rep.tick(axiom, count)
            hits.append((axiom, lhs, rhs, gap, valid & (gap > tol), witness))
        for q in map(tuple, np.argwhere(np.logical_or.reduce([h[4] for h in hits]))):
            objs = [O[i] for i in q]
            for axiom, lhs, rhs, gap, bad, witness in hits:
                if bad[q]:
                    rep.add(axiom, witness(*objs), lhs[q], rhs[q], gap[q])

    check(~np.isnan(D), [("nonnegativity", np.zeros_like(D), D,
                          lambda x, y, z: (arrow[x, y], arrow[y, z], arrow[x, z]))], tick_empty=True)
    if ac.has_identities:
        idx = np.arange(n)
        left = np.abs(D[:, idx, idx])  # d(f, 1_y, f) on axes (x, y)
        right = np.abs(D[idx, idx, :])  # d(1_x, f, f)
        has = np.array([[(x, y) in arrow for y in O] for x in O], dtype=bool).reshape(n, n)
        one = ac.identities
        with np.errstate(invalid="ignore"):
            sym = np.abs(D[:, idx, idx] - D[idx, idx, :])
        check(has, [
            ("left_identity", left, 0.0, lambda x, y: (arrow[x, y], one[y], arrow[x, y])),
            ("right_identity", right, 0.0, lambda x, y: (one[x], arrow[x, y], arrow[x, y])),
            ("phi_symmetry_of_identities", sym, 0.0, lambda x, y: (arrow[x, y], arrow[x, y])),
        ])
    # axes (x, y, z, w)
    t1 = D[:, :, :, None]
    t2 = D[None, :, :, :]
    t3 = D[:, :, None, :]
    t4 = D[:, None, :, :]
    valid = ~(np.isnan(t1) | np.isnan(t2) | np.isnan(t3) | np.isnan(t4))

    def six(x, y, z, w):
        return arrow[x, y], arrow[y, z], arrow[z, w], arrow[x, z], arrow[y, w], arrow[x, w]

    check(valid, [("left_associativity", t4, t1 + t2 + t3, six),
                  ("right_associativity", t3, t1 + t2 + t4, six)])


# -- phi and separation -------------------------------------------------------


def phi(ac: ACStructure, f: ArrowId, g: ArrowId) -> float:
    """The induced distance ``d(1_x, f, g)`` between parallel arrows."""
    _require_identities(ac, "phi")
    F, G = ac.arrow(f), ac.arrow(g)
    if (F.src, F.dst) != (G.src, G.dst):
        raise DomainError(f"{f!r} and {g!r} are not parallel")
    return ac.d(ac.identity(F.src), f, g)


def phi_matrix(ac: ACStructure, x: ObjectId, y: ObjectId) -> np.ndarray:
    """``phi`` on ``A(x, y)`` as a square matrix in hom order."""
    _require_identities(ac, "phi")
    return np.array(ac.block(x, x, y)[_identity_pos(ac, x)])


def is_separated(ac: ACStructure, tolerance: float | None = None) -> bool:
    tol = _tol(ac, tolerance)
    for x, y in itertools.product(ac.objects, repeat=2):
        P = phi_matrix(ac, x, y)
        off = ~np.eye(len(P), dtype=bool)
        if np.any((P <= tol) & off):
            return False
    return True


def separate(ac: ACStructure, tolerance: float | None = None) -> tuple[ACStructure, dict]:
    """Quotient by ``phi <= tolerance``; returns the quotient and arrow -> class map.

    Classes are formed by union-find over the relation and represented by
    their smallest arrow id.
    """
    _require_identities(ac, "separate")
    tol = _tol(ac, tolerance)
    parent = {a.id: a.id for a in ac.arrows}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for x, y in itertools.product(ac.objects, repeat=2):
        A = ac.hom(x, y)
        P = phi_matrix(ac, x, y)
        for i, j in zip(*np.nonzero(P <= tol)):
            if i < j:
                ri, rj = find(A[i]), find(A[j])
                if ri != rj:
                    parent[ri] = rj
    classes: dict = {}
    for a in ac.arrows:
        classes.setdefault(find(a.id), []).append(a.id)
    mapping = {}
    for members in classes.values():
        rep = min(members, key=id_key)
        for m in members:
            mapping[m] = rep
    reps = {a for a in mapping.values()}
    identities = {x: mapping[e] for x, e in ac.identities.items()}
    return ac.restrict(reps, identities), mapping


# -- epsilon-categoric and composition extraction -----------------------------


def epsilon_witness(ac: ACStructure) -> tuple[float, tuple | None]:
    """Largest ``min_h d(f,g,h)`` over composable pairs, with the pair attaining it."""
    best, arg = 0.0, None
    for (x, y, z), blk in ac._blocks.items():
        if blk.shape[0] == 0 or blk.shape[1] == 0:
            continue
        A, B = ac.hom(x, y), ac.hom(y, z)
        if blk.shape[2] == 0:
            return INF, (A[0], B[0])
        m = blk.min(axis=2)
        i, j = np.unravel_index(int(np.argmax(m)), m.shape)
        if arg is None or m[i, j] > best:
            best, arg = float(m[i, j]), (A[i], B[j])
    return best, arg


def epsilon_categoric(ac: ACStructure) -> float:
    """Smallest ``eps`` for which the structure is eps-categoric (``inf`` if none)."""
    return epsilon_witness(ac)[0]


def extract_composition(ac: ACStructure, tolerance: float | None = None) -> dict:
    """Read off the composition ``(f, g) -> g o f`` of a separated 0-categoric structure."""
    _require_identities(ac, "extract_composition")
    tol = _tol(ac, tolerance)
    eps, pair = epsilon_witness(ac)
    if eps > tol:
        raise PreconditionError(f"structure is not 0-categoric: epsilon = {eps!r} at {pair!r}")
    table = {}
    for (x, y, z), blk in ac._blocks.items():
        A, B, C = ac.hom(x, y), ac.hom(y, z), ac.hom(x, z)
        for i, j in itertools.product(range(len(A)), range(len(B))):
            cands = np.nonzero(blk[i, j] <= tol)[0]
            if len(cands) > 1:
                h, h2 = C[cands[0]], C[cands[1]]
                raise SeparationError(
                    f"composite of ({A[i]!r}, {B[j]!r}) is ambiguous: {h!r} and {h2!r} "
                    f"at phi = {phi(ac, h, h2)!r}")
            table[A[i], B[j]] = C[cands[0]]
    rep = check_composition_table(ac, table, 3 * tol)
    if not rep.passed:
        raise PreconditionError(f"extracted composition is not a metrized category: {rep.axioms_failed()}")
    return table


def check_composition_table(ac: ACStructure, table: Mapping, tolerance: float) -> ValidationReport:
    """Unit, associativity and nonexpansiveness of ``table`` w.r.t. the structure's phi."""
    rep = ValidationReport()
    for x, y in itertools.product(ac.objects, repeat=2):
        for f in ac.hom(x, y):
            rep.tick("unit")
            for e, key in ((ac.identity(x), (ac.identity(x), f)), (ac.identity(y), (f, ac.identity(y)))):
                if table[key] != f:
                    rep.add("unit", key, 1.0, 0.0)
    for x, y, z, w in itertools.product(ac.objects, repeat=4):
        for f, g, h in itertools.product(ac.hom(x, y), ac.hom(y, z), ac.hom(z, w)):
            rep.tick("associativity")
            if table[table[f, g], h] != table[f, table[g, h]]:
                rep.add("associativity", (f, g, h), 1.0, 0.0)
    for x, y, z in itertools.product(ac.objects, repeat=3):
        A, B = ac.hom(x, y), ac.hom(y, z)
        if not A or not B:
            continue
        PA, PB = phi_matrix(ac, x, y), phi_matrix(ac, y, z)
        PC = phi_matrix(ac, x, z)
        C = ac.hom(x, z)
        comp = np.array([[ac.position(table[f, g]) for g in B] for f in A])
        lhs = PC[comp[:, :, None, None], comp[None, None, :, :]]
        rhs = PA[:, None, :, None] + PB[None, :, None, :]
        _record(rep, "nonexpansive", lhs, rhs, tolerance, _labeler(A, B, A, B))
    return rep


# -- amplitude ----------------------------------------------------------------


def _alpha_vec(ac: ACStructure, alpha, x, y) -> np.ndarray:
    if alpha is None:
        return np.ones(len(ac.hom(x, y)))
    if isinstance(alpha, (int, float)):
        return np.full(len(ac.hom(x, y)), float(alpha))
    try:
        return np.array([float(alpha[f]) for f in ac.hom(x, y)])
    except KeyError as e:
        raise DomainError(f"amplitude undefined on arrow {e.args[0]!r}") from None


def check_amplitude(ac: ACStructure, alpha: Mapping, tolerance: float | None = None,
                    witness_cap: int = DEFAULT_WITNESS_CAP) -> ValidationReport:
    """Reflexivity, the (permuted) triangle inequalities and their consequences."""
    _require_identities(ac, "check_amplitude")
    tol = _tol(ac, tolerance)
    rep = ValidationReport(witness_cap=witness_cap)
    H = ac.hom
    for x in ac.objects:
        e = ac.identity(x)
        a = float(alpha[e]) if e in alpha else None
        if a is None:
            raise DomainError(f"amplitude undefined on arrow {e!r}")
        rep.tick("reflexivity")
        if abs(a) > tol:
            rep.add("reflexivity", (e,), abs(a), 0.0)
    for (x, y, z), blk in ac._blocks.items():
        if blk.size == 0:
            continue
        af = _alpha_vec(ac, alpha, x, y)[:, None, None]
        ag = _alpha_vec(ac, alpha, y, z)[None, :, None]
        ah = _alpha_vec(ac, alpha, x, z)[None, None, :]
        lab = _labeler(H(x, y), H(y, z), H(x, z))
        _record(rep, "triangle", ah, af + ag + blk, tol, lab)
        _record(rep, "permuted_first", af, ag + ah + blk, tol, lab)
        _record(rep, "permuted_second", ag, af + ah + blk, tol, lab)
    for x, y in itertools.product(ac.objects, repeat=2):
        A = H(x, y)
        if not A:
            continue
        av = _alpha_vec(ac, alpha, x, y)
        _record(rep, "nonnegative", np.zeros(()), av, tol, _labeler(A))
        P = phi_matrix(ac, x, y)
        _record(rep, "continuity", np.abs(av[:, None] - av[None, :]), P, tol, _labeler(A, A))
    return rep


# -- transitivity -------------------------------------------------------------


def _scaled(alpha: np.ndarray, inf_term: np.ndarray) -> np.ndarray:
    # 0 * inf = 0 by convention
    with np.errstate(invalid="ignore"):
        out = alpha * inf_term
    return np.where(alpha == 0, 0.0, out)


def _minplus_inner(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """``R[i, j, k, l] = min_a P[i, j, a] + Q[a, k, l]``; +inf over an empty ``a``."""
    if P.shape[2] == 0:
        return np.full(P.shape[:2] + Q.shape[1:], INF)
    return (P[:, :, :, None, None] + Q[None, None, :, :, :]).min(axis=2)


def check_transitivity(ac: ACStructure, alpha: Mapping | float | None = None, side: str = "both",
                       tolerance: float | None = None,
                       witness_cap: int = DEFAULT_WITNESS_CAP) -> ValidationReport:
    """Left/right transitivity with respect to ``alpha`` (``None`` means alpha = 1).

    The report's ``notes['max_gap']`` holds the largest violation found
    (negative when every instance holds with room to spare).
    """
    if side not in ("left", "right", "both"):
        raise DomainError(f"side must be left, right or both, not {side!r}")
    tol = _tol(ac, tolerance)
    rep = ValidationReport(witness_cap=witness_cap)
    H = ac.hom
    max_gap = -INF
    for x, y, z, w in itertools.product(ac.objects, repeat=4):
        if not (H(x, y) and H(y, z) and H(z, w) and H(x, w)):
            continue
        if side in ("left", "both") and H(y, w):
            # f g h k l ; a in A(x,z)
            inner = _minplus_inner(ac.block(x, y, z), ac.block(x, z, w))  # f g h l
            ak = _alpha_vec(ac, alpha, y, w)
            lhs = _scaled(ak[None, None, None, :, None], inner[:, :, :, None, :])
            rhs = ac.block(y, z, w)[None, :, :, :, None] + ac.block(x, y, w)[:, None, None, :, :]
            _record(rep, "left_transitivity", lhs, rhs, tol,
                    _labeler(H(x, y), H(y, z), H(z, w), H(y, w), H(x, w)))
            max_gap = max(max_gap, _max_gap(lhs, rhs))
        if side in ("right", "both") and H(x, z):
            # f g h k l ; a in A(y,w)
            Q = ac.block(x, y, w)  # f a l
            G = ac.block(y, z, w)  # g h a
            if G.shape[2] == 0:
                inner = np.full((len(H(x, y)), len(H(y, z)), len(H(z, w)), len(H(x, w))), INF)
            else:
                inner = (G[None, :, :, :, None] + Q[:, None, None, :, :]).min(axis=3)  # f g h l
            ak = _alpha_vec(ac, alpha, x, z)
            lhs = _scaled(ak[None, None, None, :, None], inner[:, :, :, None, :])
            rhs = ac.block(x, y, z)[:, :, None, :, None] + ac.block(x, z, w).transpose(1, 0, 2)[None, None]
            _record(rep, "right_transitivity", lhs, rhs, tol,
                    _labeler(H(x, y), H(y, z), H(z, w), H(x, z), H(x, w)))
            max_gap = max(max_gap, _max_gap(lhs, rhs))
    rep.notes["max_gap"] = max_gap if max_gap != -INF else 0.0
    return rep


def _max_gap(lhs, rhs) -> float:
    lhs, rhs = np.broadcast_arrays(lhs, rhs)
    if lhs.size == 0:
        return -INF
    with np.errstate(invalid="ignore"):
        gap = np.where(np.isposinf(lhs) & np.isposinf(rhs), 0.0, lhs - rhs)
    return float(gap.max())


# -- graph hypothesis ---------------------------------------------------------


def graphcomp_witness(ac: ACStructure) -> tuple | None:
    """First ``(x, y, z)`` with A(x,y), A(y,z) nonempty but A(x,z) empty."""
    for x, y, z in itertools.product(ac.objects, repeat=3):
        if ac.hom(x, y) and ac.hom(y, z) and not ac.hom(x, z):
            return x, y, z
    return None


def check_graphcomp(ac: ACStructure) -> bool:
    return graphcomp_witness(ac) is None


# -- functors and natural transformations -------------------------------------


@dataclass(frozen=True)
class PrefunctorialMap:
    """Object map plus arrow map between two graphs."""

    objects: Mapping
    arrows: Mapping = field(default_factory=dict)

    def __call__(self, f):
        return self.arrows[f]

    def on_object(self, x):
        return self.objects[x]

    @classmethod
    def identity(cls, ac: ACStructure) -> "PrefunctorialMap":
        return cls({x: x for x in ac.objects}, {a.id: a.id for a in ac.arrows})


def _check_typed(F: PrefunctorialMap, src: ACStructure, dst: ACStructure) -> None:
    for x in src.objects:
        if x not in F.objects or F.objects[x] not in set(dst.objects):
            raise DomainError(f"object map undefined or out of range at {x!r}")
    for a in src.arrows:
        if a.id not in F.arrows:
            raise DomainError(f"arrow map undefined at {a.id!r}")
        b = dst.arrow(F.arrows[a.id])
        if (b.src, b.dst) != (F.objects[a.src], F.objects[a.dst]):
            raise DomainError(f"F({a.id!r}) = {b.id!r} is ill-typed")


def _gather(dst: ACStructure, fx, fy, fz, A, B, C) -> np.ndarray:
    pa = [dst.position(a) for a in A]
    pb = [dst.position(b) for b in B]
    pc = [dst.position(c) for c in C]
    return dst.block(fx, fy, fz)[np.ix_(pa, pb, pc)]


def check_functor(F: PrefunctorialMap, src: ACStructure, dst: ACStructure, k: float = 1.0,
                  tolerance: float | None = None,
                  witness_cap: int = DEFAULT_WITNESS_CAP) -> ValidationReport:
    """Unitality and ``d(Ff, Fg, Fh) <= k d(f, g, h)``, plus the implied phi bound."""
    _check_typed(F, src, dst)
    tol = _tol(src, tolerance)
    rep = ValidationReport(witness_cap=witness_cap)
    if src.has_identities:
        _require_identities(dst, "check_functor")
        for x in src.objects:
            rep.tick("unital")
            e = src.identity(x)
            if F(e) != dst.identity(F.on_object(x)):
                rep.add("unital", (e,), 1.0, 0.0)
    H = src.hom
    for (x, y, z), blk in src._blocks.items():
        if blk.size == 0:
            continue
        A, B, C = H(x, y), H(y, z), H(x, z)
        img = _gather(dst, F.on_object(x), F.on_object(y), F.on_object(z),
                      [F(a) for a in A], [F(b) for b in B], [F(c) for c in C])
        _record(rep, "functoriality", img, k * blk, tol, _labeler(A, B, C))
    if src.has_identities and dst.has_identities:
        for x, y in itertools.product(src.objects, repeat=2):
            A = H(x, y)
            if not A:
                continue
            pa = [dst.position(F(a)) for a in A]
            P2 = phi_matrix(dst, F.on_object(x), F.on_object(y))[np.ix_(pa, pa)]
            _record(rep, "lipschitz", P2, k * phi_matrix(src, x, y), tol, _labeler(A, A))
    return rep


def check_knatural(F: PrefunctorialMap, G: PrefunctorialMap, eta: Mapping, src: ACStructure,
                   dst: ACStructure, k: float = 1.0, tolerance: float | None = None,
                   witness_cap: int = DEFAULT_WITNESS_CAP) -> ValidationReport:
    """Check ``d(Ff, eta g, eta h) <= k d(f,g,h)`` and ``d(eta f, Gg, eta h) <= k d(f,g,h)``."""
    _check_typed(F, src, dst)
    _check_typed(G, src, dst)
    for a in src.arrows:
        if a.id not in eta:
            raise DomainError(f"eta undefined at {a.id!r}")
        b = dst.arrow(eta[a.id])
        if (b.src, b.dst) != (F.on_object(a.src), G.on_object(a.dst)):
            raise DomainError(f"eta({a.id!r}) = {b.id!r} is not an arrow F{a.src!r} -> G{a.dst!r}")
    tol = _tol(src, tolerance)
    rep = ValidationReport(witness_cap=witness_cap)
    H = src.hom
    for (x, y, z), blk in src._blocks.items():
        if blk.size == 0:
            continue
        A, B, C = H(x, y), H(y, z), H(x, z)
        eB, eC = [eta[b] for b in B], [eta[c] for c in C]
        first = _gather(dst, F.on_object(x), F.on_object(y), G.on_object(z),
                        [F(a) for a in A], eB, eC)
        second = _gather(dst, F.on_object(x), G.on_object(y), G.on_object(z),
                         [eta[a] for a in A], [G(b) for b in B], eC)
        lab = _labeler(A, B, C)
        _record(rep, "naturality_left", first, k * blk, tol, lab)
        _record(rep, "naturality_right", second, k * blk, tol, lab)
    return rep


# -- cone ---------------------------------------------------------------------


def cone_combine(d1: ACStructure, d2: ACStructure, c1: float, c2: float) -> ACStructure:
    """``c1 * d1 + c2 * d2`` on a shared graph."""
    if not d1.same_graph(d2):
        raise DomainError("cone_combine needs structures on the same graph with the same identities")
    if c1 < 0 or c2 < 0:
        raise DomainError("cone coefficients must be nonnegative")
    blocks = {k: c1 * d1._blocks[k] + c2 * d2._blocks[k] for k in d1._blocks}
    return ACStructure._from_blocks(d1.objects, d1.arrows, d1.identities, blocks,
                                    max(d1.tolerance, d2.tolerance))


# -- amplitude type -----------------------------------------------------------


def constant_amplitude(ac: ACStructure, value: float = 1.0) -> dict:
    """``alpha == value`` off identities, 0 on them."""
    ids = set(ac.identities.values()) if ac.has_identities else set()
    return {a.id: (0.0 if a.id in ids else float(value)) for a in ac.arrows}
