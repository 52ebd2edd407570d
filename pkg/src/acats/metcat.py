"""Finite (pseudo-)metrized categories and their induced AC structures."""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping

import numpy as np

from .core import ACStructure, Arrow, _labeler, _record, id_key
from .report import (
    DEFAULT_TOLERANCE,
    DEFAULT_WITNESS_CAP,
    DomainError,
    PreconditionError,
    StructureError,
    TruncationError,
    ValidationReport,
)


class MetrizedCategory:
    """A finite category with a pseudometric on each hom set.

    ``compose`` maps ``(f, g)`` to ``g o f`` (diagrammatic order: ``f`` first).
    ``phi`` is either a mapping ``{(a, b): value}`` over parallel pairs or a
    mapping ``{(x, y): matrix}`` in hom order (see :meth:`from_matrices`).

    A ``partial`` category may leave some composites undefined; asking for
    one raises :class:`TruncationError`.
    """

    def __init__(self, objects, arrows, identities, compose: Mapping, phi, tolerance=DEFAULT_TOLERANCE,
                 partial: bool = False):
        self._graph = ACStructure._from_blocks(objects, arrows, identities,
                                               _zero_blocks(objects, arrows), tolerance)
        self.objects = self._graph.objects
        self.arrows = self._graph.arrows
        self.identities = dict(identities)
        self.tolerance = float(tolerance)
        self.partial = partial
        table = {}
        for (f, g), h in compose.items():
            self._graph.arrow(f), self._graph.arrow(g), self._graph.arrow(h)
            table[f, g] = h
        if not partial:
            for f, g in self._graph.composable_pairs():
                if (f, g) not in table:
                    raise StructureError(f"composition undefined on ({f!r}, {g!r})")
        self._compose = table
        self._phi = {}
        for x, y in itertools.product(self.objects, repeat=2):
            A = self.hom(x, y)
            if isinstance(phi, _MatrixPhi):
                M = phi[x, y]
            elif callable(phi):
                M = [[phi(a, b) for b in A] for a in A]
            else:
                M = [[_pair(phi, a, b) for b in A] for a in A]
            M = np.array(M, dtype=float).reshape(len(A), len(A))
            M.setflags(write=False)
            self._phi[x, y] = M

    @classmethod
    def from_matrices(cls, objects, arrows, identities, compose, matrices: Mapping, tolerance=DEFAULT_TOLERANCE,
                      partial: bool = False) -> "MetrizedCategory":
        return cls(objects, arrows, identities, compose, _MatrixPhi(matrices), tolerance, partial)

    # -- accessors ------------------------------------------------------------

    def hom(self, x, y) -> tuple:
        return self._graph.hom(x, y)

    def arrow(self, f) -> Arrow:
        return self._graph.arrow(f)

    def position(self, f) -> int:
        return self._graph.position(f)

    def identity(self, x):
        return self.identities[x]

    def compose(self, f, g):
        """``g o f``."""
        try:
            return self._compose[f, g]
        except KeyError:
            F, G = self.arrow(f), self.arrow(g)
            if F.dst != G.src:
                raise DomainError(f"{f!r} and {g!r} are not composable") from None
            raise TruncationError(f"composite of ({f!r}, {g!r}) is not available") from None

    def has_composite(self, f, g) -> bool:
        return (f, g) in self._compose

    @property
    def composition(self) -> dict:
        return dict(self._compose)

    def phi(self, a, b) -> float:
        A, B = self.arrow(a), self.arrow(b)
        if (A.src, A.dst) != (B.src, B.dst):
            raise DomainError(f"{a!r} and {b!r} are not parallel")
        return float(self._phi[A.src, A.dst][self.position(a), self.position(b)])

    def phi_matrix(self, x, y) -> np.ndarray:
        return self._phi[x, y]

    def composable_pairs(self):
        return self._graph.composable_pairs()

    def __repr__(self):
        return f"MetrizedCategory({len(self.objects)} objects, {len(self.arrows)} arrows)"


class _MatrixPhi(dict):
    pass


def _pair(phi: Mapping, a, b) -> float:
    if (a, b) in phi:
        return phi[a, b]
    if (b, a) in phi:
        return phi[b, a]
    if a == b:
        return 0.0
    raise StructureError(f"phi undefined on ({a!r}, {b!r})")


def _zero_blocks(objects, arrows):
    objects = tuple(objects)
    arrows = [a if isinstance(a, Arrow) else Arrow(*a) for a in arrows]
    count = {(x, y): 0 for x in objects for y in objects}
    for a in arrows:
        if (a.src, a.dst) in count:
            count[a.src, a.dst] += 1
    return {(x, y, z): np.zeros((count[x, y], count[y, z], count[x, z]))
            for x, y, z in itertools.product(objects, repeat=3)}


def validate_metcat(mc: MetrizedCategory, tolerance: float | None = None,
                    witness_cap: int = DEFAULT_WITNESS_CAP) -> ValidationReport:
    """Category axioms, pseudometric axioms and nonexpansive composition.

    For a partial category only the defined composites are checked.
    """
    tol = mc.tolerance if tolerance is None else tolerance
    rep = ValidationReport(witness_cap=witness_cap)
    comp = mc._compose
    for (f, g), h in sorted(comp.items(), key=lambda kv: (id_key(kv[0][0]), id_key(kv[0][1]))):
        F, G, Hh = mc.arrow(f), mc.arrow(g), mc.arrow(h)
        rep.tick("typing")
        if F.dst != G.src or (Hh.src, Hh.dst) != (F.src, G.dst):
            rep.add("typing", (f, g, h), 1.0, 0.0)
    for a in mc.arrows:
        for key in ((mc.identity(a.src), a.id), (a.id, mc.identity(a.dst))):
            if key in comp:
                rep.tick("unit")
                if comp[key] != a.id:
                    rep.add("unit", key, 1.0, 0.0)
    for (f, g), fg in comp.items():
        G = mc.arrow(g)
        for w in mc.objects:
            for h in mc.hom(G.dst, w):
                if (fg, h) in comp and (g, h) in comp and (f, comp[g, h]) in comp:
                    rep.tick("associativity")
                    if comp[fg, h] != comp[f, comp[g, h]]:
                        rep.add("associativity", (f, g, h), 1.0, 0.0)
    for x, y in itertools.product(mc.objects, repeat=2):
        P = mc.phi_matrix(x, y)
        if P.size == 0:
            continue
        A = mc.hom(x, y)
        z = np.zeros(())
        _record(rep, "reflexive", np.abs(np.diag(P)), z, tol, _labeler(A))
        _record(rep, "symmetric", np.abs(P - P.T), z, tol, _labeler(A, A))
        _record(rep, "nonnegative", z, P, tol, _labeler(A, A))
        _record(rep, "triangle", P[:, None, :], P[:, :, None] + P[None, :, :], tol, _labeler(A, A, A))
    for x, y, z in itertools.product(mc.objects, repeat=3):
        A, B = mc.hom(x, y), mc.hom(y, z)
        if not A or not B:
            continue
        PA, PB, PC = mc.phi_matrix(x, y), mc.phi_matrix(y, z), mc.phi_matrix(x, z)
        pairs = [(i, j) for i, j in itertools.product(range(len(A)), range(len(B))) if (A[i], B[j]) in comp]
        if not pairs:
            continue
        ii = np.array([p[0] for p in pairs])
        jj = np.array([p[1] for p in pairs])
        cc = np.array([mc.position(comp[A[i], B[j]]) for i, j in pairs])
        lhs = PC[cc[:, None], cc[None, :]]
        rhs = PA[ii[:, None], ii[None, :]] + PB[jj[:, None], jj[None, :]]
        labels = [(A[i], B[j]) for i, j in pairs]
        _record(rep, "nonexpansive", lhs, rhs, tol, lambda idx: labels[idx[0]] + labels[idx[1]])
    return rep


def _require_valid(mc: MetrizedCategory) -> None:
    rep = validate_metcat(mc)
    if not rep.passed:
        raise PreconditionError(f"metrized category fails {rep.axioms_failed()}")


def induce_ac(mc: MetrizedCategory, check: bool = True) -> ACStructure:
    """The AC structure ``d(f, g, h) = phi(g o f, h)``."""
    if mc.partial:
        raise PreconditionError("induce_ac needs a total composition")
    if check:
        _require_valid(mc)
    g = mc._graph
    blocks = {}
    for x, y, z in itertools.product(mc.objects, repeat=3):
        A, B, C = g.hom(x, y), g.hom(y, z), g.hom(x, z)
        if not (A and B and C):
            blocks[x, y, z] = np.zeros((len(A), len(B), len(C)))
            continue
        comp = np.array([[mc.position(mc._compose[f, h]) for h in B] for f in A])
        blocks[x, y, z] = mc.phi_matrix(x, z)[comp]
    return ACStructure._from_blocks(mc.objects, mc.arrows, mc.identities, blocks, mc.tolerance)


def separate_metcat(mc: MetrizedCategory, tolerance: float | None = None) -> tuple[MetrizedCategory, dict]:
    """Quotient by ``phi == 0`` (within tolerance); returns the quotient and the class map."""
    _require_valid(mc)
    tol = mc.tolerance if tolerance is None else tolerance
    mapping = {}
    for x, y in itertools.product(mc.objects, repeat=2):
        A = mc.hom(x, y)
        P = mc.phi_matrix(x, y)
        parent = list(range(len(A)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i, j in zip(*np.nonzero(P <= tol)):
            parent[find(i)] = find(j)
        groups: dict = {}
        for i in range(len(A)):
            groups.setdefault(find(i), []).append(A[i])
        for members in groups.values():
            rep = min(members, key=id_key)
            for m in members:
                mapping[m] = rep
    reps = set(mapping.values())
    arrows = [a for a in mc.arrows if a.id in reps]
    compose = {(f, g): mapping[mc._compose[f, g]] for (f, g) in mc._compose if f in reps and g in reps}
    matrices = {}
    for x, y in itertools.product(mc.objects, repeat=2):
        keep = [i for i, a in enumerate(mc.hom(x, y)) if a in reps]
        matrices[x, y] = mc.phi_matrix(x, y)[np.ix_(keep, keep)]
    identities = {x: mapping[e] for x, e in mc.identities.items()}
    out = MetrizedCategory.from_matrices(mc.objects, arrows, identities, compose, matrices, mc.tolerance)
    return out, mapping


def sub_ac(mc: MetrizedCategory, subsets: Iterable | Mapping) -> ACStructure:
    """Induced AC structure restricted to chosen arrows (identities required)."""
    if isinstance(subsets, Mapping):
        keep = set(itertools.chain.from_iterable(subsets.values()))
    else:
        keep = set(subsets)
    for x, e in mc.identities.items():
        if e not in keep:
            raise DomainError(f"subset for ({x!r}, {x!r}) lacks the identity {e!r}")
    return induce_ac(mc).restrict(keep)

