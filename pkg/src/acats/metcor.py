"""Finite metric spaces, metric correspondences and their min-plus composition."""

from __future__ import annotations

import itertools
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .core import ACStructure, Arrow, _labeler, _record
from .report import (
    DEFAULT_TOLERANCE,
    DEFAULT_WITNESS_CAP,
    DomainError,
    PreconditionError,
    StructureError,
    ValidationReport,
)


class FiniteMetricSpace:
    """Labelled points with a distance matrix.

    The metric axioms are checked on construction unless ``check=False``.
    """

    def __init__(self, points: Sequence[Hashable], dist, tolerance: float = DEFAULT_TOLERANCE,
                 check: bool = True):
        self.points = tuple(points)
        n = len(self.points)
        D = np.array(dist, dtype=float).reshape(n, n)
        D.setflags(write=False)
        self.dist = D
        self.tolerance = float(tolerance)
        if check:
            rep = check_metric(self)
            if not rep.passed:
                raise StructureError(f"not a metric space: {rep.axioms_failed()}")

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, FiniteMetricSpace):
            return NotImplemented
        return self.points == other.points and np.array_equal(self.dist, other.dist)

    __hash__ = None

    def __repr__(self):
        return f"FiniteMetricSpace({list(self.points)!r})"


def check_metric(space: FiniteMetricSpace, tolerance: float | None = None) -> ValidationReport:
    tol = space.tolerance if tolerance is None else tolerance
    D = space.dist
    P = space.points
    rep = ValidationReport()
    z = np.zeros(())
    _record(rep, "zero_diagonal", np.abs(np.diag(D)), z, tol, _labeler(P))
    _record(rep, "symmetric", np.abs(D - D.T), z, tol, _labeler(P, P))
    _record(rep, "nonnegative", z, D, tol, _labeler(P, P))
    _record(rep, "triangle", D[:, None, :], D[:, :, None] + D[None, :, :], tol, _labeler(P, P, P))
    return rep


class Correspondence:
    """A real matrix over ``source.points x target.points``."""

    def __init__(self, source: FiniteMetricSpace, target: FiniteMetricSpace, values):
        self.source = source
        self.target = target
        V = np.array(values, dtype=float)
        if V.size == 0:
            V = V.reshape(len(source), len(target))
        if V.shape != (len(source), len(target)):
            raise DomainError(f"value matrix has shape {V.shape}, expected {(len(source), len(target))}")
        V.setflags(write=False)
        self.values = V

    def __call__(self, x: int, y: int) -> float:
        return float(self.values[x, y])

    def __eq__(self, other):
        if not isinstance(other, Correspondence):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and np.array_equal(self.values, other.values))

    __hash__ = None

    def __repr__(self):
        return f"Correspondence({len(self.source)}x{len(self.target)})"


def validate_correspondence(f: Correspondence, k: float = 1.0, functional: bool = False,
                            tolerance: float | None = None,
                            witness_cap: int = DEFAULT_WITNESS_CAP) -> ValidationReport:
    """MC0, MC1 (with contraction constant ``k``), MC2 and optionally MF."""
    if k <= 0:
        raise DomainError("k must be positive")
    tol = f.source.tolerance if tolerance is None else tolerance
    rep = ValidationReport(witness_cap=witness_cap)
    X, Y = f.source, f.target
    F = f.values
    rep.tick("MC0")
    if len(X) and not len(Y):
        rep.add("MC0", (), 1.0, 0.0)
    # f(x,y) <= k d_X(x,x') + f(x',y), axes (x, x', y)
    _record(rep, "MC1", F[:, None, :], k * X.dist[:, :, None] + F[None, :, :], tol,
            _labeler(X.points, X.points, Y.points))
    # f(x,y) <= f(x,y') + d_Y(y,y'), axes (x, y, y')
    _record(rep, "MC2", F[:, :, None], F[:, None, :] + Y.dist[None, :, :], tol,
            _labeler(X.points, Y.points, Y.points))
    if functional:
        # d_Y(y,y') <= f(x,y) + f(x,y')
        _record(rep, "MF", Y.dist[None, :, :], F[:, :, None] + F[:, None, :], tol,
                _labeler(X.points, Y.points, Y.points))
    return rep


def _same_space(a: FiniteMetricSpace, b: FiniteMetricSpace) -> bool:
    return a is b or a == b


def compose(f: Correspondence, g: Correspondence, check: bool = False) -> Correspondence:
    """``(g o f)(x, z) = min_y f(x, y) + g(y, z)``."""
    if not _same_space(f.target, g.source):
        raise DomainError("middle spaces differ")
    X, Y, Z = f.source, f.target, g.target
    if len(X) and not len(Y):
        raise PreconditionError("MC0 violated: source nonempty but middle space empty")
    if not len(X):
        out = Correspondence(X, Z, np.zeros((0, len(Z))))
    else:
        out = Correspondence(X, Z, (f.values[:, :, None] + g.values[None, :, :]).min(axis=1))
    if check:
        rep = validate_correspondence(out)
        if not rep.passed:
            raise PreconditionError(f"composite fails {rep.axioms_failed()}")
    return out


def identity(X: FiniteMetricSpace) -> Correspondence:
    """The identity correspondence, ``i_X(x, x') = d_X(x, x')``."""
    return Correspondence(X, X, X.dist)


def corr_distance(f: Correspondence, f2: Correspondence) -> float:
    """Sup-distance between parallel correspondences."""
    if not (_same_space(f.source, f2.source) and _same_space(f.target, f2.target)):
        raise DomainError("correspondences are not parallel")
    if f.values.size == 0:
        return 0.0
    return float(np.abs(f.values - f2.values).max())


def tri_distance(f: Correspondence, g: Correspondence, h: Correspondence) -> float:
    """How far ``h`` is from ``g o f`` in sup-distance."""
    if not (_same_space(f.source, h.source) and _same_space(g.target, h.target)):
        raise DomainError("h is not parallel to g o f")
    return corr_distance(compose(f, g), h)


def within_d1_d2(f: Correspondence, g: Correspondence, h: Correspondence, eps: float,
                 strict: bool = True) -> bool:
    """Enumerative check of the two-sided characterization of ``tri_distance``.

    (d1) every ``h(x,z) <= f(x,y) + g(y,z) + eps``; (d2) each ``(x, z)``
    has some ``y`` with ``f(x,y) + g(y,z) <= h(x,z) + eps``. With
    ``strict=True`` both comparisons are strict, which characterizes
    ``tri_distance < eps`` exactly; otherwise ``tri_distance <= eps``.
    """
    le = (lambda a, b: a < b) if strict else (lambda a, b: a <= b)
    F, G, H = f.values, g.values, h.values
    nx, ny = F.shape
    nz = G.shape[1]
    for x in range(nx):
        for z in range(nz):
            for y in range(ny):
                if not le(H[x, z], F[x, y] + G[y, z] + eps):
                    return False
            if not any(le(F[x, y] + G[y, z], H[x, z] + eps) for y in range(ny)):
                return False
    return True


def metcor_ac(spaces: Mapping[Hashable, FiniteMetricSpace],
              correspondences: Mapping[Hashable, tuple], tolerance: float = DEFAULT_TOLERANCE) -> ACStructure:
    """Assemble finitely many correspondences into an AC structure via ``tri_distance``.

    ``correspondences`` maps an arrow id to ``(src, dst, Correspondence)``.
    Identity correspondences are added for every space under the id
    ``"id:<name>"`` unless an equal correspondence is already present.
    """
    arrows = []
    corr = {}
    identities = {}
    for name, (s, t, c) in correspondences.items():
        if not (_same_space(c.source, spaces[s]) and _same_space(c.target, spaces[t])):
            raise DomainError(f"correspondence {name!r} does not match its declared spaces")
        arrows.append(Arrow(name, s, t))
        corr[name] = c
    for s, X in spaces.items():
        idc = identity(X)
        found = next((n for n, (a, b, c) in correspondences.items() if a == s and b == s and c == idc), None)
        if found is None:
            found = f"id:{s}"
            arrows.append(Arrow(found, s, s))
            corr[found] = idc
        identities[s] = found
    return ACStructure(list(spaces), arrows, identities,
                       lambda f, g, h: tri_distance(corr[f], corr[g], corr[h]), tolerance)


def project_correspondence(X: FiniteMetricSpace, Y: FiniteMetricSpace, values) -> Correspondence:
    """Largest correspondence below ``values`` satisfying MC1 and MC2 (min-plus sandwich)."""
    raw = Correspondence(X, Y, values)
    return compose(compose(identity(X), raw), identity(Y))


def all_pairs_compositions(items: Iterable[tuple]) -> list[tuple]:
    """Given ``(src, dst, Correspondence)`` triples, return every pairwise composite."""
    items = list(items)
    out = []
    for (s1, t1, c1), (s2, t2, c2) in itertools.product(items, repeat=2):
        if t1 == s2:
            out.append((s1, t2, compose(c1, c2)))
    return out
