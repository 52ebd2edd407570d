"""2-metric spaces, the coarse-graph AC structure, and piecewise-linear paths."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ACStructure, Arrow, _labeler, _record, validate
from .free import FunctorialDistanceEstimate, MoveGraphConfig, PathWord, dmax_estimate
from .report import DEFAULT_TOLERANCE, DomainError, PreconditionError, ValidationReport


def triangle_area(x, y, z) -> float:
    """Area of the triangle ``xyz`` in any dimension (Gram determinant form)."""
    x, y, z = (np.asarray(p, dtype=float) for p in (x, y, z))
    if not (x.shape == y.shape == z.shape) or x.ndim != 1:
        raise DomainError("points must be vectors of the same dimension")
    u, v = y - x, z - x
    # |u|^2 |v|^2 - (u.v)^2 as a sum of squared 2x2 minors: same value, no cancellation
    M = np.outer(u, v)
    minors = (M - M.T)[np.triu_indices(len(u), 1)]
    return 0.5 * float(np.sqrt(minors @ minors))


class TwoMetric:
    """A symmetric triple function on labelled points, stored as a dense cube."""

    def __init__(self, labels: Sequence, table, tolerance: float = DEFAULT_TOLERANCE, coords=None):
        self.labels = tuple(labels)
        n = len(self.labels)
        T = np.array(table, dtype=float).reshape(n, n, n)
        T.setflags(write=False)
        self.table = T
        self.tolerance = float(tolerance)
        self.coords = None if coords is None else np.array(coords, dtype=float)

    @classmethod
    def from_points(cls, points, labels: Sequence | None = None, tolerance: float = DEFAULT_TOLERANCE) -> "TwoMetric":
        P = np.array(points, dtype=float)
        if P.ndim != 2:
            raise DomainError("points must be an (n, dim) array")
        n = len(P)
        labels = tuple(labels) if labels is not None else tuple(f"p{i}" for i in range(n))
        T = np.zeros((n, n, n))
        for i, j, k in itertools.combinations(range(n), 3):
            a = triangle_area(P[i], P[j], P[k])
            for p in itertools.permutations((i, j, k)):
                T[p] = a
        return cls(labels, T, tolerance, coords=P)

    def __len__(self):
        return len(self.labels)

    def __call__(self, i, j, k) -> float:
        return float(self.table[i, j, k])

    def with_entry(self, i: int, j: int, k: int, value: float) -> "TwoMetric":
        """Copy with the unordered triple ``{i, j, k}`` set to ``value``."""
        T = np.array(self.table)
        for p in itertools.permutations((i, j, k)):
            T[p] = value
        return TwoMetric(self.labels, T, self.tolerance, self.coords)

    def phi(self) -> np.ndarray:
        """``phi(x, y) = max_c d(x, y, c)``."""
        if not len(self):
            return np.zeros((0, 0))
        return self.table.max(axis=2)


def check_2metric_axioms(tm: TwoMetric, tolerance: float | None = None) -> ValidationReport:
    """Symmetry, nonnegativity, vanishing on repeated points, tetrahedral inequality."""
    tol = tm.tolerance if tolerance is None else tolerance
    T = tm.table
    L = tm.labels
    rep = ValidationReport()
    z = np.zeros(())
    lab3 = _labeler(L, L, L)
    for perm in itertools.permutations(range(3)):
        if perm != (0, 1, 2):
            _record(rep, "symmetry", np.abs(T - T.transpose(perm)), z, tol, lab3)
    _record(rep, "nonnegativity", z, T, tol, lab3)
    n = len(L)
    if n:
        idx = np.arange(n)
        _record(rep, "zero_on_repeats", np.abs(T[idx, idx, :]), z, tol, _labeler(L, L))
    # d(x,y,w) <= d(x,y,z) + d(y,z,w) + d(x,z,w), axes (x, y, z, w)
    lhs = T[:, :, None, :]
    rhs = T[:, :, :, None] + T[None, :, :, :] + T[:, None, :, :]
    _record(rep, "tetrahedral", lhs, rhs, tol, _labeler(L, L, L, L))
    rep.notes["bound"] = float(T.max()) if T.size else 0.0
    return rep


def coarse_arrow(x, y) -> str:
    return f"*{x},{y}"


def two_metric_to_ac(tm: TwoMetric, check: bool = True) -> tuple[ACStructure, dict]:
    """Coarse-graph AC structure ``d(*xy, *yz, *xz) = d_X(x, y, z)`` with amplitude ``phi``."""
    if check:
        rep = check_2metric_axioms(tm)
        if not rep.passed:
            raise PreconditionError(f"not a 2-metric: {rep.axioms_failed()}")
    L = tm.labels
    arrows = [Arrow(coarse_arrow(x, y), x, y) for x, y in itertools.product(L, repeat=2)]
    identities = {x: coarse_arrow(x, x) for x in L}
    n = len(L)
    blocks = {(L[i], L[j], L[k]): np.full((1, 1, 1), tm.table[i, j, k])
              for i, j, k in itertools.product(range(n), repeat=3)}
    ac = ACStructure._from_blocks(L, arrows, identities, blocks, tm.tolerance)
    P = tm.phi()
    alpha = {coarse_arrow(L[i], L[j]): float(P[i, j]) for i, j in itertools.product(range(n), repeat=2)}
    return ac, alpha


def as1_transitivity_gap(tm: TwoMetric) -> float:
    """Largest ``d(x,y,w) phi(y,z) - d(x,y,z) - d(y,z,w)`` over 4-tuples (<= 0 when transitive)."""
    T = tm.table
    if not T.size:
        return 0.0
    P = tm.phi()
    # axes (x, y, z, w)
    lhs = T[:, :, None, :] * P[None, :, :, None]
    rhs = T[:, :, :, None] + T[None, :, :, :]
    return float((lhs - rhs).max())


@dataclass(frozen=True)
class PLPath:
    """Vertex sequence ``p_0 .. p_k`` of a piecewise-linear path."""

    vertices: tuple

    def __post_init__(self):
        V = np.array(self.vertices, dtype=float)
        if V.ndim != 2 or not len(V):
            raise DomainError("a path needs at least one vertex")
        if not np.all(np.isfinite(V)):
            raise DomainError("path vertices must be finite")
        object.__setattr__(self, "vertices", tuple(tuple(map(float, v)) for v in V))

    @property
    def dimension(self) -> int:
        return len(self.vertices[0])

    def array(self) -> np.ndarray:
        return np.array(self.vertices)

    @property
    def closed(self) -> bool:
        return len(self.vertices) > 1 and self.vertices[0] == self.vertices[-1]


@dataclass(frozen=True)
class PLPathSet:
    """Paths plus optional extra vertices for the filling search."""

    paths: tuple
    extra_points: tuple = ()


def shoelace_area(path) -> float:
    """Enclosed area of a closed planar polygon (first vertex repeated at the end)."""
    P = path.array() if isinstance(path, PLPath) else np.array(path, dtype=float)
    if P.ndim != 2 or P.shape[1] != 2:
        raise DomainError("shoelace_area needs planar vertices")
    if len(P) < 2 or not np.array_equal(P[0], P[-1]):
        raise DomainError("path is not closed")
    x, y = P[:, 0], P[:, 1]
    return 0.5 * abs(float(np.dot(x[:-1], y[1:]) - np.dot(x[1:], y[:-1])))


def _vertex_index(points: np.ndarray, v, tol: float) -> int:
    hits = np.nonzero(np.all(np.abs(points - np.asarray(v, dtype=float)) <= tol, axis=1))[0]
    if not len(hits):
        raise DomainError(f"path vertex {tuple(v)} is not in the point set")
    return int(hits[0])


def path_word(tm: TwoMetric, path, tolerance: float = 1e-12) -> PathWord:
    """The coarse-graph word of a vertex sequence over ``tm``'s points."""
    if tm.coords is None:
        raise DomainError("two-metric has no coordinates")
    idx = [_vertex_index(tm.coords, v, tolerance) for v in path]
    if not idx:
        raise DomainError("empty path")
    L = tm.labels
    letters = tuple(coarse_arrow(L[i], L[j]) for i, j in zip(idx, idx[1:]))
    return PathWord(L[idx[0]], L[idx[-1]], letters)


def plpath_dmax(points, a, b, cfg: MoveGraphConfig | None = None,
                extra_points=None) -> FunctorialDistanceEstimate:
    """Rewrite-distance estimate between two PL paths using triangles on a finite vertex set.

    ``points`` defaults to the union of the paths' vertices; ``extra_points``
    are appended (Steiner points). The value bounds from above the minimal
    area of a triangulated filling using those vertices.
    """
    a = a.array() if isinstance(a, PLPath) else np.array(a, dtype=float)
    b = b.array() if isinstance(b, PLPath) else np.array(b, dtype=float)
    if not (np.array_equal(a[0], b[0]) and np.array_equal(a[-1], b[-1])):
        raise DomainError("paths do not share endpoints")
    if points is None:
        pts = []
        for v in itertools.chain(a, b):
            if not any(np.array_equal(v, p) for p in pts):
                pts.append(v)
        points = np.array(pts)
    points = np.array(points, dtype=float)
    if extra_points is not None and len(extra_points):
        points = np.vstack([points, np.array(extra_points, dtype=float)])
    tm = TwoMetric.from_points(points)
    ac, _ = two_metric_to_ac(tm, check=False)
    wa, wb = path_word(tm, a), path_word(tm, b)
    if cfg is None:
        cfg = MoveGraphConfig(max(len(wa), len(wb)) + 2)
    return dmax_estimate(ac, wa, wb, cfg)


def coarse_validate(tm: TwoMetric) -> ValidationReport:
    """``validate`` on the coarse AC structure without refusing invalid 2-metrics."""
    ac, _ = two_metric_to_ac(tm, check=False)
    return validate(ac)
