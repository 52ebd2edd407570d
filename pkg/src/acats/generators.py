"""Seeded generators for test and CLI instances."""

from __future__ import annotations

import functools
import itertools

import numpy as np

from .core import ACStructure, Arrow
from .metcat import MetrizedCategory
from .metcor import Correspondence, FiniteMetricSpace, project_correspondence
from .geometry import TwoMetric
from .report import DEFAULT_TOLERANCE, DomainError


def finite_example(u: float, v: float, phi: float = 1.0, tolerance: float = DEFAULT_TOLERANCE) -> ACStructure:
    """One object, arrows ``1`` (identity) and ``e``, with free parameters ``u = d(e,e,e)``, ``v = d(e,e,1)``."""
    d = {
        (1, 1, 1): 0.0, (1, 1, "e"): phi, (1, "e", 1): phi, ("e", 1, 1): phi,
        (1, "e", "e"): 0.0, ("e", 1, "e"): 0.0, ("e", "e", "e"): u, ("e", "e", 1): v,
    }
    return ACStructure(["*"], [Arrow(1, "*", "*"), Arrow("e", "*", "*")], {"*": 1}, d, tolerance)


@functools.lru_cache(maxsize=None)
def monoid_tables(n: int) -> tuple:
    """Every associative multiplication on ``{0..n-1}`` with unit ``0``."""
    if n < 1:
        raise DomainError("monoid size must be positive")
    rest = list(range(1, n))
    out = []
    for vals in itertools.product(range(n), repeat=len(rest) ** 2):
        t = np.zeros((n, n), dtype=int)
        t[0, :] = range(n)
        t[:, 0] = range(n)
        for (i, j), k in zip(itertools.product(rest, repeat=2), vals):
            t[i, j] = k
        if all(t[t[a, b], c] == t[a, t[b, c]] for a, b, c in itertools.product(range(n), repeat=3)):
            out.append(t)
    return tuple(out)


def _random_poset(rng: np.random.Generator, n: int) -> np.ndarray:
    """Reflexive transitive relation ``le[i, j]`` (an arrow ``i -> j``) from a random DAG."""
    le = np.eye(n, dtype=bool)
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < 0.5:
            le[i, j] = True
    for k in range(n):
        le |= le[:, k:k + 1] & le[k:k + 1, :]
    return le


def _random_category(rng: np.random.Generator, max_objects: int, max_hom: int):
    """A poset times a monoid; returns ``(objects, arrows, identities, compose)``."""
    n = int(rng.integers(1, max_objects + 1))
    le = _random_poset(rng, n)
    m = int(rng.integers(1, min(max_hom, 3) + 1))
    tables = monoid_tables(m)
    mult = tables[int(rng.integers(len(tables)))]
    objects = list(range(n))
    ident = lambda i, j, k: f"{i}>{j}:{k}"  # noqa: E731
    arrows, identities, compose = [], {}, {}
    for i, j in itertools.product(objects, repeat=2):
        if le[i, j]:
            arrows.extend(Arrow(ident(i, j, k), i, j) for k in range(m))
    for i in objects:
        identities[i] = ident(i, i, 0)
    for i, j, k in itertools.product(objects, repeat=3):
        if le[i, j] and le[j, k]:
            for a, b in itertools.product(range(m), repeat=2):
                compose[ident(i, j, a), ident(j, k, b)] = ident(i, k, int(mult[a, b]))
    return objects, arrows, identities, compose


def _floyd(M: np.ndarray) -> np.ndarray:
    for k in range(len(M)):
        M = np.minimum(M, M[:, k:k + 1] + M[k:k + 1, :])
    return M


def _project_metrics(objects, arrows, compose, mats: dict) -> dict:
    """Shrink hom metrics until each is a metric and composition is nonexpansive.

    Alternates shortest-path closure on every hom with lowering
    ``phi(g o f, g' o f')`` to ``phi(f, f') + phi(g, g')``. Values only
    decrease, so this reaches a fixed point.
    """
    hom = {}
    for a in arrows:
        hom.setdefault((a.src, a.dst), []).append(a.id)
    pos = {a: i for h in hom.values() for i, a in enumerate(h)}
    while True:
        changed = False
        for key, M in mats.items():
            N = _floyd(M)
            if not np.array_equal(N, M):
                mats[key] = N
                changed = True
        for x, y, z in itertools.product(objects, repeat=3):
            A, B = hom.get((x, y), []), hom.get((y, z), [])
            if not A or not B:
                continue
            PA, PB, PC = mats[x, y], mats[y, z], mats[x, z]
            comp = [(pos[f], pos[g], pos[compose[f, g]]) for f in A for g in B]
            for (i, j, c), (i2, j2, c2) in itertools.product(comp, repeat=2):
                s = PA[i, i2] + PB[j, j2]
                if c != c2 and PC[c, c2] > s:
                    PC[c, c2] = PC[c2, c] = s
                    changed = True
        if not changed:
            return mats


def random_metcat(seed: int, max_objects: int = 4, max_hom: int = 4,
                  tolerance: float = DEFAULT_TOLERANCE) -> MetrizedCategory:
    """Random category (poset times small monoid) with a compatible metric per hom set.

    Distances start uniform in ``[0.1, 1]`` and are projected to satisfy
    the metric and nonexpansiveness conditions. Every lowered entry is a
    sum containing some positive starting entry, so the result stays
    separated.
    """
    rng = np.random.default_rng(seed)
    objects, arrows, identities, compose = _random_category(rng, max_objects, max_hom)
    mats = _random_metrics(rng, objects, arrows, compose)
    return MetrizedCategory.from_matrices(objects, arrows, identities, compose, mats, tolerance)


def remetrize(mc: MetrizedCategory, seed: int) -> MetrizedCategory:
    """Same category as ``mc`` with a fresh random compatible metric."""
    rng = np.random.default_rng(seed)
    mats = _random_metrics(rng, mc.objects, mc.arrows, mc.composition)
    return MetrizedCategory.from_matrices(mc.objects, mc.arrows, mc.identities, mc.composition, mats,
                                          mc.tolerance)


def _random_metrics(rng, objects, arrows, compose) -> dict:
    mats = {}
    for x, y in itertools.product(objects, repeat=2):
        k = sum(1 for a in arrows if (a.src, a.dst) == (x, y))
        M = rng.uniform(0.1, 1.0, size=(k, k))
        M = np.minimum(M, M.T)
        np.fill_diagonal(M, 0.0)
        mats[x, y] = M
    return _project_metrics(objects, arrows, compose, mats)


def random_metric_space(rng: np.random.Generator, n: int, name: str = "p",
                        tolerance: float = DEFAULT_TOLERANCE) -> FiniteMetricSpace:
    W = rng.uniform(0.1, 1.0, size=(n, n))
    W = np.minimum(W, W.T)
    np.fill_diagonal(W, 0.0)
    return FiniteMetricSpace([f"{name}{i}" for i in range(n)], _floyd(W), tolerance)


def random_correspondence(rng: np.random.Generator, X: FiniteMetricSpace, Y: FiniteMetricSpace,
                          scale: float = 2.0) -> Correspondence:
    return project_correspondence(X, Y, rng.uniform(0.0, scale, size=(len(X), len(Y))))


def random_metcor_triple(seed: int, max_points: int = 6):
    """Four random metric spaces and random correspondences between consecutive ones."""
    rng = np.random.default_rng(seed)
    spaces = [random_metric_space(rng, int(rng.integers(1, max_points + 1)), name)
              for name in ("x", "y", "z", "w")]
    corrs = [random_correspondence(rng, a, b) for a, b in zip(spaces, spaces[1:])]
    return spaces, corrs


def planar_points(seed: int, n: int, scale: float = 1.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, scale, size=(n, 2))


def planar_2metric(seed: int, n: int, scale: float = 1.0, tolerance: float = DEFAULT_TOLERANCE) -> TwoMetric:
    return TwoMetric.from_points(planar_points(seed, n, scale), tolerance=tolerance)


def polygon(kind: str) -> np.ndarray:
    """Named test polygons (closed: first vertex repeated)."""
    shapes = {
        "triangle": [(1, 0), (0, 0), (0, 1)],
        "square": [(0, 0), (1, 0), (1, 1), (0, 1)],
    }
    if kind not in shapes:
        raise DomainError(f"unknown polygon {kind!r}; choose from {sorted(shapes)}")
    P = np.array(shapes[kind], dtype=float)
    return np.vstack([P, P[:1]])


def plpath_pair(kind: str, split: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Split a closed polygon's boundary into two paths with shared endpoints.

    ``a`` runs counterclockwise from vertex 0 to vertex ``split``; ``b``
    runs clockwise from vertex 0 to the same vertex.
    """
    P = polygon(kind)[:-1]
    n = len(P)
    s = (n + 1) // 2 if split is None else split
    if not 0 < s < n:
        raise DomainError(f"split must be between 1 and {n - 1}")
    a = P[: s + 1]
    b = np.vstack([P[:1], P[s:][::-1]])
    return a, b
