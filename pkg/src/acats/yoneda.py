"""Yoneda functors from a separated AC structure into metric correspondences.

``Y_u`` sends an object ``x`` to the metric space ``(A(u, x), phi)`` and an
arrow ``f: x -> y`` to the correspondence ``(a, b) -> d(a, f, b)``. The
co-Yoneda functor ``Y^u`` uses ``A(x, u)`` instead and is contravariant:
``Y^u(f)`` goes from ``Y^u(y)`` to ``Y^u(x)`` with ``(a, b) -> d(f, a, b)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import INF, ACStructure, _require_identities, graphcomp_witness, is_separated, phi_matrix
from .metcor import Correspondence, FiniteMetricSpace, compose, corr_distance
from .report import DomainError, PreconditionError


def _require_separated(ac: ACStructure) -> None:
    _require_identities(ac, "Yoneda")
    if not is_separated(ac):
        raise PreconditionError("structure is not separated; quotient it with separate() first")


def _require_graphcomp(ac: ACStructure) -> None:
    w = graphcomp_witness(ac)
    if w is not None:
        x, y, z = w
        raise PreconditionError(f"graph hypothesis fails at ({x!r}, {y!r}, {z!r}): "
                                f"A({x!r},{y!r}) and A({y!r},{z!r}) nonempty but A({x!r},{z!r}) empty")


def _space(ac: ACStructure, x, y) -> FiniteMetricSpace:
    return FiniteMetricSpace(ac.hom(x, y), phi_matrix(ac, x, y), ac.tolerance)


def _composable(ac: ACStructure, f, g, h) -> None:
    F, G, H = ac.arrow(f), ac.arrow(g), ac.arrow(h)
    if F.dst != G.src or (H.src, H.dst) != (F.src, G.dst):
        raise DomainError(f"({f!r}, {g!r}, {h!r}) is not a composable triple")


@dataclass
class YonedaImage:
    """All objects and arrows of ``Y_u`` (or ``Y^u`` when ``co`` is set)."""

    ac: ACStructure
    base: object
    co: bool = False
    spaces: dict = field(default_factory=dict)
    arrows: dict = field(default_factory=dict)

    def __post_init__(self):
        ac, u = self.ac, self.base
        for x in ac.objects:
            self.spaces[x] = _space(ac, x, u) if self.co else _space(ac, u, x)
        for a in ac.arrows:
            x, y = a.src, a.dst
            if self.co:
                vals = ac.block(x, y, u)[ac.position(a.id)]
                self.arrows[a.id] = Correspondence(self.spaces[y], self.spaces[x], vals)
            else:
                vals = ac.block(u, x, y)[:, ac.position(a.id), :]
                self.arrows[a.id] = Correspondence(self.spaces[x], self.spaces[y], vals)

    def defect(self, f, g, h) -> float:
        _composable(self.ac, f, g, h)
        Yf, Yg, Yh = self.arrows[f], self.arrows[g], self.arrows[h]
        comp = compose(Yg, Yf) if self.co else compose(Yf, Yg)
        return corr_distance(comp, Yh)


def yoneda_image(ac: ACStructure, u, co: bool = False) -> YonedaImage:
    _require_separated(ac)
    _require_graphcomp(ac)
    if u not in ac.objects:
        raise DomainError(f"unknown object {u!r}")
    return YonedaImage(ac, u, co)


def yoneda_object(ac: ACStructure, u, x) -> FiniteMetricSpace:
    """``Y_u(x) = (A(u, x), phi)``."""
    _require_separated(ac)
    return _space(ac, u, x)


def yoneda_arrow(ac: ACStructure, u, f) -> Correspondence:
    """``Y_u(f)(a, b) = d(a, f, b)`` for ``a in A(u, x)``, ``b in A(u, y)``."""
    _require_separated(ac)
    _require_graphcomp(ac)
    F = ac.arrow(f)
    vals = ac.block(u, F.src, F.dst)[:, ac.position(f), :]
    return Correspondence(_space(ac, u, F.src), _space(ac, u, F.dst), vals)


def yoneda_defect(ac: ACStructure, u, f, g, h) -> float:
    """``corr_distance(Y_u(g) o Y_u(f), Y_u(h))``; at most ``d(f,g,h)`` under left transitivity."""
    _composable(ac, f, g, h)
    return corr_distance(compose(yoneda_arrow(ac, u, f), yoneda_arrow(ac, u, g)), yoneda_arrow(ac, u, h))


def co_yoneda_object(ac: ACStructure, u, x) -> FiniteMetricSpace:
    """``Y^u(x) = (A(x, u), phi)``."""
    _require_separated(ac)
    return _space(ac, x, u)


def co_yoneda_arrow(ac: ACStructure, u, f) -> Correspondence:
    """``Y^u(f)(a, b) = d(f, a, b)`` for ``a in A(y, u)``, ``b in A(x, u)``."""
    _require_separated(ac)
    _require_graphcomp(ac)
    F = ac.arrow(f)
    vals = ac.block(F.src, F.dst, u)[ac.position(f)]
    return Correspondence(_space(ac, F.dst, u), _space(ac, F.src, u), vals)


def co_yoneda_defect(ac: ACStructure, u, f, g, h) -> float:
    """``corr_distance(Y^u(f) o Y^u(g), Y^u(h))``; at most ``d(f,g,h)`` under right transitivity."""
    _composable(ac, f, g, h)
    return corr_distance(compose(co_yoneda_arrow(ac, u, g), co_yoneda_arrow(ac, u, f)),
                         co_yoneda_arrow(ac, u, h))


def yoneda_lower_bound(ac: ACStructure, f, g, h) -> float:
    """``min_b phi(f, b) + d(b, g, h)`` over ``b`` parallel to ``f``."""
    _composable(ac, f, g, h)
    F, G = ac.arrow(f), ac.arrow(g)
    x, y, z = F.src, F.dst, G.dst
    if not ac.hom(x, y):
        return INF
    P = phi_matrix(ac, x, y)[ac.position(f)]
    D = ac.block(x, y, z)[:, ac.position(g), ac.position(h)]
    return float(np.min(P + D))
