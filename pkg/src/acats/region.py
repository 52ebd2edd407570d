"""Parameter sweep of the one-object, two-arrow example over ``(u, v)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ACStructure, Arrow, validate
from .report import DEFAULT_TOLERANCE, DomainError

_ARROWS = (Arrow(1, "*", "*"), Arrow("e", "*", "*"))


def finite_example_fast(u: float, v: float, phi: float = 1.0, tolerance: float = DEFAULT_TOLERANCE) -> ACStructure:
    """Same structure as :func:`acats.generators.finite_example`, built straight from its table."""
    # index 0 is the identity 1, index 1 is e
    blk = np.array([[[0.0, phi], [phi, 0.0]],
                    [[phi, 0.0], [v, u]]])
    return ACStructure._from_blocks(["*"], _ARROWS, {"*": 1}, {("*", "*", "*"): blk}, tolerance)


def predicate(u: float, v: float, tolerance: float = 0.0) -> bool:
    """Closed-form region for ``phi = 1``."""
    return u <= 1 + tolerance and u + v >= 1 - tolerance and v <= u + 1 + tolerance


@dataclass
class RegionSweep:
    us: np.ndarray
    vs: np.ndarray
    accepted: np.ndarray  # accepted[i, j] for (us[i], vs[j])
    phi: float

    def expected(self, tolerance: float = DEFAULT_TOLERANCE) -> np.ndarray:
        return np.array([[predicate(u, v, tolerance) for v in self.vs] for u in self.us])

    def mismatches(self, tolerance: float = DEFAULT_TOLERANCE) -> list[tuple[float, float]]:
        bad = np.argwhere(self.accepted != self.expected(tolerance))
        return [(float(self.us[i]), float(self.vs[j])) for i, j in bad]


def sweep(u_max: float = 2.5, step: float = 0.05, phi: float = 1.0,
          tolerance: float = DEFAULT_TOLERANCE) -> RegionSweep:
    if step <= 0 or u_max < 0:
        raise DomainError("need step > 0 and u_max >= 0")
    n = int(round(u_max / step)) + 1
    grid = np.arange(n) * step
    acc = np.zeros((n, n), dtype=bool)
    for i, u in enumerate(grid):
        for j, v in enumerate(grid):
            acc[i, j] = validate(finite_example_fast(u, v, phi, tolerance), witness_cap=0).passed
    return RegionSweep(grid, grid.copy(), acc, phi)
