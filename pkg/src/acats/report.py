"""Validation reports and the exception hierarchy shared by every module."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable

DEFAULT_TOLERANCE = 1e-9
DEFAULT_WITNESS_CAP = 20


class ACError(Exception):
    """Base class for all errors raised by acats."""


class StructureError(ACError, ValueError):
    """Malformed input: missing table entries, dangling references, bad shapes."""


class DomainError(ACError, ValueError):
    """Arguments outside an operation's domain (non-parallel arrows, ill-typed maps)."""


class PreconditionError(ACError):
    """An operation's mathematical precondition does not hold for its input."""


class SeparationError(PreconditionError):
    """Two distinct candidates for a composite are at positive distance."""


class TruncationError(ACError):
    """A word-length bound is too small for the requested construction."""


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple
    lhs: float
    rhs: float
    gap: float

    def as_dict(self) -> dict:
        return {
            "axiom": self.axiom,
            "witness": [str(w) for w in self.witness],
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "gap": _num(self.gap),
        }


def _num(x: float) -> Any:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


@dataclass
class ValidationReport:
    """Outcome of an axiom check.

    ``violations`` is a capped list of witnesses; ``worst`` keeps the single
    worst gap per axiom family and ``counts`` the total number of failing
    instances, so nothing is lost when the witness list is truncated.
    """

    violations: list[Violation] = field(default_factory=list)
    worst: dict[str, Violation] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    checked: dict[str, int] = field(default_factory=dict)
    notes: dict[str, Any] = field(default_factory=dict)
    witness_cap: int = DEFAULT_WITNESS_CAP

    @property
    def passed(self) -> bool:
        return not self.counts

    def __bool__(self) -> bool:
        return self.passed

    def tick(self, axiom: str, n: int = 1) -> None:
        self.checked[axiom] = self.checked.get(axiom, 0) + n

    def add(self, axiom: str, witness: Iterable, lhs: float, rhs: float, gap: float | None = None) -> None:
        v = Violation(axiom, tuple(witness), float(lhs), float(rhs),
                      float(lhs - rhs) if gap is None else float(gap))
        self.counts[axiom] = self.counts.get(axiom, 0) + 1
        best = self.worst.get(axiom)
        if best is None or v.gap > best.gap:
            self.worst[axiom] = v
        if len(self.violations) < self.witness_cap:
            self.violations.append(v)

    def merge(self, other: "ValidationReport", prefix: str = "") -> "ValidationReport":
        for v in other.violations:
            if len(self.violations) < self.witness_cap:
                self.violations.append(Violation(prefix + v.axiom, v.witness, v.lhs, v.rhs, v.gap))
        for k, v in other.worst.items():
            key = prefix + k
            if key not in self.worst or v.gap > self.worst[key].gap:
                self.worst[key] = Violation(key, v.witness, v.lhs, v.rhs, v.gap)
        for k, n in other.counts.items():
            self.counts[prefix + k] = self.counts.get(prefix + k, 0) + n
        for k, n in other.checked.items():
            self.checked[prefix + k] = self.checked.get(prefix + k, 0) + n
        self.notes.update({prefix + k: v for k, v in other.notes.items()})
        return self

    def max_gap(self, axiom: str | None = None) -> float:
        if axiom is not None:
            v = self.worst.get(axiom)
            return v.gap if v else 0.0
        return max((v.gap for v in self.worst.values()), default=0.0)

    def axioms_failed(self) -> list[str]:
        return sorted(self.counts)

    def sorted_violations(self) -> list[Violation]:
        return sorted(self.violations, key=lambda v: (v.axiom, tuple(str(w) for w in v.witness)))

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checked": dict(sorted(self.checked.items())),
            "counts": dict(sorted(self.counts.items())),
            "worst": {k: v.as_dict() for k, v in sorted(self.worst.items())},
            "violations": [v.as_dict() for v in self.sorted_violations()],
            "notes": {k: _num(v) if isinstance(v, float) else v for k, v in sorted(self.notes.items())},
        }

    def lines(self) -> list[str]:
        """Tab-delimited rendering, one record per line."""
        out = [f"status\t{'PASS' if self.passed else 'FAIL'}"]
        for k, n in sorted(self.checked.items()):
            out.append(f"checked\t{k}\t{n}\t{self.counts.get(k, 0)}")
        for k, v in sorted(self.worst.items()):
            out.append(f"worst\t{k}\t{','.join(map(str, v.witness))}\t{_fmt(v.lhs)}\t{_fmt(v.rhs)}\t{_fmt(v.gap)}")
        for v in self.sorted_violations():
            out.append(f"violation\t{v.axiom}\t{','.join(map(str, v.witness))}\t{_fmt(v.lhs)}\t{_fmt(v.rhs)}\t{_fmt(v.gap)}")
        for k, v in sorted(self.notes.items()):
            out.append(f"note\t{k}\t{_fmt(v) if isinstance(v, float) else v}")
        return out


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))
