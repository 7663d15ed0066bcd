"""Exception types and the violation report shared by all validators."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any


def default_tolerance() -> float:
    """Coherence / residual tolerance, overridable through ``LOCH_TOLERANCE``."""
    raw = os.environ.get("LOCH_TOLERANCE")
    if raw is None:
        return 1e-10
    value = float(raw)
    if not value > 0:
        raise ValueError("LOCH_TOLERANCE must be positive")
    return value


@dataclass(frozen=True)
class Violation:
    """First violated axiom found by a check.

    ``tag`` names the axiom (``"sim3"``, ``"lhs4"``, ``"c2"``, ``"coherence"``...),
    ``witness`` holds the offending elements and ``residual`` the measured
    defect when the check is numerical.
    """

    tag: str
    message: str
    witness: tuple = ()
    residual: float | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "tag": self.tag,
            "message": self.message,
            "witness": [_plain(w) for w in self.witness],
        }
        if self.residual is not None:
            out["residual"] = float(self.residual)
        return out


def _plain(obj):
    if isinstance(obj, tuple):
        return [_plain(o) for o in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


class LochError(Exception):
    """Base class for every error raised by this package."""


class MalformedInput(LochError, ValueError):
    """Input is structurally unusable (empty, wrong shapes, unknown ids)."""


class ValidationError(LochError):
    """A candidate structure violates one of its axioms."""

    def __init__(self, violation: Violation):
        super().__init__(f"[{violation.tag}] {violation.message}")
        self.violation = violation


class PreconditionError(LochError):
    """An operation was called on inputs outside its domain."""

    def __init__(self, message: str, violation: Violation | None = None):
        super().__init__(message)
        self.violation = violation


class ClassificationError(LochError):
    """A set or operator does not belong to the class an operation requires."""


class ConsistencyAlarm(LochError):
    """Two routes that must agree did not; signals numerical pathology."""


@dataclass
class Report:
    """Outcome of a certificate-style check.

    Truthy when the check passed.  ``details`` carries per-item measurements
    (commutator norms, residuals, ...).
    """

    ok: bool
    violation: Violation | None = None
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"ok": self.ok}
        if self.violation is not None:
            out["violation"] = self.violation.to_dict()
        return out


class InvalidIndex(LochError, ValueError):
    """Requested index does not belong to the index set (e.g. disconnected union)."""


class DegenerateCarrier(MalformedInput):
    """A carrier cannot be discretized (zero-length segment, empty node...)."""


class DomainError(LochError, KeyError):
    """A function is undefined at a point where it must be evaluated."""


class IncompatibleSystems(LochError, ValueError):
    """Operands live on different inductive systems."""
