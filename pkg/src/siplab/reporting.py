"""Residual reports for identity and inequality checks.

Every verification routine in the package returns one or more CheckResult
records; a check passes when its residual is within tolerance (for
inequalities the residual is the amount of violation, clipped at zero).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import VerificationError


@dataclass(frozen=True)
class CheckResult:
    identity: str
    residual: float
    tolerance: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        d = {
            "identity": self.identity,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.detail:
            d["detail"] = self.detail
        return d


def make_check(identity: str, residual: float, tolerance: float, detail: str = "") -> CheckResult:
    return CheckResult(identity, float(residual), float(tolerance),
                       bool(residual <= tolerance), detail)


def require(checks, context: str = "") -> None:
    """Raise VerificationError if any check in the iterable failed."""
    failed = [c for c in checks if not c.passed]
    if failed:
        lines = [f"{c.identity}: residual {c.residual:.3e} > tol {c.tolerance:.3e}"
                 + (f" ({c.detail})" if c.detail else "")
                 for c in failed]
        prefix = f"{context}: " if context else ""
        raise VerificationError(prefix + "; ".join(lines))


@dataclass(frozen=True)
class CheckSuite:
    """A named bundle of check results, serializable for CLI reports."""

    name: str
    checks: tuple = field(default_factory=tuple)
    note: str = ""

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        d = {
            "suite": self.name,
            "pass": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }
        if self.note:
            d["note"] = self.note
        return d
