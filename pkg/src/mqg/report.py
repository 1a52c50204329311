"""Check results with residuals, tolerances and pass flags."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tol: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        out = {"name": self.name, "residual": float(self.residual), "tol": float(self.tol),
               "passed": bool(self.passed)}
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class Report:
    """Ordered collection of :class:`CheckResult`."""

    results: list[CheckResult] = field(default_factory=list)

    def add(self, name: str, residual: float, tol: float, *, detail: str = "",
            passed: bool | None = None) -> CheckResult:
        residual = float(abs(residual))
        if math.isnan(residual):
            residual = math.inf
        ok = residual <= tol if passed is None else bool(passed)
        res = CheckResult(name, residual, float(tol), ok, detail)
        self.results.append(res)
        return res

    def flag(self, name: str, ok: bool, *, detail: str = "") -> CheckResult:
        """Boolean check recorded with residual 0 (pass) or 1 (fail)."""
        return self.add(name, 0.0 if ok else 1.0, 0.5, detail=detail, passed=ok)

    def extend(self, other: "Report | Iterable[CheckResult]", prefix: str = "") -> "Report":
        items = other.results if isinstance(other, Report) else list(other)
        for r in items:
            name = f"{prefix}{r.name}" if prefix else r.name
            self.results.append(CheckResult(name, r.residual, r.tol, r.passed, r.detail))
        return self

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.passed]

    def __getitem__(self, name: str) -> CheckResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def __contains__(self, name: object) -> bool:
        return any(r.name == name for r in self.results)

    def __iter__(self) -> Iterator[CheckResult]:
        return iter(self.results)

    def __len__(self) -> int:
        return len(self.results)

    def max_residual(self) -> float:
        return max((r.residual for r in self.results), default=0.0)

    def to_list(self) -> list[dict]:
        return [r.to_dict() for r in self.results]

    def summary(self) -> str:
        lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.residual:.3e} (tol {r.tol:.0e})"
                 for r in self.results]
        return "\n".join(lines)
