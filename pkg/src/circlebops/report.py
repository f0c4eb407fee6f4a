"""Residual bookkeeping for the identity suite.

Each verified identity yields a ``CheckResult`` carrying a short code (the
same code the CLI report and the acceptance suite print), the level it was
evaluated at, the relative residual and the tolerance it was judged against.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mpf


@dataclass
class CheckResult:
    label: str                 # identity code, e.g. "rrCf:a"
    residual: mpf
    tol: mpf
    n: int | None = None
    passed: bool = True
    gauge_invariant: bool = True
    note: str = ""

    @classmethod
    def make(cls, label, residual, tol, n=None, gauge_invariant=True, note=""):
        residual = mpf(residual)
        tol = mpf(tol)
        return cls(label=label, residual=residual, tol=tol, n=n,
                   passed=bool(residual < tol),
                   gauge_invariant=gauge_invariant, note=note)


def worst(results) -> mpf:
    return max((r.residual for r in results), default=mpf(0))


def all_passed(results) -> bool:
    return all(r.passed for r in results)


def failures(results):
    return [r for r in results if not r.passed]
