"""Specialisations of the new inequalities to classical ones, checked numerically.

A reduction case fixes a source chain with a substituted kernel and/or m,
a target chain, and a map saying which scaled source term must equal which
target term. Both chains are computed independently and compared term by
term; whether either inequality *holds* is a separate question that the
audits answer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

from .errors import AuditPreconditionError
from .expr import FunctionExpr, Kernel
from .inequalities import AuditSpec, InequalityReport, audit

__all__ = ["ReductionCase", "TermMatch", "ReductionReport", "CATALOG", "verify_reduction", "get_case"]

REDUCTION_TOL = 1e-9

Scale = Union[float, Callable[[AuditSpec], float]]


def _mb_minus_a(spec: AuditSpec) -> float:
    return spec.m * spec.b - spec.a


def _two_pow_s_minus_one(spec: AuditSpec) -> float:
    return 2.0 ** (spec.power_s() - 1.0)


@dataclass(frozen=True)
class ReductionCase:
    case_id: str
    source: str
    target: str
    term_map: tuple[tuple[int, int, Scale], ...]
    kernel: str | None = None  # "identity" | "one" | "power"; None keeps the AuditSpec kernel
    m: float | None = None  # None keeps the AuditSpec m
    claim: str = ""

    def substituted(self, spec: AuditSpec) -> AuditSpec:
        h = None
        if self.kernel == "power":
            h = Kernel.power(spec.power_s())
        elif self.kernel is not None:
            h = Kernel(self.kernel)
        return spec.with_params(h=h, m=self.m)


@dataclass(frozen=True)
class TermMatch:
    source_index: int
    target_index: int
    scale: float
    source_scaled: float
    target: float
    difference: float
    tolerance: float
    agrees: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class ReductionReport:
    case_id: str
    source: InequalityReport
    target: InequalityReport
    matches: tuple[TermMatch, ...]
    agrees: bool

    @property
    def max_difference(self) -> float:
        return max(abs(m.difference) for m in self.matches)


_IDENTITY_PAIRS = ((0, 0, 1.0), (1, 1, 1.0))
_RIGHT_SIDE = ((0, 1, 1.0), (1, 2, 1.0))

CATALOG: dict[str, ReductionCase] = {
    c.case_id: c
    for c in [
        ReductionCase("thm4-to-m1", "thm4", "m1", _IDENTITY_PAIRS, kernel="identity",
                      claim="identity kernel turns thm4 into the m-convex bound m1"),
        ReductionCase("thm4-to-h1", "thm4", "h1", _RIGHT_SIDE, m=1.0,
                      claim="m = 1 turns thm4 into the right side of h1 (uses c1 = c0)"),
        ReductionCase("thm5-to-m2", "thm5", "m2", ((0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)), kernel="identity",
                      claim="identity kernel turns thm5 into m2, all three terms"),
        ReductionCase("thm8-to-m3", "thm8", "m3", ((0, 0, _mb_minus_a), (1, 1, _mb_minus_a)), kernel="identity",
                      claim="identity kernel turns thm8, scaled by (mb - a), into m3"),
        ReductionCase("thm5-to-s", "thm5", "thm5-s",
                      ((0, 0, _two_pow_s_minus_one), (1, 1, _two_pow_s_minus_one), (2, 2, _two_pow_s_minus_one)),
                      kernel="power", m=1.0,
                      claim="m = 1 with h(t) = t^s turns thm5, scaled by 2^(s-1), into the s-type chain"),
        ReductionCase("thm5-to-hh", "thm5", "hh", ((0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)), kernel="identity", m=1.0,
                      claim="m = 1 with the identity kernel turns thm5 into the Hermite-Hadamard chain"),
        ReductionCase("thm4-to-hh", "thm4", "hh", _RIGHT_SIDE, kernel="identity", m=1.0,
                      claim="m = 1, identity kernel: thm4 gives the right side of Hermite-Hadamard"),
        ReductionCase("thm4-to-p", "thm4", "p", ((0, 1, 2.0), (1, 2, 2.0)), kernel="one", m=1.0,
                      claim="m = 1, h = 1: thm4 gives the right side of p (after doubling)"),
        ReductionCase("thm4-to-s", "thm4", "s", _RIGHT_SIDE, kernel="power", m=1.0,
                      claim="m = 1, h(t) = t^s: thm4 gives the right side of s"),
        ReductionCase("thm8-to-hh", "thm8", "hh", _RIGHT_SIDE, kernel="identity", m=1.0,
                      claim="m = 1, identity kernel: thm8 gives the right side of Hermite-Hadamard"),
        ReductionCase("thm8-to-p", "thm8", "p", ((0, 1, 2.0), (1, 2, 2.0)), kernel="one", m=1.0,
                      claim="m = 1, h = 1: thm8 gives the right side of p (after doubling)"),
        ReductionCase("thm8-to-s", "thm8", "s", _RIGHT_SIDE, kernel="power", m=1.0,
                      claim="m = 1, h(t) = t^s: thm8 gives the right side of s"),
        ReductionCase("thm4-one", "thm4", "thm4-one", _IDENTITY_PAIRS, kernel="one",
                      claim="h = 1 in thm4 gives min(f(a) + m f(b/m), f(b) + m f(a/m))"),
        ReductionCase("thm4-unit-m", "thm4", "thm4-unit-m", _IDENTITY_PAIRS, m=1.0,
                      claim="m = 1 in thm4 gives the two-branch h-convex bound"),
        ReductionCase("thm5-one", "thm5", "thm5-one", ((0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)), kernel="one",
                      claim="h = 1 in thm5 drops the h(1/2) factor"),
        ReductionCase("thm8-one", "thm8", "thm8-one", _IDENTITY_PAIRS, kernel="one",
                      claim="h = 1 in thm8 gives the bound f(a) + f(b)"),
    ]
}


def get_case(case_id: str) -> ReductionCase:
    try:
        return CATALOG[case_id]
    except KeyError:
        raise AuditPreconditionError(
            f"unknown reduction case {case_id!r}; choose from {', '.join(CATALOG)}"
        ) from None


def verify_reduction(case: ReductionCase | str, f: FunctionExpr | None, spec: AuditSpec) -> ReductionReport:
    """Run both chains of ``case`` on ``spec`` and compare the mapped terms.

    ``f`` overrides the function in ``spec`` when given. Terms agree when
    |scale * source - target| <= scaled quadrature errors + 1e-9.
    """
    if isinstance(case, str):
        case = get_case(case)
    if f is not None:
        spec = AuditSpec(f, spec.params, spec.a, spec.b, spec.tol, spec.s)
    sub = case.substituted(spec)
    source = audit(case.source, sub)
    target = audit(case.target, sub)
    matches = []
    for si, ti, scale in case.term_map:
        k = scale(sub) if callable(scale) else float(scale)
        src, tgt = source.terms[si], target.terms[ti]
        scaled = k * src.value
        diff = scaled - tgt.value
        tol = abs(k) * src.quad_error + tgt.quad_error + REDUCTION_TOL
        matches.append(TermMatch(si, ti, k, scaled, tgt.value, diff, tol, abs(diff) <= tol))
    return ReductionReport(case.case_id, source, target, tuple(matches), all(m.agrees for m in matches))
