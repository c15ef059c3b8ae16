"""Hadamard-type inequality chains as ordered lists of numeric terms.

Every audit evaluates one printed inequality ``t0 <= t1 <= ...`` for a given
f, kernel h, parameter m and interval [a, b], and reports the slack of each
adjacent pair. Statements are implemented exactly as written; a failing
pair is reported, never repaired.

Chains available through :func:`audit`:

``thm4``
    mean(f; a, b) <= min(f(a) c0 + m f(b/m) c1, f(b) c0 + m f(a/m) c1)
``thm5``
    f((a+b)/2) <= h(1/2)/(b-a) * int_a^b [f(x) + m f(x/m)] dx
    <= h(1/2) [f(a) + m f(b/m) + m f(a/m) + m^2 f(b/m^2)] / 2
``thm8``
    [mean(f; a, mb) + mean(f; ma, b)] / (m+1) <= (f(a)+f(b))/2 (c0 + c1)
``m1``, ``m2``, ``m3``
    the classical m-convex bounds
``s``, ``q``, ``p``, ``h1``, ``hh``
    the s-convex, Godunova-Levin, P-function, h-convex and classical
    Hermite-Hadamard chains
``thm4-one``, ``thm4-unit-m``, ``thm5-one``, ``thm5-s``, ``thm8-one``
    the closed-form special cases of the three theorems, written out
    independently so the reductions module can compare against them

Here c0 and c1 are the kernel moments, and mean(f; u, v) is the integral
mean of f over [u, v].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .convexity import HMParams
from .errors import (
    AuditPreconditionError,
    DivergenceError,
    EvaluationDomainError,
    QuadratureError,
)
from .expr import FunctionExpr, Kernel
from .quadrature import integrate, kernel_moments

__all__ = [
    "ToleranceSpec",
    "AuditSpec",
    "Term",
    "PairVerdict",
    "InequalityReport",
    "audit",
    "audit_thm4",
    "audit_thm5",
    "audit_thm8",
    "audit_classical",
    "THEOREM_IDS",
    "CLASSICAL_IDS",
    "SPECIAL_IDS",
    "INEQUALITY_IDS",
]


@dataclass(frozen=True)
class ToleranceSpec:
    abs: float = 1e-9
    rel: float = 1e-9

    def __post_init__(self):
        if not (self.abs > 0 and self.rel > 0):
            raise AuditPreconditionError(f"tolerances must be positive, got abs={self.abs!r} rel={self.rel!r}")

    def allowance(self, lo: float, hi: float) -> float:
        return self.abs + self.rel * max(abs(lo), abs(hi))

    def to_dict(self) -> dict:
        return {"abs": self.abs, "rel": self.rel}


@dataclass(frozen=True)
class AuditSpec:
    f: FunctionExpr
    params: HMParams
    a: float
    b: float
    tol: ToleranceSpec = field(default_factory=ToleranceSpec)
    s: float | None = None

    def __post_init__(self):
        a, b = self.a, self.b
        if not (np.isfinite(a) and np.isfinite(b)):
            raise AuditPreconditionError(f"interval endpoints must be finite, got a={a!r}, b={b!r}")
        if not (0.0 <= a < b):
            raise AuditPreconditionError(f"need 0 <= a < b, got a={a!r}, b={b!r}")
        if not (0.0 < self.params.m <= 1.0):
            raise AuditPreconditionError(f"audits need m in (0, 1], got m={self.params.m!r}")
        if self.s is not None and not (0.0 < self.s <= 1.0):
            raise AuditPreconditionError(f"s must lie in (0, 1], got {self.s!r}")

    @property
    def m(self) -> float:
        return self.params.m

    @property
    def h(self) -> Kernel:
        return self.params.h

    def with_params(self, h: Kernel | None = None, m: float | None = None) -> "AuditSpec":
        params = HMParams(h if h is not None else self.h, m if m is not None else self.m, self.params.direction)
        return AuditSpec(self.f, params, self.a, self.b, self.tol, self.s)

    def power_s(self) -> float:
        """The s parameter: explicit ``s`` if given, else the power kernel's."""
        if self.s is not None:
            return self.s
        if self.h.kind == "power":
            return self.h.s
        raise AuditPreconditionError("this chain needs s: pass s or use a power:S kernel")

    def inputs(self) -> dict:
        return {
            "f": self.f.source_text,
            "h": self.h.text(),
            "m": self.m,
            "a": self.a,
            "b": self.b,
            "s": self.s,
        }


@dataclass(frozen=True)
class Term:
    label: str
    value: float
    quad_error: float = 0.0

    def to_dict(self) -> dict:
        return {"label": self.label, "value": self.value, "quad_error": self.quad_error}


@dataclass(frozen=True)
class PairVerdict:
    holds: bool
    slack: float
    allowance: float

    def to_dict(self) -> dict:
        return {"holds": self.holds, "slack": self.slack, "allowance": self.allowance}


@dataclass(frozen=True)
class InequalityReport:
    inequality_id: str
    terms: tuple[Term, ...]
    pair_verdicts: tuple[PairVerdict, ...]
    overall: str  # "holds" | "violated"
    inputs: dict
    tolerances: dict
    details: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.overall == "holds"

    @property
    def values(self) -> list[float]:
        return [t.value for t in self.terms]

    @property
    def worst_slack(self) -> float:
        return min(p.slack for p in self.pair_verdicts)


def _chain(ineq_id: str, spec: AuditSpec, terms: list[Term], details: dict | None = None) -> InequalityReport:
    verdicts = []
    for lo, hi in zip(terms, terms[1:]):
        allowance = spec.tol.allowance(lo.value, hi.value) + lo.quad_error + hi.quad_error
        slack = hi.value - lo.value
        verdicts.append(PairVerdict(bool(lo.value <= hi.value + allowance), slack, allowance))
    overall = "holds" if all(v.holds for v in verdicts) else "violated"
    return InequalityReport(
        ineq_id, tuple(terms), tuple(verdicts), overall, spec.inputs(), spec.tol.to_dict(), details or {}
    )


# --------------------------------------------------------------------------
# evaluation helpers


class _Points:
    """Fail-fast evaluation of f at the named points a chain needs."""

    def __init__(self, spec: AuditSpec, names: list[str]):
        a, b, m = spec.a, spec.b, spec.m
        where = {
            "a": a,
            "b": b,
            "(a+b)/2": 0.5 * (a + b),
            "a/m": a / m,
            "b/m": b / m,
            "b/m^2": b / (m * m),
        }
        self.values = {}
        for name in names:
            x = where[name]
            if not np.isfinite(x):
                raise EvaluationDomainError("evaluation point is not finite", x, f"f({name})")
            self.values[name] = spec.f(x, f"f({name})")

    def __getitem__(self, name: str) -> float:
        return self.values[name]


def _integral(g: Callable, lo: float, hi: float, spec: AuditSpec, label: str) -> tuple[float, float]:
    r = integrate(g, lo, hi, spec.tol.abs * (hi - lo))
    if r.diverged:
        raise DivergenceError(f"{label} diverges")
    if not r.converged:
        raise QuadratureError(
            f"{label} did not converge (estimate {r.value!r}, error estimate {r.error_estimate!r})"
        )
    return r.value, r.error_estimate


def _f_integral(spec: AuditSpec, lo: float, hi: float, label: str) -> tuple[float, float]:
    f = spec.f
    return _integral(lambda xs: f(xs, f"integrand of {label}"), lo, hi, spec, label)


def _mean(spec: AuditSpec) -> Term:
    a, b = spec.a, spec.b
    value, err = _f_integral(spec, a, b, "int_a^b f")
    return Term("mean", value / (b - a), err / (b - a))


def _with_rescaled(spec: AuditSpec, lo: float, hi: float, label: str) -> tuple[float, float]:
    """int_lo^hi [f(x) + m f(x/m)] dx."""
    f, m = spec.f, spec.m

    def g(xs):
        return f(xs, f"f(x) in {label}") + m * f(xs / m, f"f(x/m) in {label}")

    return _integral(g, lo, hi, spec, label)


def _moments(spec: AuditSpec):
    mom = kernel_moments(spec.h, spec.tol.abs)
    if not mom.converged:
        raise QuadratureError(f"kernel moments of {spec.h.text()} did not converge")
    return mom


def _h_half(spec: AuditSpec) -> float:
    return spec.h(0.5, "h(1/2)")


def _mid(spec: AuditSpec, pts: _Points) -> Term:
    return Term("f((a+b)/2)", pts["(a+b)/2"])


def _check_orientation(spec: AuditSpec) -> None:
    if not spec.a < spec.m * spec.b:
        raise AuditPreconditionError(
            f"this chain needs a < m*b; got a={spec.a!r}, m*b={spec.m * spec.b!r}"
        )


# --------------------------------------------------------------------------
# the three theorems


def audit_thm4(spec: AuditSpec) -> InequalityReport:
    m = spec.m
    pts = _Points(spec, ["a", "b", "a/m", "b/m"])
    mom = _moments(spec)
    c0, c1 = mom.c0.value, mom.c1.value
    e0, e1 = mom.c0.error_estimate, mom.c1.error_estimate
    first = pts["a"] * c0 + m * pts["b/m"] * c1
    second = pts["b"] * c0 + m * pts["a/m"] * c1
    err = max(abs(pts["a"]) * e0 + m * abs(pts["b/m"]) * e1, abs(pts["b"]) * e0 + m * abs(pts["a/m"]) * e1)
    branch = "first" if first <= second else "second"
    rhs = Term("min_bound", min(first, second), err)
    details = {"min_branch": branch, "branches": [first, second], "c0": c0, "c1": c1}
    return _chain("thm4", spec, [_mean(spec), rhs], details)


def audit_thm5(spec: AuditSpec) -> InequalityReport:
    a, b, m = spec.a, spec.b, spec.m
    pts = _Points(spec, ["(a+b)/2", "a", "b/m", "a/m", "b/m^2"])
    hh = _h_half(spec)
    integral, err = _with_rescaled(spec, a, b, "int_a^b [f(x) + m f(x/m)]")
    middle = Term("h(1/2)/(b-a) int [f(x) + m f(x/m)]", hh * integral / (b - a), abs(hh) * err / (b - a))
    right = Term(
        "h(1/2) [f(a) + m f(b/m) + m f(a/m) + m^2 f(b/m^2)] / 2",
        hh * (pts["a"] + m * pts["b/m"] + m * pts["a/m"] + m * m * pts["b/m^2"]) / 2.0,
    )
    return _chain("thm5", spec, [_mid(spec, pts), middle, right], {"h_half": hh})


def _thm8_lhs(spec: AuditSpec) -> Term:
    a, b, m = spec.a, spec.b, spec.m
    i1, e1 = _f_integral(spec, a, m * b, "int_a^(mb) f")
    i2, e2 = _f_integral(spec, m * a, b, "int_(ma)^b f")
    w1, w2 = 1.0 / (m * b - a), 1.0 / (b - m * a)
    value = (w1 * i1 + w2 * i2) / (m + 1.0)
    return Term("[mean(a, mb) + mean(ma, b)] / (m+1)", value, (w1 * e1 + w2 * e2) / (m + 1.0))


def audit_thm8(spec: AuditSpec) -> InequalityReport:
    _check_orientation(spec)
    pts = _Points(spec, ["a", "b"])
    mom = _moments(spec)
    c0, c1 = mom.c0.value, mom.c1.value
    half = (pts["a"] + pts["b"]) / 2.0
    rhs = Term("(f(a)+f(b))/2 (c0 + c1)", half * (c0 + c1), abs(half) * (mom.c0.error_estimate + mom.c1.error_estimate))
    return _chain("thm8", spec, [_thm8_lhs(spec), rhs], {"c0": c0, "c1": c1})


# --------------------------------------------------------------------------
# classical chains


def _m1(spec: AuditSpec) -> InequalityReport:
    m = spec.m
    pts = _Points(spec, ["a", "b", "a/m", "b/m"])
    first = (pts["a"] + m * pts["b/m"]) / 2.0
    second = (pts["b"] + m * pts["a/m"]) / 2.0
    branch = "first" if first <= second else "second"
    rhs = Term("min_bound", min(first, second))
    return _chain("m1", spec, [_mean(spec), rhs], {"min_branch": branch, "branches": [first, second]})


def _m2(spec: AuditSpec) -> InequalityReport:
    a, b, m = spec.a, spec.b, spec.m
    pts = _Points(spec, ["(a+b)/2", "a", "b", "a/m", "b/m"])
    integral, err = _with_rescaled(spec, a, b, "int_a^b [f(x) + m f(x/m)]")
    middle = Term("1/(b-a) int [f(x) + m f(x/m)]/2", integral / (2.0 * (b - a)), err / (2.0 * (b - a)))
    right = Term(
        "(m+1)/4 [(f(a)+f(b))/2 + m (f(a/m)+f(b/m))/2]",
        (m + 1.0) / 4.0 * ((pts["a"] + pts["b"]) / 2.0 + m * (pts["a/m"] + pts["b/m"]) / 2.0),
    )
    return _chain("m2", spec, [_mid(spec, pts), middle, right])


def _m3(spec: AuditSpec) -> InequalityReport:
    _check_orientation(spec)
    a, b, m = spec.a, spec.b, spec.m
    pts = _Points(spec, ["a", "b"])
    i1, e1 = _f_integral(spec, a, m * b, "int_a^(mb) f")
    i2, e2 = _f_integral(spec, m * a, b, "int_(ma)^b f")
    ratio = (m * b - a) / (b - m * a)
    lhs = Term("[int_a^(mb) f + (mb-a)/(b-ma) int_(ma)^b f] / (m+1)", (i1 + ratio * i2) / (m + 1.0), (e1 + ratio * e2) / (m + 1.0))
    rhs = Term("(mb-a) (f(a)+f(b))/2", (m * b - a) * (pts["a"] + pts["b"]) / 2.0)
    return _chain("m3", spec, [lhs, rhs])


def _s(spec: AuditSpec) -> InequalityReport:
    s = spec.power_s()
    pts = _Points(spec, ["(a+b)/2", "a", "b"])
    left = Term("2^(s-1) f((a+b)/2)", 2.0 ** (s - 1.0) * pts["(a+b)/2"])
    right = Term("(f(a)+f(b))/(s+1)", (pts["a"] + pts["b"]) / (s + 1.0))
    return _chain("s", spec, [left, _mean(spec), right], {"s": s})


def _q(spec: AuditSpec) -> InequalityReport:
    pts = _Points(spec, ["(a+b)/2"])
    mean = _mean(spec)
    return _chain("q", spec, [_mid(spec, pts), Term("4/(b-a) int f", 4.0 * mean.value, 4.0 * mean.quad_error)])


def _p(spec: AuditSpec) -> InequalityReport:
    pts = _Points(spec, ["(a+b)/2", "a", "b"])
    mean = _mean(spec)
    middle = Term("2/(b-a) int f", 2.0 * mean.value, 2.0 * mean.quad_error)
    return _chain("p", spec, [_mid(spec, pts), middle, Term("2 [f(a)+f(b)]", 2.0 * (pts["a"] + pts["b"]))])


def _h1(spec: AuditSpec) -> InequalityReport:
    pts = _Points(spec, ["(a+b)/2", "a", "b"])
    hh = _h_half(spec)
    if not hh > 0:
        raise AuditPreconditionError(f"h1 needs h(1/2) > 0, got {hh!r}")
    mom = _moments(spec)
    c0 = mom.c0.value
    left = Term("f((a+b)/2) / (2 h(1/2))", pts["(a+b)/2"] / (2.0 * hh))
    right = Term("(f(a)+f(b)) int_0^1 h", (pts["a"] + pts["b"]) * c0, abs(pts["a"] + pts["b"]) * mom.c0.error_estimate)
    return _chain("h1", spec, [left, _mean(spec), right], {"h_half": hh, "c0": c0})


def _hh(spec: AuditSpec) -> InequalityReport:
    pts = _Points(spec, ["(a+b)/2", "a", "b"])
    return _chain("hh", spec, [_mid(spec, pts), _mean(spec), Term("(f(a)+f(b))/2", (pts["a"] + pts["b"]) / 2.0)])


# --------------------------------------------------------------------------
# closed-form special cases of the theorems


def _thm4_one(spec: AuditSpec) -> InequalityReport:
    m = spec.m
    pts = _Points(spec, ["a", "b", "a/m", "b/m"])
    first = pts["a"] + m * pts["b/m"]
    second = pts["b"] + m * pts["a/m"]
    return _chain("thm4-one", spec, [_mean(spec), Term("min(f(a) + m f(b/m), f(b) + m f(a/m))", min(first, second))])


def _thm4_unit_m(spec: AuditSpec) -> InequalityReport:
    pts = _Points(spec, ["a", "b"])
    mom = _moments(spec)
    c0, c1 = mom.c0.value, mom.c1.value
    first = pts["a"] * c0 + pts["b"] * c1
    second = pts["b"] * c0 + pts["a"] * c1
    err = (abs(pts["a"]) + abs(pts["b"])) * max(mom.c0.error_estimate, mom.c1.error_estimate)
    rhs = Term("min(f(a) c0 + f(b) c1, f(b) c0 + f(a) c1)", min(first, second), err)
    return _chain("thm4-unit-m", spec, [_mean(spec), rhs])


def _thm5_one(spec: AuditSpec) -> InequalityReport:
    a, b, m = spec.a, spec.b, spec.m
    pts = _Points(spec, ["(a+b)/2", "a", "b/m", "a/m", "b/m^2"])
    integral, err = _with_rescaled(spec, a, b, "int_a^b [f(x) + m f(x/m)]")
    middle = Term("1/(b-a) int [f(x) + m f(x/m)]", integral / (b - a), err / (b - a))
    right = Term(
        "[f(a) + m f(b/m) + m f(a/m) + m^2 f(b/m^2)] / 2",
        (pts["a"] + m * pts["b/m"] + m * pts["a/m"] + m * m * pts["b/m^2"]) / 2.0,
    )
    return _chain("thm5-one", spec, [_mid(spec, pts), middle, right])


def _thm5_s(spec: AuditSpec) -> InequalityReport:
    s = spec.power_s()
    pts = _Points(spec, ["(a+b)/2", "a", "b"])
    left = Term("2^(s-1) f((a+b)/2)", 2.0 ** (s - 1.0) * pts["(a+b)/2"])
    right = Term("(f(a)+f(b))/2", (pts["a"] + pts["b"]) / 2.0)
    return _chain("thm5-s", spec, [left, _mean(spec), right], {"s": s})


def _thm8_one(spec: AuditSpec) -> InequalityReport:
    _check_orientation(spec)
    pts = _Points(spec, ["a", "b"])
    return _chain("thm8-one", spec, [_thm8_lhs(spec), Term("f(a)+f(b)", pts["a"] + pts["b"])])


THEOREM_IDS = ("thm4", "thm5", "thm8")
_CLASSICAL = {"m1": _m1, "m2": _m2, "m3": _m3, "s": _s, "q": _q, "p": _p, "h1": _h1, "hh": _hh}
_SPECIAL = {
    "thm4-one": _thm4_one,
    "thm4-unit-m": _thm4_unit_m,
    "thm5-one": _thm5_one,
    "thm5-s": _thm5_s,
    "thm8-one": _thm8_one,
}
CLASSICAL_IDS = tuple(_CLASSICAL)
SPECIAL_IDS = tuple(_SPECIAL)
INEQUALITY_IDS = THEOREM_IDS + CLASSICAL_IDS + SPECIAL_IDS


def audit_classical(variant: str, spec: AuditSpec) -> InequalityReport:
    """Audit one of the classical chains (or a closed-form special case)."""
    fn = _CLASSICAL.get(variant) or _SPECIAL.get(variant)
    if fn is None:
        raise AuditPreconditionError(
            f"unknown classical inequality {variant!r}; choose from {', '.join(CLASSICAL_IDS + SPECIAL_IDS)}"
        )
    return fn(spec)


def audit(ineq_id: str, spec: AuditSpec) -> InequalityReport:
    if ineq_id == "thm4":
        return audit_thm4(spec)
    if ineq_id == "thm5":
        return audit_thm5(spec)
    if ineq_id == "thm8":
        return audit_thm8(spec)
    if ineq_id in _CLASSICAL or ineq_id in _SPECIAL:
        return audit_classical(ineq_id, spec)
    raise AuditPreconditionError(f"unknown inequality {ineq_id!r}; choose from {', '.join(INEQUALITY_IDS)}")
