import math

import mpmath as mp
import numpy as np
import pytest

from hmcx.convexity import HMParams
from hmcx.errors import AuditPreconditionError, DivergenceError, EvaluationDomainError
from hmcx.expr import Kernel, parse
from hmcx.inequalities import (
    INEQUALITY_IDS,
    AuditSpec,
    ToleranceSpec,
    audit,
    audit_classical,
    audit_thm4,
    audit_thm5,
    audit_thm8,
)

from .oracles import mean, quad


def spec(f, h="identity", m=1.0, a=0.0, b=1.0, s=None, tol=None):
    kernel = Kernel.from_text(h) if isinstance(h, str) else h
    return AuditSpec(parse(f), HMParams(kernel, m), a, b, tol or ToleranceSpec(), s)


def close(values, expected, tol=1e-8):
    return len(values) == len(expected) and all(abs(v - e) <= tol for v, e in zip(values, expected))


# worked examples


def test_thm4_examples():
    r = audit_thm4(spec("x^2"))
    assert close(r.values, [1 / 3, 0.5]) and r.holds
    r = audit_thm4(spec("x^2", m=0.5, a=1, b=2))
    assert close(r.values, [7 / 3, 3.0]) and r.holds
    assert r.details["branches"] == pytest.approx([4.5, 3.0]) and r.details["min_branch"] == "second"
    r = audit_thm4(spec("x^2", h="one"))
    assert close(r.values, [1 / 3, 1.0]) and r.holds


def test_thm5_examples():
    r = audit_thm5(spec("x^2"))
    assert close(r.values, [0.25, 1 / 3, 0.5]) and r.holds
    r = audit_thm5(spec("x^2", h="one"))
    assert close(r.values, [0.25, 2 / 3, 1.0]) and r.holds


def test_thm5_printed_statement_violation():
    r = audit_thm5(spec("sqrt(x)", h="power:0.5"))
    root_half = 2**-0.5
    assert close(r.values, [root_half, root_half * 4 / 3, root_half])
    first, second = r.pair_verdicts
    assert first.holds and not second.holds
    assert second.slack == pytest.approx(-0.2357022604, abs=1e-8)
    assert r.overall == "violated"


def test_thm8_examples():
    r = audit_thm8(spec("x^2", m=0.5, a=0.5, b=2))
    lhs = (mean(lambda x: x**2, 0.5, 1.0) + mean(lambda x: x**2, 0.25, 2.0)) / 1.5
    assert lhs == pytest.approx(1.4027777777777, abs=1e-10)
    assert close(r.values, [lhs, 2.125]) and r.holds
    r = audit_thm8(spec("x^2", h="one", m=0.5, a=0.5, b=2))
    assert r.values[1] == pytest.approx(4.25, abs=1e-12) and r.holds
    r = audit_thm8(spec("x^2"))
    assert close(r.values, [1 / 3, 0.5]) and r.holds


def test_classical_examples():
    r = audit_classical("s", spec("x^(1/2)", s=0.5))
    assert close(r.values, [0.5, 2 / 3, 2 / 3]) and r.holds
    assert abs(r.pair_verdicts[1].slack) <= 1e-8
    r = audit_classical("m2", spec("x^2", m=0.5, a=1, b=2))
    assert close(r.values, [2.25, 3.5, 2.8125])
    assert r.pair_verdicts[0].holds and not r.pair_verdicts[1].holds
    assert r.pair_verdicts[1].slack == pytest.approx(-0.6875, abs=1e-8)
    r = audit_classical("p", spec("x^2"))
    assert close(r.values, [0.25, 2 / 3, 2.0]) and r.holds
    r = audit_classical("q", spec("x^2", a=1, b=2))
    assert close(r.values, [2.25, 28 / 3]) and r.holds


def test_m2_chain_against_high_precision_oracle():
    with mp.workdps(50):
        left = mp.mpf("1.5") ** 2
        middle = mp.quad(lambda x: x**2 + mp.mpf("0.5") * (2 * x) ** 2, [1, 2]) / 2
        right = mp.mpf("1.5") / 4 * ((1 + 4) / mp.mpf(2) + mp.mpf("0.5") * (4 + 16) / 2)
    r = audit_classical("m2", spec("x^2", m=0.5, a=1, b=2))
    assert close(r.values, [float(left), float(middle), float(right)], 1e-12)


def test_other_chains_respect_their_shapes():
    r = audit_classical("m1", spec("x^2", m=0.5, a=1, b=2))
    assert close(r.values, [7 / 3, 3.0])
    r = audit_classical("m3", spec("x^2", m=0.5, a=0.5, b=2))
    assert close(r.values, [0.5 * 1.4027777777777777, 1.0625])
    r = audit_classical("h1", spec("x^2", h="power:0.5"))
    assert close(r.values, [0.25 / (2 * math.sqrt(0.5)), 1 / 3, 2 / 3])
    r = audit_classical("hh", spec("x^2", a=1, b=3))
    assert close(r.values, [4.0, 13 / 3, 5.0])


# bookkeeping over random specs

_NONNEG = ["x^2", "sqrt(x)", "exp(x)", "x^3 + x", "abs(x - 1)", "log(x + 1)", "1 + 0*x", "x^1.5"]
_KERNEL_TEXT = ["identity", "one", "power:0.5", "power:0.25", "custom:t^2 + t", "custom:sqrt(t)"]
_CHAIN_LENGTHS = {"thm4": 2, "thm5": 3, "thm8": 2, "m1": 2, "m2": 3, "m3": 2, "s": 3, "q": 2, "p": 3, "h1": 3,
                  "hh": 3, "thm4-one": 2, "thm4-unit-m": 2, "thm5-one": 3, "thm5-s": 3, "thm8-one": 2}


def random_spec(rng):
    m = float(rng.uniform(0.3, 1.0))
    a = float(rng.uniform(0.0, 1.0))
    b = a + float(rng.uniform(0.5, 2.0))
    b = max(b, a / m + 0.1)  # keep a < m b for the orientation-sensitive chains
    return spec(
        _NONNEG[rng.integers(len(_NONNEG))],
        _KERNEL_TEXT[rng.integers(len(_KERNEL_TEXT))],
        m,
        a,
        b,
        s=float(rng.uniform(0.1, 1.0)),
    )


def test_catalogue_of_ids():
    assert set(INEQUALITY_IDS) == set(_CHAIN_LENGTHS)


def test_chain_bookkeeping_on_random_specs():
    rng = np.random.default_rng(5)
    for _ in range(100):
        sp = random_spec(rng)
        for ineq in INEQUALITY_IDS:
            r = audit(ineq, sp)
            assert len(r.terms) == _CHAIN_LENGTHS[ineq]
            assert len(r.pair_verdicts) == len(r.terms) - 1
            for lo, hi, v in zip(r.terms, r.terms[1:], r.pair_verdicts):
                assert v.slack == hi.value - lo.value
                assert v.holds == (lo.value <= hi.value + v.allowance)
                assert v.allowance >= sp.tol.allowance(lo.value, hi.value)
            assert r.holds == all(v.holds for v in r.pair_verdicts)
            assert r.worst_slack == min(v.slack for v in r.pair_verdicts)
            assert r.inputs["m"] == sp.m and r.inputs["a"] == sp.a


def test_thm4_holds_for_starshaped_functions():
    rng = np.random.default_rng(17)
    for _ in range(50):
        c2, c1 = (float(v) for v in rng.uniform(0.0, 3.0, 2))
        p = float(rng.uniform(1.0, 4.0))
        f = [f"{c2!r}*x^2 + {c1!r}*x", f"x^{p!r}", "exp(x) - 1", f"{c2!r}*x^{p!r}"][rng.integers(4)]
        m = float(rng.uniform(0.05, 1.0))
        a = float(rng.uniform(0.0, 3.0))
        b = a + float(rng.uniform(0.01, 3.0))
        r = audit_thm4(spec(f, m=m, a=a, b=b))
        assert r.holds, (f, m, a, b, r.values)


def test_thm5_is_hadamard_for_convex_quadratics():
    rng = np.random.default_rng(23)
    for _ in range(30):
        c2, c1, c0 = (float(v) for v in rng.uniform(-2.0, 3.0, 3))
        c2 = abs(c2) + 0.01
        a = float(rng.uniform(0.0, 2.0))
        b = a + float(rng.uniform(0.1, 2.0))
        # shift to keep the quadratic non-negative on [a, b]
        lo = min(c2 * t * t + c1 * t + c0 for t in np.linspace(a, b, 201))
        c0 = float(c0 + max(0.0, -lo))
        f = f"{c2!r}*x^2 + {c1!r}*x + {c0!r}"
        r = audit_thm5(spec(f, a=a, b=b))
        g = lambda x: c2 * x * x + c1 * x + c0  # noqa: E731
        expected = [g((a + b) / 2), mean(g, a, b), (g(a) + g(b)) / 2]
        assert close(r.values, expected, 1e-9 * max(1.0, abs(expected[2])))
        assert r.holds


def test_scaling_covariance():
    rng = np.random.default_rng(31)
    for _ in range(20):
        sp = random_spec(rng)
        scaled = AuditSpec(sp.f.scaled(3.0), sp.params, sp.a, sp.b, sp.tol, sp.s)
        for ineq in INEQUALITY_IDS:
            r, r3 = audit(ineq, sp), audit(ineq, scaled)
            for t, t3 in zip(r.terms, r3.terms):
                assert t3.value == pytest.approx(3.0 * t.value, rel=1e-10, abs=1e-12)
            assert r.overall == r3.overall


ACCEPTANCE_SPECS = [
    ("thm5", dict(f="x^2")),
    ("s", dict(f="x^(1/2)", s=0.5)),
    ("thm4", dict(f="x^2", m=0.5, a=1, b=2)),
    ("m1", dict(f="x^2", m=0.5, a=1, b=2)),
    ("thm5", dict(f="sqrt(x)", h="power:0.5")),
    ("m2", dict(f="x^2", m=0.5, a=1, b=2)),
    ("thm8", dict(f="x^2", m=0.5, a=0.5, b=2)),
    ("m3", dict(f="x^2", m=0.5, a=0.5, b=2)),
]


@pytest.mark.parametrize("ineq, kw", ACCEPTANCE_SPECS)
def test_tightening_tolerance_keeps_verdicts(ineq, kw):
    loose = audit(ineq, spec(**kw))
    tight = audit(ineq, spec(**kw, tol=ToleranceSpec(abs=1e-11, rel=1e-9)))
    assert [v.holds for v in loose.pair_verdicts] == [v.holds for v in tight.pair_verdicts]
    assert close(loose.values, tight.values, 1e-8)


def test_integrals_match_high_precision_oracle():
    cases = [
        ("exp(x)", mp.exp, 0.3, 1.7, 0.6),
        ("log(x + 1)", lambda x: mp.log(x + 1), 0.0, 2.0, 0.8),
        ("x^1.5", lambda x: x ** mp.mpf("1.5"), 0.2, 3.0, 0.5),
    ]
    for src, g, a, b, m in cases:
        sp = spec(src, m=m, a=a, b=b)
        assert audit("thm4", sp).values[0] == pytest.approx(mean(g, a, b), abs=1e-10)
        # identity kernel: h(1/2) = 1/2
        thm5_mid = 0.5 * float(mp.quad(lambda x: g(x) + m * g(x / m), [a, b])) / (b - a)
        assert audit("thm5", sp).values[1] == pytest.approx(thm5_mid, abs=1e-9)
        lhs = (mean(g, a, m * b) + mean(g, m * a, b)) / (m + 1)
        assert audit("thm8", sp).values[0] == pytest.approx(lhs, abs=1e-9)
        assert audit("q", sp).values[1] == pytest.approx(4 * quad(g, a, b) / (b - a), abs=1e-9)


# errors


def test_evaluation_errors_name_the_point():
    with pytest.raises(EvaluationDomainError) as info:
        audit_thm4(spec("sqrt(1 - x)", m=0.5, a=0, b=1))
    assert "b/m" in str(info.value) and info.value.point == 2.0
    with pytest.raises(EvaluationDomainError) as info:
        audit_thm5(spec("sqrt(3 - x)", m=0.5, a=0, b=1))
    assert "f(b/m^2)" in str(info.value) and info.value.point == 4.0


def test_orientation_rejected():
    for ineq in ("thm8", "m3", "thm8-one"):
        with pytest.raises(AuditPreconditionError, match="a < m\\*b"):
            audit(ineq, spec("x^2", m=0.5, a=1, b=2))


def test_reciprocal_kernel_rejected():
    for ineq in ("thm4", "thm8", "h1"):
        with pytest.raises(DivergenceError, match="c0"):
            audit(ineq, spec("x^2", h="reciprocal", m=0.5, a=0.2, b=1))


def test_divergent_integrand_rejected():
    with pytest.raises(DivergenceError):
        audit("q", spec("1/x", a=0.0, b=1.0))


def test_spec_validation():
    with pytest.raises(AuditPreconditionError):
        spec("x", a=2, b=1)
    with pytest.raises(AuditPreconditionError):
        spec("x", a=-1, b=1)
    with pytest.raises(AuditPreconditionError):
        spec("x", m=0.0)
    with pytest.raises(AuditPreconditionError):
        spec("x", s=1.5)
    with pytest.raises(AuditPreconditionError, match="needs s"):
        audit("s", spec("x"))
    with pytest.raises(AuditPreconditionError, match="unknown"):
        audit("thm6", spec("x"))
