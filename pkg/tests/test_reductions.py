import numpy as np
import pytest

from hmcx.convexity import HMParams
from hmcx.errors import AuditPreconditionError
from hmcx.expr import Kernel, parse
from hmcx.inequalities import AuditSpec, CLASSICAL_IDS, SPECIAL_IDS
from hmcx.quadrature import kernel_moments
from hmcx.reductions import CATALOG, REDUCTION_TOL, get_case, verify_reduction


def spec(f, h="identity", m=1.0, a=0.0, b=1.0, s=None):
    return AuditSpec(parse(f), HMParams(Kernel.from_text(h), m), a, b, s=s)


def test_thm4_to_m1_example():
    r = verify_reduction("thm4-to-m1", None, spec("x^2", m=0.5, a=1, b=2))
    assert r.agrees
    assert r.source.values[1] == pytest.approx(3.0, abs=1e-12)
    assert r.target.values[1] == pytest.approx(3.0, abs=1e-12)


def test_thm4_to_h1_example():
    r = verify_reduction("thm4-to-h1", None, spec("x^2", h="power:0.5"))
    assert r.agrees
    assert r.source.values[1] == pytest.approx(2 / 3, abs=1e-12)
    assert r.target.values[2] == pytest.approx(2 / 3, abs=1e-12)


def test_thm8_to_m3_example():
    r = verify_reduction("thm8-to-m3", None, spec("x^2", m=0.5, a=0.5, b=2))
    assert r.agrees
    lhs, rhs = r.matches
    assert lhs.scale == 0.5 and rhs.scale == 0.5
    assert lhs.target == pytest.approx(0.7013888888888, abs=1e-9)
    assert rhs.target == pytest.approx(1.0625, abs=1e-12)


def test_function_override():
    sp = spec("x^2", m=0.5, a=1, b=2)
    r = verify_reduction(CATALOG["thm4-to-m1"], parse("exp(x)"), sp)
    assert r.agrees and r.source.inputs["f"] == "exp(x)"


def test_every_target_is_reached():
    targets = {case.target for case in CATALOG.values()}
    assert set(SPECIAL_IDS) <= targets
    # q has no new-inequality source; it is audited directly
    assert set(CLASSICAL_IDS) - {"q"} <= targets


def test_catalog_is_consistent():
    for case_id, case in CATALOG.items():
        assert case.case_id == case_id and case.claim
        assert case.m in (None, 1.0)
        for si, ti, _ in case.term_map:
            assert si >= 0 and ti >= 0


@pytest.mark.parametrize("case_id", sorted(CATALOG))
def test_every_case_agrees_at_unit_m(case_id):
    # m = 1 removes the one known transcription drift, so every case must agree
    sp = spec("x^2 + 0.5*x + 0.1", h="power:0.5", m=1.0, a=0.2, b=1.3)
    r = verify_reduction(case_id, None, sp)
    assert r.agrees, [(m.source_scaled, m.target) for m in r.matches]
    assert r.max_difference <= 1e-8


def test_thm4_to_m1_random_quadratics():
    rng = np.random.default_rng(41)
    for _ in range(25):
        c2, c1 = (float(v) for v in rng.uniform(0.0, 3.0, 2))
        m = float(rng.uniform(0.1, 1.0))
        a = float(rng.uniform(0.0, 2.0))
        b = a + float(rng.uniform(0.1, 3.0))
        r = verify_reduction("thm4-to-m1", parse(f"{c2!r}*x^2 + {c1!r}*x"), spec("x", m=m, a=a, b=b))
        assert r.agrees, (c2, c1, m, a, b, r.max_difference)


def test_thm4_to_h1_tracks_moment_symmetry():
    rng = np.random.default_rng(43)
    for _ in range(10):
        c = [float(v) for v in rng.uniform(0.1, 2.0, 3)]
        h = f"custom:{c[0]!r}*t^{c[1]!r} + {c[2]!r}*exp(-t)"
        sp = spec("x^2 + 1", h=h, m=0.7, a=0.3, b=1.9)
        mom = kernel_moments(Kernel.from_text(h))
        r = verify_reduction("thm4-to-h1", None, sp)
        assert r.agrees == mom.symmetric
        assert r.agrees


def test_thm5_to_m2_third_term_drifts_below_unit_m():
    r = verify_reduction("thm5-to-m2", None, spec("x^2", m=0.5, a=1, b=2))
    assert not r.agrees
    first, second, third = r.matches
    assert first.agrees and second.agrees
    assert not third.agrees
    assert third.source_scaled == pytest.approx(6.75, abs=1e-12)
    assert third.target == pytest.approx(2.8125, abs=1e-12)
    assert abs(third.difference) > third.tolerance


def test_mismatch_tolerance_accounting():
    r = verify_reduction("thm5-to-m2", None, spec("x^2"))
    for m in r.matches:
        assert m.tolerance >= REDUCTION_TOL
        assert m.agrees == (abs(m.difference) <= m.tolerance)


def test_thm5_to_s_scale():
    r = verify_reduction("thm5-to-s", None, spec("sqrt(x)", s=0.5))
    assert r.agrees
    assert all(m.scale == pytest.approx(2**-0.5) for m in r.matches)


def test_unknown_case():
    with pytest.raises(AuditPreconditionError, match="thm4-to-m1"):
        get_case("thm9-to-m1")


def test_precondition_failures_propagate():
    with pytest.raises(AuditPreconditionError):
        verify_reduction("thm8-to-m3", None, spec("x^2", m=0.5, a=1, b=2))
