"""
Auditing the Hadamard-type chains
=================================

"""

from hmcx import AuditSpec, HMParams, Kernel, audit, parse


def spec(f, h="identity", m=1.0, a=0.0, b=1.0, s=None):
    return AuditSpec(parse(f), HMParams(Kernel.from_text(h), m), a, b, s=s)


def show(report):
    print(report.inequality_id, report.overall)
    for term in report.terms:
        print(f"    {term.value:.10f}  {term.label}")
    print("    slacks:", [round(v.slack, 10) for v in report.pair_verdicts])


# for h = t and m = 1 the three-term chain is the classical one
show(audit("thm5", spec("x^2")))

# the mean is bounded by the cheaper of two endpoint combinations
show(audit("thm4", spec("x^2", m=0.5, a=1, b=2)))

# the averaged form on [a, mb] and [ma, b]
show(audit("thm8", spec("x^2", m=0.5, a=0.5, b=2)))

# the right pair of the s-type chain is tight for sqrt on [0, 1]
show(audit("s", spec("x^(1/2)", s=0.5)))

# two statements fail numerically as written
show(audit("thm5", spec("sqrt(x)", h="power:0.5")))
show(audit("m2", spec("x^2", m=0.5, a=1, b=2)))
