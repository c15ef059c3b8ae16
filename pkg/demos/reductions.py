"""
Specialising to classical inequalities
======================================

"""

from hmcx import CATALOG, AuditSpec, HMParams, Kernel, parse, verify_reduction

sp = AuditSpec(parse("x^2"), HMParams(Kernel.identity(), 0.5), 0.5, 2.0)

# each case substitutes (h, m), runs both chains and compares mapped terms
for case_id in ("thm4-to-m1", "thm8-to-m3", "thm8-to-hh", "thm5-to-m2"):
    r = verify_reduction(case_id, None, sp)
    print(case_id, "agrees" if r.agrees else "MISMATCH")
    for m in r.matches:
        print(f"    {m.scale:6.3f} * src[{m.source_index}] = {m.source_scaled:.6f}   tgt[{m.target_index}] = {m.target:.6f}")

# the full catalogue, on a spec where every case applies
unit = AuditSpec(parse("exp(x)"), HMParams(Kernel.power(0.5), 1.0), 0.2, 1.5)
for case_id, case in CATALOG.items():
    print(f"{case_id:14s} {verify_reduction(case, None, unit).agrees}  {case.claim}")
