"""
Searching for class-membership violations
==========================================

"""

# sqrt is concave, so it should fail ordinary convexity (h(t) = t, m = 1)
from hmcx import HMParams, Kernel, check_membership, parse

f = parse("sqrt(x)")
report = check_membership(f, HMParams(Kernel.identity(), m=1.0), budget=100_000, seed=42)
print(report.verdict)
print(report.worst)

# the gap sqrt(u) - u peaks at u = 1/4 with value 1/4
c = report.worst
print("alpha*x + (1-alpha)*y =", c.alpha * c.x + (1 - c.alpha) * c.y)

# x^2 with h(t) = sqrt(t) is in the class for any m, since sqrt(t) >= t
for m in (1.0, 0.5):
    r = check_membership(parse("x^2"), HMParams(Kernel.power(0.5), m), budget=100_000)
    print(m, r.verdict, r.max_defect_seen)

# a kernel below t breaks it: h(t) = t^2 loses 2 alpha (1 - alpha) at x = y = 1
r = check_membership(parse("x^2"), HMParams(Kernel.custom("t^2")), budget=50_000)
print(r.worst.gap, (r.worst.x, r.worst.y, r.worst.alpha))
