"""
Adaptive quadrature and kernel moments
======================================

"""

import numpy as np

from hmcx import Kernel, integrate, kernel_moments, parse

# integrable endpoint singularities converge
print(integrate(parse("sqrt(x)"), 0.0, 1.0))
print(integrate(parse("log(x)"), 0.0, 1.0))

# 1/x does not; the unresolved mass piles up at 0 and is flagged
r = integrate(parse("1/x"), 0.0, 1.0)
print(r.converged, r.diverged)

# moments of the presets come in closed form
for h in (Kernel.identity(), Kernel.one(), Kernel.power(0.5)):
    m = kernel_moments(h)
    print(h.text(), m.c0.value, m.c1.value)

# custom kernels are integrated; c0 and c1 always agree by symmetry
m = kernel_moments(Kernel.custom("exp(t) * t^2"))
print(m.c0.value, m.c1.value, m.symmetric)
print("exact:", np.e - 2)
