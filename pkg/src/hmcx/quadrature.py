"""Adaptive Gauss-Kronrod quadrature with divergence detection.

Each subinterval is integrated with the 15-point Kronrod rule and the
embedded 7-point Gauss rule; their difference is the local error estimate.
An interval is accepted once its estimate is within its share of the
tolerance (proportional to its length), otherwise it is halved, down to a
depth of 50 or until the interval is a few ulps wide.

When the summed estimate still exceeds the tolerance, the unresolved
intervals are inspected: if most of their error sits next to an endpoint and
the mass of successive dyadic shells approaching that endpoint does not
decay, the integral is reported as divergent. Otherwise it is merely
unconverged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DivergenceError
from .expr import Kernel

__all__ = ["QuadResult", "KernelMoments", "integrate", "kernel_moments", "DEFAULT_TOL", "MAX_DEPTH"]

DEFAULT_TOL = 1e-9
MAX_DEPTH = 50
MAX_INTERVALS = 50_000

# Kronrod abscissae on [-1, 1] (non-negative half; index 7 is the centre).
# Odd indices are the 7-point Gauss nodes.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 nodes, ascending
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[[9, 11, 13]] = _WG[2::-1]
GAUSS_WEIGHTS[7] = _WG[3]

# Divergence test: shells at these dyadic depths must not shrink faster than
# _SHELL_DECAY per level; unresolved error within 2**-_NEAR_DEPTH of an
# endpoint counts as concentrated there.
_SHELL_DEPTHS = range(20, 40)
_SHELL_DECAY = 0.9
_NEAR_DEPTH = 16
_MIN_WIDTH_ULPS = 64


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    converged: bool
    subdivisions: int
    diverged: bool = False

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "error_estimate": self.error_estimate,
            "converged": self.converged,
            "diverged": self.diverged,
            "subdivisions": self.subdivisions,
        }


@dataclass(frozen=True)
class KernelMoments:
    """c0 = integral of h(t) over [0,1]; c1 = integral of h(1-t) over [0,1]."""

    c0: QuadResult
    c1: QuadResult

    @property
    def converged(self) -> bool:
        return self.c0.converged and self.c1.converged

    @property
    def symmetric(self) -> bool:
        """Whether c0 and c1 agree within their combined error estimates."""
        if not self.converged:
            return False
        err = self.c0.error_estimate + self.c1.error_estimate
        return abs(self.c0.value - self.c1.value) <= err + 4 * np.finfo(float).eps * abs(self.c0.value)


def gk15(g: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> tuple[float, float]:
    """Kronrod and Gauss estimates of the integral of g over [lo, hi]."""
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    fx = np.asarray(g(centre + half * NODES), dtype=float)
    return half * float(KRONROD_WEIGHTS @ fx), half * float(GAUSS_WEIGHTS @ fx)


def _gk15_batch(g, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    centre = 0.5 * (a + b)
    half = 0.5 * (b - a)
    xs = centre[:, None] + half[:, None] * NODES[None, :]
    fx = np.asarray(g(xs.ravel()), dtype=float).reshape(xs.shape)
    return half * (fx @ KRONROD_WEIGHTS), half * (fx @ GAUSS_WEIGHTS)


def _endpoint_diverges(g, anchor: float, direction: float, length: float) -> bool:
    # Mass of dyadic shells [L/2^(d+1), L/2^d] measured from the endpoint.
    shells = []
    for d in _SHELL_DEPTHS:
        outer = length / 2.0**d
        inner = outer / 2.0
        lo, hi = sorted((anchor + direction * inner, anchor + direction * outer))
        shells.append(gk15(g, lo, hi)[0])
    shells = np.array(shells)
    if not np.all(np.sign(shells) == np.sign(shells[0])) or shells[0] == 0:
        return False
    mags = np.abs(shells)
    return bool(np.all(mags[1:] >= _SHELL_DECAY * mags[:-1]))


def integrate(
    g: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    tol: float = DEFAULT_TOL,
) -> QuadResult:
    """Integrate a vectorised ``g`` over ``[lo, hi]`` to absolute tolerance ``tol``.

    ``g`` receives numpy arrays of abscissae. Domain errors raised by ``g``
    propagate unchanged. A result with ``converged=False`` carries a value
    that should not be trusted; ``diverged=True`` additionally means the
    unresolved mass piles up at an endpoint.
    """
    lo = float(lo)
    hi = float(hi)
    if not lo < hi:
        raise ValueError(f"integration bounds must satisfy lo < hi, got [{lo!r}, {hi!r}]")
    if not tol > 0:
        raise ValueError(f"tolerance must be positive, got {tol!r}")
    total = hi - lo
    value = 0.0
    error = 0.0
    subdivisions = 0
    failed_lo, failed_hi, failed_err = [], [], []
    # refine level by level so each depth costs one vectorised call
    a = np.array([lo])
    b = np.array([hi])
    depth = 0
    while a.size:
        k, gs = _gk15_batch(g, a, b)
        err = np.abs(k - gs)
        ok = err <= tol * (b - a) / total
        floor = _MIN_WIDTH_ULPS * np.spacing(np.maximum(np.abs(a), np.abs(b)))
        stuck = ~ok & ((b - a) <= floor)
        if depth >= MAX_DEPTH or subdivisions + np.count_nonzero(~ok & ~stuck) > MAX_INTERVALS:
            stuck = ~ok
        done = ok | stuck
        value += float(np.sum(k[done]))
        error += float(np.sum(err[done]))
        failed_lo.append(a[stuck])
        failed_hi.append(b[stuck])
        failed_err.append(err[stuck])
        a, b = a[~done], b[~done]
        mid = 0.5 * (a + b)
        subdivisions += a.size
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
        order = np.argsort(a, kind="stable")
        a, b = a[order], b[order]
        depth += 1
    fa = np.concatenate(failed_lo)
    fb = np.concatenate(failed_hi)
    fe = np.concatenate(failed_err)

    # the length-proportional split is sufficient, not necessary
    converged = fa.size == 0 or error <= tol
    diverged = False
    if not converged:
        near = total / 2.0**_NEAR_DEPTH
        unresolved = float(fe.sum())
        near_lo = float(fe[fa - lo <= near].sum())
        near_hi = float(fe[hi - fb <= near].sum())
        diverged = (near_lo >= 0.5 * unresolved and _endpoint_diverges(g, lo, 1.0, total)) or (
            near_hi >= 0.5 * unresolved and _endpoint_diverges(g, hi, -1.0, total)
        )
    return QuadResult(value, error, converged, subdivisions, diverged)


def _preset_moments(h: Kernel) -> float | None:
    if h.kind == "identity":
        return 0.5
    if h.kind == "one":
        return 1.0
    if h.kind == "power":
        return 1.0 / (h.s + 1.0)
    return None


def kernel_moments(h: Kernel, tol: float = DEFAULT_TOL) -> KernelMoments:
    """Both kernel moments; closed forms for presets, quadrature for custom kernels.

    Raises DivergenceError naming the moment when an integral diverges, which
    is always the case for the reciprocal kernel.
    """
    if h.kind == "reciprocal":
        raise DivergenceError("moment c0 = integral of h(t) over [0,1] diverges for the reciprocal kernel")
    exact = _preset_moments(h)
    if exact is not None:
        r = QuadResult(exact, 0.0, True, 0)
        return KernelMoments(r, r)
    c0 = integrate(lambda t: h(t), 0.0, 1.0, tol)
    if c0.diverged:
        raise DivergenceError(f"moment c0 = integral of h(t) over [0,1] diverges for kernel {h.text()}")
    c1 = integrate(lambda t: h(1.0 - t), 0.0, 1.0, tol)
    if c1.diverged:
        raise DivergenceError(f"moment c1 = integral of h(1-t) over [0,1] diverges for kernel {h.text()}")
    return KernelMoments(c0, c1)
