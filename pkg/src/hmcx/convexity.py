"""Membership testing for (h, m)-convexity classes.

A function f >= 0 on [0, b] belongs to the class of a kernel h and a
parameter m in [0, 1] when, for all x, y in [0, b] and alpha in (0, 1),

    f(alpha x + m (1 - alpha) y) <= h(alpha) f(x) + m h(1 - alpha) f(y).

The left side minus the right side is the *defect*. Membership cannot be
proven by sampling, so :func:`check_membership` searches for a positive
defect and either returns a certificate or reports that none was found.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import DominationError, NonNegativityError, ValidationError
from .expr import FunctionExpr, Kernel

__all__ = [
    "HMParams",
    "Domain",
    "ViolationCertificate",
    "MembershipReport",
    "ClosureReport",
    "DominationReport",
    "defect",
    "defect_terms",
    "check_membership",
    "verify_closure",
    "compare_kernels",
    "worker_count",
    "EPSILON",
    "PASS_MARGIN",
]

EPSILON = 1e-9
PASS_MARGIN = 1e-7
PHASE1_FRACTION = 0.8
RESTARTS = 8
CHUNK = 4096
GOLDEN_STEPS = 20
WIDTH_SHRINK = 0.7

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def worker_count() -> int:
    """Thread pool size: ``HMCX_THREADS`` if set, else the CPU count."""
    env = os.environ.get("HMCX_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValidationError(f"HMCX_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ValidationError(f"HMCX_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class HMParams:
    h: Kernel
    m: float = 1.0
    direction: str = "convex"

    def __post_init__(self):
        if not (0.0 <= self.m <= 1.0):
            raise ValidationError(f"m must lie in [0, 1], got {self.m!r}")
        if self.direction not in ("convex", "concave"):
            raise ValidationError(f"direction must be 'convex' or 'concave', got {self.direction!r}")

    @property
    def sign(self) -> float:
        return 1.0 if self.direction == "convex" else -1.0

    def to_dict(self) -> dict:
        return {"h": self.h.text(), "m": self.m, "direction": self.direction}


@dataclass(frozen=True)
class Domain:
    """The interval [0, b_cap] on which membership is tested."""

    b_cap: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.b_cap) and self.b_cap > 0):
            raise ValidationError(f"domain cap must be finite and positive, got {self.b_cap!r}")


@dataclass(frozen=True)
class ViolationCertificate:
    x: float
    y: float
    alpha: float
    lhs: float
    rhs: float
    gap: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MembershipReport:
    verdict: str  # "no-violation-found" | "violated"
    worst: Optional[ViolationCertificate]
    max_defect_seen: float
    samples_used: int
    seed: int
    pass_margin: float = PASS_MARGIN

    @property
    def violated(self) -> bool:
        return self.verdict == "violated"


@dataclass(frozen=True)
class ClosureReport:
    trials: int
    max_sum_discrepancy: float
    max_scale_discrepancy: float
    max_relative_discrepancy: float
    holds: bool
    seed: int


@dataclass(frozen=True)
class DominationReport:
    trials: int
    ordering_violations: int
    max_ordering_violation: float
    holds: bool
    seed: int


def defect_terms(f: FunctionExpr, params: HMParams, x, y, alpha):
    """(lhs, rhs) of the defining inequality; vectorised over x, y, alpha."""
    m = params.m
    z = alpha * x + m * (1.0 - alpha) * y
    lhs = f(z, "f(alpha*x + m*(1-alpha)*y)")
    rhs = params.h(alpha, "h(alpha)") * f(x, "f(x)") + m * params.h(1.0 - alpha, "h(1-alpha)") * f(y, "f(y)")
    return lhs, rhs


def defect(f: FunctionExpr, params: HMParams, x, y, alpha):
    """lhs - rhs; positive values violate the convex direction.

    The sign is not flipped for the concave direction; callers compare
    ``params.sign * defect``.
    """
    lhs, rhs = defect_terms(f, params, x, y, alpha)
    return lhs - rhs


def _certificate(f, params, x, y, alpha) -> ViolationCertificate:
    x, y, alpha = float(x), float(y), float(alpha)
    lhs, rhs = defect_terms(f, params, x, y, alpha)
    gap = params.sign * (lhs - rhs)
    return ViolationCertificate(x, y, alpha, float(lhs), float(rhs), float(gap))


def _strata(n: int) -> int:
    k = int(round(n ** (1.0 / 3.0)))
    while k**3 > n:
        k -= 1
    return max(k, 1)


def _screen(f: FunctionExpr, pts: np.ndarray) -> None:
    vals = f(pts, "f")
    neg = vals < 0
    if neg.any():
        i = int(np.flatnonzero(neg)[0])
        raise NonNegativityError(float(pts[i]), float(vals[i]))


def _phase1_item(f, params, b_cap, k, n_cells, start, stop, seed, item):
    """Samples for cells [start, stop); cells beyond k**3 are uniform fills."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, item]))
    idx = np.arange(start, stop)
    u = rng.random((idx.size, 3))
    lo_a, hi_a = EPSILON, 1.0 - EPSILON
    cell = idx < n_cells
    i = idx % k
    j = (idx // k) % k
    l = idx // (k * k)
    x = np.where(cell, (i + u[:, 0]) / k, u[:, 0]) * b_cap
    y = np.where(cell, (j + u[:, 1]) / k, u[:, 1]) * b_cap
    alpha = lo_a + np.where(cell, (l + u[:, 2]) / k, u[:, 2]) * (hi_a - lo_a)
    x = np.minimum(x, b_cap)
    y = np.minimum(y, b_cap)
    _screen(f, x)
    _screen(f, y)
    d = params.sign * defect(f, params, x, y, alpha)
    return x, y, alpha, d


def _golden_max(fn, lo: np.ndarray, hi: np.ndarray, steps: int):
    """Vectorised golden-section maximisation of fn on [lo, hi] per row.

    The bracket endpoints are probed too, since maxima of the defect often
    sit on the boundary of the sampling box.
    """
    a, b = lo.copy(), hi.copy()
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(steps):
        left = fc >= fd
        a, b = np.where(left, a, c), np.where(left, d, b)
        c, d = (
            np.where(left, b - _INVPHI * (b - a), d),
            np.where(left, c, a + _INVPHI * (b - a)),
        )
        probe = np.where(left, c, d)
        fp = fn(probe)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
    best = np.where(fc >= fd, c, d)
    best_val = np.maximum(fc, fd)
    for edge in (lo, hi):
        fe = fn(edge)
        take = fe > best_val
        best = np.where(take, edge, best)
        best_val = np.where(take, fe, best_val)
    return best, best_val, steps + 4


def _refine(f, params, b_cap, starts, start_vals, budget, k):
    """Coordinate-wise golden-section ascent from several starts in lockstep.

    ``budget`` is per start; returns evaluations spent per start.
    """
    pts = starts.copy()
    vals = start_vals.copy()
    bounds = np.array([[0.0, b_cap], [0.0, b_cap], [EPSILON, 1.0 - EPSILON]])
    width = 2.0 * (bounds[:, 1] - bounds[:, 0]) / k
    per_line = GOLDEN_STEPS + 5
    used = 0
    seen_max = -np.inf
    while used + per_line <= budget:
        for coord in range(3):
            if used + per_line > budget:
                break
            lo = np.maximum(pts[:, coord] - width[coord], bounds[coord, 0])
            hi = np.minimum(pts[:, coord] + width[coord], bounds[coord, 1])

            def fn(v, coord=coord):
                trial = pts.copy()
                trial[:, coord] = v
                return params.sign * defect(f, params, trial[:, 0], trial[:, 1], trial[:, 2])

            best, best_val, evals = _golden_max(fn, lo, hi, GOLDEN_STEPS)
            # candidate is re-evaluated at its exact coordinates
            cand = pts.copy()
            cand[:, coord] = best
            cand_val = fn(best)
            used += evals + 1
            seen_max = max(seen_max, float(best_val.max()), float(cand_val.max()))
            better = cand_val > vals
            pts[better] = cand[better]
            vals[better] = cand_val[better]
        width = width * WIDTH_SHRINK
    return pts, vals, used, seen_max


def check_membership(
    f: FunctionExpr,
    params: HMParams,
    domain: Domain = Domain(),
    budget: int = 100_000,
    seed: int = 0,
    workers: int | None = None,
) -> MembershipReport:
    """Search for a violation of the class inequality on [0, b_cap].

    80% of the budget goes to stratified random sampling of (x, y, alpha);
    the rest to golden-section refinement from the best sampled points.
    Results depend only on (f, params, domain, budget, seed), never on
    ``workers``.

    Raises NonNegativityError if f is negative at a screened point.
    """
    if budget < 1000:
        raise ValidationError(f"budget must be at least 1000, got {budget}")
    if seed < 0:
        raise ValidationError(f"seed must be non-negative, got {seed}")
    b_cap = domain.b_cap
    n1 = int(budget * PHASE1_FRACTION)
    k = _strata(n1)
    _screen(f, np.linspace(0.0, b_cap, k + 1))

    items = [(s, min(s + CHUNK, n1), i) for i, s in enumerate(range(0, n1, CHUNK))]
    workers = workers or worker_count()
    args = [(f, params, b_cap, k, k**3, s, e, seed, i) for s, e, i in items]
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
            results = list(pool.map(lambda a: _phase1_item(*a), args))
    else:
        results = [_phase1_item(*a) for a in args]
    x = np.concatenate([r[0] for r in results])
    y = np.concatenate([r[1] for r in results])
    alpha = np.concatenate([r[2] for r in results])
    d = np.concatenate([r[3] for r in results])
    max_seen = float(d.max())

    n_starts = min(RESTARTS, d.size)
    order = np.argsort(-d, kind="stable")[:n_starts]
    starts = np.column_stack([x[order], y[order], alpha[order]])
    per_start = (budget - n1) // n_starts
    pts, vals, used, refine_max = _refine(f, params, b_cap, starts, d[order], per_start, k)
    max_seen = max(max_seen, refine_max)

    best = int(np.argmax(vals))
    worst = None
    if vals[best] > PASS_MARGIN:
        worst = _certificate(f, params, *pts[best])
        if worst.gap <= PASS_MARGIN:
            worst = None
    verdict = "violated" if worst is not None else "no-violation-found"
    return MembershipReport(verdict, worst, max_seen, n1 + used * n_starts, seed)


def _sample_points(rng, trials: int, b_cap: float):
    x = rng.random(trials) * b_cap
    y = rng.random(trials) * b_cap
    alpha = EPSILON + rng.random(trials) * (1.0 - 2.0 * EPSILON)
    return x, y, alpha


def verify_closure(
    f: FunctionExpr,
    g: FunctionExpr,
    params: HMParams,
    lam: float,
    trials: int = 200,
    seed: int = 0,
    domain: Domain = Domain(),
) -> ClosureReport:
    """Check that the defect is additive in f and homogeneous under scaling.

    Both identities are what make sums and positive multiples of class
    members stay in the class. They are checked pointwise at random
    (x, y, alpha) to 1e-10 relative to the size of the terms involved.
    """
    if trials < 100:
        raise ValidationError(f"trials must be at least 100, got {trials}")
    if not lam > 0:
        raise ValidationError(f"lambda must be positive, got {lam!r}")
    rng = np.random.default_rng(seed)
    x, y, alpha = _sample_points(rng, trials, domain.b_cap)
    fg = f + g
    lf = f.scaled(lam)
    lf_, rf_ = defect_terms(f, params, x, y, alpha)
    lg_, rg_ = defect_terms(g, params, x, y, alpha)
    d_sum = defect(fg, params, x, y, alpha)
    d_scaled = defect(lf, params, x, y, alpha)
    d_f = lf_ - rf_
    d_g = lg_ - rg_
    sum_err = np.abs(d_sum - d_f - d_g)
    scale_err = np.abs(d_scaled - lam * d_f)
    size_sum = np.abs(lf_) + np.abs(rf_) + np.abs(lg_) + np.abs(rg_)
    size_scaled = lam * (np.abs(lf_) + np.abs(rf_))
    rel = np.maximum(
        np.divide(sum_err, size_sum, out=np.zeros_like(sum_err), where=size_sum > 0),
        np.divide(scale_err, size_scaled, out=np.zeros_like(scale_err), where=size_scaled > 0),
    )
    ok = (sum_err <= 1e-10 * size_sum) & (scale_err <= 1e-10 * size_scaled)
    return ClosureReport(trials, float(sum_err.max()), float(scale_err.max()), float(rel.max()), bool(ok.all()), seed)


def compare_kernels(
    h2: Kernel,
    h1: Kernel,
    f: FunctionExpr,
    m: float,
    trials: int = 10_000,
    seed: int = 0,
    domain: Domain = Domain(),
) -> DominationReport:
    """Check that enlarging the kernel can only shrink the defect.

    Requires h2 <= h1 on a 1000-point grid of (0, 1) and f >= 0; then at every
    sampled point the defect under h1 must not exceed the defect under h2.
    """
    grid = np.linspace(0.0, 1.0, 1002)[1:-1]
    v2, v1 = h2(grid, "h2"), h1(grid, "h1")
    bad = v2 > v1
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DominationError(float(grid[i]), float(v2[i]), float(v1[i]))
    rng = np.random.default_rng(seed)
    x, y, alpha = _sample_points(rng, trials, domain.b_cap)
    _screen(f, x)
    _screen(f, y)
    d1 = defect(f, HMParams(h1, m), x, y, alpha)
    d2 = defect(f, HMParams(h2, m), x, y, alpha)
    excess = d1 - d2
    violations = int(np.count_nonzero(excess > 1e-12))
    return DominationReport(trials, violations, float(max(excess.max(), 0.0)), violations == 0, seed)
