"""Hebisch-Sikora gauge of a Euclidean ball and the constants behind its threshold.

For a step-two group the squared Euclidean size of ``delta_{1/t}(p)`` is
``|x|^2 / t^2 + |y|^2 / t^4``: every coordinate scales like ``t^{-weight}``, so
the map is continuous and strictly decreasing from +inf to 0 for ``p != e``.
The gauge is the unique root of ``|delta_{1/t}(p)|^2 = r^2``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .. import rng
from ..carnot_core import GroupSpec, dilate, multiply
from ..errors import InvalidParameterError, PreconditionError
from ..reports import Check, CheckReport, fmt, fmt_pair

# Bisection stops when the bracket is within a couple of ulps; the gauge is
# then accurate to ~1e-16 relative, well inside the 1e-13 budget.
HS_RTOL = 4e-16
HS_MAX_ITER = 200
C1_SAFETY = 1.05
# Angle used to turn an (orthonormal) tangent pair back into a finite pair.
_REFINE_ANGLE = 1e-3


def hs_norm(group: GroupSpec, r: float, p, rtol: float = HS_RTOL, max_iter: int = HS_MAX_ITER):
    if not r > 0:
        raise InvalidParameterError(f"Hebisch-Sikora radius must be positive, got {r}")
    p = group.check(p)
    x, y = p[..., : group.n1], p[..., group.n1 :]
    # Rescale by the dilation delta_{1/s} with s ~ homogeneous size, so the
    # bracketing below works with O(1) numbers (no under- or overflow); the
    # gauge is homogeneous, so the result is multiplied back by s.
    s = np.max(np.abs(x), axis=-1, initial=0.0) + np.sqrt(np.max(np.abs(y), axis=-1, initial=0.0))
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    zero = s == 0
    s_safe = np.where(zero, 1.0, s)
    a = np.sum((x / s_safe[..., None]) ** 2, axis=-1)
    b = np.sum((y / s_safe[..., None] / s_safe[..., None]) ** 2, axis=-1)
    r2 = r * r

    def excess(t):
        return a / (t * t) + b / (t * t) ** 2 - r2

    hi = np.full(a.shape, 1.0 / r)
    lo = hi.copy()
    for _ in range(2100):
        m = excess(hi) > 0
        if not m.any():
            break
        hi[m] *= 2.0
    for _ in range(2100):
        m = (excess(lo) < 0) & ~zero
        if not m.any():
            break
        lo[m] *= 0.5

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        stuck = (mid <= lo) | (mid >= hi)
        above = excess(mid) > 0
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
        done = ((hi - lo) <= rtol * hi) | stuck | zero
        if done.all():
            break
    t = np.where(zero, 0.0, 0.5 * (lo + hi) * s_safe)
    return float(t[0]) if scalar else t


def hs_norm_closed_form(group: GroupSpec, r: float, p):
    """Gauge from the quadratic ``|x|^2 s + |y|^2 s^2 = r^2`` with ``s = 1/t^2``."""
    p = group.check(p)
    x, y = p[..., : group.n1], p[..., group.n1 :]
    size = np.max(np.abs(x), axis=-1, initial=0.0) + np.sqrt(np.max(np.abs(y), axis=-1, initial=0.0))
    zero = size == 0
    size = np.where(zero, 1.0, size)
    a = np.sum((x / size[..., None]) ** 2, axis=-1)
    b = np.sum((y / size[..., None] / size[..., None]) ** 2, axis=-1)
    with np.errstate(divide="ignore"):
        s = 2 * r * r / (a + np.sqrt(a * a + 4 * b * r * r))
    t = np.where(zero, 0.0, size / np.sqrt(s))
    return float(t) if t.ndim == 0 else t


class HSConstants(NamedTuple):
    c1: float
    c2: float
    c1_sampled: float


def _unit(rng_, count, dim):
    v = rng_.standard_normal((count, dim))
    n = np.linalg.norm(v, axis=1)
    keep = n > 1e-300
    return v[keep] / n[keep, None]


def _p1_ratio(group, u1, u2):
    diff = np.linalg.norm(u1 - u2, axis=-1)
    num = np.linalg.norm(group.correction(u1, u2), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(diff > 1e-12, num / diff, -np.inf)


def _tangent_value(group, u, h):
    return float(np.linalg.norm(group.correction(u, h)))


def _orthonormalize(u, h):
    u = u / np.linalg.norm(u)
    h = h - np.dot(h, u) * u
    nh = np.linalg.norm(h)
    return (u, h / nh) if nh > 1e-12 else (u, None)


def _refine(group, u1, u2, rng_, iters=300):
    # sup over unit pairs of |P1(u1,u2)| / |u1-u2| equals cos(theta/2) |P1(u,h)|
    # with u2 = cos(theta) u + sin(theta) h, so it is approached as theta -> 0
    # along the best orthonormal (u, h).
    u, h = _orthonormalize(u1, u2)
    if h is None:
        return -np.inf
    best = _tangent_value(group, u, h)
    step = 0.5
    for _ in range(iters):
        cu, ch = _orthonormalize(u + step * rng_.standard_normal(u.shape), h + step * rng_.standard_normal(h.shape))
        if ch is not None:
            val = _tangent_value(group, cu, ch)
            if val > best:
                u, h, best = cu, ch, val
                continue
        step *= 0.97
    u2 = np.cos(_REFINE_ANGLE) * u + np.sin(_REFINE_ANGLE) * h
    return float(_p1_ratio(group, u, u2))


def estimate_C1_C2(group: GroupSpec, sample_count: int = 4000, seed: int = 0) -> HSConstants:
    """Sampled estimate of the bilinear bound on the group-law correction.

    ``c1_sampled`` is the best ratio ``|P1(u1,u2)| / |u1-u2|`` over unit pairs
    (random pairs followed by a local search near the best ones); ``c1`` adds
    the safety factor. For step two the mixed term vanishes, so ``c2 == 0``.
    """
    if group.kind not in ("heisenberg", "step2"):
        raise PreconditionError(f"constant estimation needs a step-two group, got {group.kind!r}")
    if sample_count < 1:
        raise InvalidParameterError("sample_count must be positive")
    g = rng.stream(seed, "estimate_C1")
    u1 = _unit(g, sample_count, group.n1)
    u2 = _unit(g, sample_count, group.n1)
    m = min(len(u1), len(u2))
    ratios = _p1_ratio(group, u1[:m], u2[:m])
    best = float(np.max(ratios)) if m else -np.inf
    top = np.argsort(-ratios)[: min(8, m)]
    for k in top:
        best = max(best, _refine(group, u1[k], u2[k], g))
    best = max(best, 0.0)
    return HSConstants(C1_SAFETY * best, 0.0, best)


def r0_from_constants(c1: float, c2: float) -> float:
    terms = [1.0]
    if c1 > 0:
        terms.append(2.0 / (np.sqrt(5.0) * c1))
    if c2 > 0:
        terms.append(1.0 / (6.0 * c2))
    return float(min(terms))


@lru_cache(maxsize=64)
def hs_r0(group: GroupSpec, sample_count: int = 4000, seed: int = 0) -> float:
    c = estimate_C1_C2(group, sample_count, seed)
    return r0_from_constants(c.c1, c.c2)


def hs_proof_slacks(group: GroupSpec, r: float, p1, p2, t) -> dict[str, np.ndarray]:
    """Slack (rhs - lhs) of each inequality of the triangle-inequality argument.

    Inputs broadcast: ``p1``, ``p2`` of shape ``(..., n)`` on the Euclidean
    sphere of radius ``r`` and ``t`` of shape ``(...)`` in ``(0, 1)``.
    """
    p1 = group.check(p1)
    p2 = group.check(p2)
    t = np.asarray(t, dtype=float)
    n1 = group.n1
    x1, y1 = p1[..., :n1], p1[..., n1:]
    x2, y2 = p2[..., :n1], p2[..., n1:]
    nx1, nx2 = np.linalg.norm(x1, axis=-1), np.linalg.norm(x2, axis=-1)
    ny1, ny2 = np.linalg.norm(y1, axis=-1), np.linalg.norm(y2, axis=-1)
    s = 1.0 - t
    tt = t * s
    P = group.correction(x1, x2)
    w = (t * t)[..., None] * y1 + (s * s)[..., None] * y2
    avg = t[..., None] * x1 + s[..., None] * x2

    lhs1 = np.sum(avg**2, axis=-1) + tt * (1 + tt) * np.sum(P**2, axis=-1)
    mid1 = (t * nx1 + s * nx2) ** 2
    rhs1 = t * nx1**2 + s * nx2**2
    lhs2 = (1 + tt) * np.sum(w**2, axis=-1)
    mid2 = (t * ny1 + s * ny2) ** 2
    rhs2 = t * ny1**2 + s * ny2**2
    prod = multiply(group, dilate(group, t, p1), dilate(group, s, p2))
    return {
        "split1_first": mid1 - lhs1,
        "split1_second": rhs1 - mid1,
        "split2_first": mid2 - lhs2,
        "split2_second": rhs2 - mid2,
        "readytosplit": r * r - (lhs1 + lhs2),
        "new_euclidean": r * r - np.sum(prod**2, axis=-1),
    }


def _sphere(g, count, dim, r):
    v = g.standard_normal((count, dim))
    return r * v / np.linalg.norm(v, axis=1, keepdims=True)


def verify_hs_proof_inequalities(
    group: GroupSpec,
    r: float,
    sample_count: int = 10_000,
    seed: int = 0,
    tol: float = 1e-10,
    r0: float | None = None,
) -> CheckReport:
    if r0 is None:
        r0 = hs_r0(group)
    if not 0 < r < r0:
        raise PreconditionError(f"radius r={fmt(r)} is outside the guaranteed range (0, r0={fmt(r0)})")
    g = rng.stream(seed, "hs_proof")
    p1 = _sphere(g, sample_count, group.total_dim, r)
    p2 = _sphere(g, sample_count, group.total_dim, r)
    t = g.uniform(0.0, 1.0, sample_count)
    t = np.where(t == 0.0, 0.5, t)
    slacks = hs_proof_slacks(group, r, p1, p2, t)

    report = CheckReport("hebisch-sikora proof inequalities", flags={"r": r, "r0": r0, "samples": sample_count})
    for name, sl in slacks.items():
        k = int(np.argmin(sl))
        report.checks.append(
            Check(name, float(sl[k]), bool(sl[k] >= -tol), fmt_pair(p1[k], p2[k]) + f";t={fmt(float(t[k]))}")
        )

    # Equality case: p1 = p2 = (x, 0) with |x| = r.
    x = np.zeros(group.total_dim)
    x[: group.n1] = _sphere(g, 1, group.n1, r)[0]
    eq = hs_proof_slacks(group, r, x, x, np.array(0.37))["new_euclidean"]
    report.checks.append(Check("equality_case", float(eq), bool(abs(eq) <= 1e-12), fmt_pair(x, x)))

    near = np.argsort(slacks["new_euclidean"])[:5]
    report.flags["near_equality"] = [
        {"pair": fmt_pair(p1[k], p2[k]), "t": float(t[k]), "slack": float(slacks["new_euclidean"][k])} for k in near
    ]
    return report
