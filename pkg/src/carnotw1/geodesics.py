"""Metric segments, ratio sets and explicit geodesics in the 1-Wasserstein space.

Every curve here is piecewise mass-linear: between consecutive knots the
measure is ``(1 - s) * knot_k + s * knot_{k+1}``. A curve is a unit-speed
geodesic when ``d1(gamma(t), gamma(s)) = |t - s|`` for all ``t, s``, which
:func:`validate_unit_speed` checks on every pair of a time grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import rng
from .carnot_core import dilate, inverse, is_horizontal, multiply, DEFAULT_HORIZONTAL_TOL
from .errors import InvalidParameterError, PreconditionError
from .norms import NormSpec, distance
from .reports import fmt, to_csv, to_json
from .transport import network_simplex
from .wasserstein import (
    POINT_TOL,
    DiscreteMeasure,
    cost_matrix,
    decompose,
    dirac,
    empty_measure,
    mix,
    translate_measure,
    w1,
    w1_distance,
)

GEODESIC_TOL = 1e-9
SWEEP_COUNT = 1000


@dataclass(frozen=True, eq=False)
class GeodesicCurve:
    knots: tuple[tuple[float, DiscreteMeasure], ...]

    def __post_init__(self):
        if not self.knots:
            raise InvalidParameterError("a curve needs at least one knot")
        times = [t for t, _ in self.knots]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidParameterError(f"knot times must be strictly increasing, got {times}")
        totals = [m.total for _, m in self.knots]
        if any(abs(a - b) > 1e-10 for a, b in zip(totals, totals[1:])):
            raise InvalidParameterError(f"knot measures must share one total mass, got {totals}")

    @property
    def domain(self) -> tuple[float, float]:
        return self.knots[0][0], self.knots[-1][0]

    @property
    def times(self) -> list[float]:
        return [t for t, _ in self.knots]

    def evaluate(self, t: float) -> DiscreteMeasure:
        t0, t1 = self.domain
        slack = 1e-12 * max(1.0, abs(t0), abs(t1))
        if not t0 - slack <= t <= t1 + slack:
            raise InvalidParameterError(f"time {t} outside the curve's domain [{t0}, {t1}]")
        t = min(max(t, t0), t1)
        for (ta, ma), (tb, mb) in zip(self.knots, self.knots[1:]):
            if t <= tb:
                s = (t - ta) / (tb - ta)
                if s <= 0.0:
                    return ma
                if s >= 1.0:
                    return mb
                return mix([(1.0 - s, ma), (s, mb)])
        return self.knots[-1][1]

    __call__ = evaluate

    def to_dict(self) -> dict:
        return {"knots": [{"t": float(t), "measure": m.to_dict()} for t, m in self.knots]}


def _curve(knots: Sequence[tuple[float, DiscreteMeasure]]) -> GeodesicCurve:
    return GeodesicCurve(tuple((float(t), m) for t, m in knots))


def _distinct(norm: NormSpec, q, qp) -> tuple[np.ndarray, np.ndarray]:
    g = norm.group
    q, qp = g.check(q), g.check(qp)
    if np.linalg.norm(q - qp) <= POINT_TOL:
        raise InvalidParameterError("the two points must be distinct")
    return q, qp


def tilde_related(norm: NormSpec, q, qp, tol: float = DEFAULT_HORIZONTAL_TOL) -> bool:
    """Whether the metric segment between ``q`` and ``qp`` is just its endpoints.

    Under horizontal strict convexity this holds exactly when ``q^-1 qp`` is
    not horizontal, which is what is evaluated; other norms are refused.
    """
    if not norm.is_hsc:
        raise PreconditionError(
            f"norm {norm.describe()} is not known to be horizontally strictly convex; use sampled_segment_search"
        )
    q, qp = _distinct(norm, q, qp)
    g = norm.group
    return not is_horizontal(g, multiply(g, inverse(g, q), qp), tol)


def segment_defect(norm: NormSpec, q, qp, r):
    """``d(q, r) + d(r, qp) - d(q, qp)``; zero exactly on the metric segment."""
    return distance(norm, q, r) + distance(norm, r, qp) - distance(norm, q, qp)


def sampled_segment_search(
    norm: NormSpec, q, qp, sample_count: int = 10_000, seed: int = 0, tol: float = GEODESIC_TOL
):
    """Look for an interior point of the metric segment ``[q, qp]``.

    Candidates are horizontal interpolants ``q . delta_a(q^-1 qp)`` and points
    scattered around the Euclidean segment. The candidate with the smallest
    defect is returned if that defect is at most ``tol * max(1, d(q, qp))``.
    Candidates within ``1e-6 * d(q, qp)`` of an endpoint are discarded.
    """
    q, qp = _distinct(norm, q, qp)
    g = norm.group
    gen = rng.stream(seed, "segment_search")
    D = float(distance(norm, q, qp))
    k1 = sample_count // 2
    k2 = sample_count - k1
    alpha = gen.uniform(0.0, 1.0, k1)
    interp = multiply(g, q[None, :], dilate(g, alpha, np.broadcast_to(multiply(g, inverse(g, q), qp), (k1, g.total_dim))))
    beta = gen.uniform(0.0, 1.0, k2)
    spread = 0.1 * np.linalg.norm(qp - q) * gen.uniform(0.0, 1.0, k2)[:, None]
    euclid = q + beta[:, None] * (qp - q) + spread * gen.standard_normal((k2, g.total_dim))
    cand = np.vstack([interp, euclid])
    dq = np.asarray(distance(norm, q[None, :], cand))
    dqp = np.asarray(distance(norm, cand, qp[None, :]))
    defect = dq + dqp - D
    interior = np.minimum(dq, dqp) > 1e-6 * D
    if not interior.any():
        return None
    defect = np.where(interior, defect, np.inf)
    k = int(np.argmin(defect))
    return cand[k].copy() if defect[k] <= tol * max(1.0, D) else None


def linear_interpolation(mu: DiscreteMeasure, nu: DiscreteMeasure, t: float, T: float) -> DiscreteMeasure:
    if not T > 0:
        raise InvalidParameterError(f"T must be positive, got {T}")
    if not 0.0 <= t <= T:
        raise InvalidParameterError(f"t={t} outside [0, {T}]")
    if abs(mu.total - nu.total) > 1e-10:
        raise InvalidParameterError("interpolated measures must have equal totals")
    s = t / T
    if s == 0.0:
        return mu
    if s == 1.0:
        return nu
    return mix([(1.0 - s, mu), (s, nu)])


def lambda_ratio_membership(
    norm: NormSpec, mu: DiscreteMeasure, nu: DiscreteMeasure, xi: DiscreteMeasure, lam: float, tol: float = GEODESIC_TOL
) -> bool:
    """Whether ``xi`` splits ``d1(mu, nu)`` in the ratio ``lam : 1 - lam``."""
    if not 0.0 < lam < 1.0:
        raise InvalidParameterError(f"lambda must lie in (0, 1), got {lam}")
    D = w1(norm, mu, nu)
    if abs(w1(norm, mu, xi) - lam * D) > tol:
        return False
    return abs(w1(norm, xi, nu) - (1.0 - lam) * D) <= tol


@dataclass
class SweepResult:
    """Members of the ratio set inside the one-parameter family ``xi_alpha``.

    ``xi_alpha = eta + (c - alpha) delta_q + alpha delta_q'`` where ``alpha``
    is the mass already moved from ``q`` to ``q'``.
    """

    lam: float
    c: float
    alphas: np.ndarray
    members: np.ndarray
    candidate: float

    @property
    def unique_at_candidate(self) -> bool:
        return len(self.members) == 1 and abs(self.members[0] - self.candidate) <= GEODESIC_TOL


class _FamilyLP:
    """d1 between measures on one fixed finite support, cost matrix computed once."""

    def __init__(self, norm: NormSpec, points: np.ndarray):
        self.points = points
        self.cost = cost_matrix(norm, points, points)

    def d1(self, a: np.ndarray, b: np.ndarray) -> float:
        i = np.flatnonzero(a > 0)
        j = np.flatnonzero(b > 0)
        return network_simplex(self.cost[np.ix_(i, j)], a[i], b[j]).value


def _family_support(eta: DiscreteMeasure, q, qp):
    pts = [p for p in eta.points] if not eta.is_empty else []
    idx = []
    for x in (q, qp):
        hit = next((k for k, p in enumerate(pts) if np.linalg.norm(p - x) <= POINT_TOL), None)
        if hit is None:
            pts.append(np.asarray(x, dtype=float))
            hit = len(pts) - 1
        idx.append(hit)
    base = np.zeros(len(pts))
    base[: len(eta)] = eta.weights
    return np.asarray(pts), base, idx[0], idx[1]


def ratio_family_sweep(
    norm: NormSpec,
    eta: DiscreteMeasure,
    c: float,
    q,
    qp,
    lam: float,
    count: int = SWEEP_COUNT,
    tol: float = GEODESIC_TOL,
) -> SweepResult:
    """Scan ``count + 1`` evenly spaced ``alpha`` in ``[0, c]`` plus ``lam * c``."""
    if not 0.0 < lam < 1.0:
        raise InvalidParameterError(f"lambda must lie in (0, 1), got {lam}")
    if not c > 0:
        raise InvalidParameterError(f"c must be positive, got {c}")
    q, qp = _distinct(norm, q, qp)
    pts, base, iq, iqp = _family_support(eta, q, qp)
    lp = _FamilyLP(norm, pts)
    mu = base.copy()
    mu[iq] += c
    nu = base.copy()
    nu[iqp] += c
    D = lp.d1(mu, nu)
    candidate = lam * c
    grid = np.linspace(0.0, c, count + 1)
    # The candidate often sits on the grid up to rounding; keep a single copy.
    grid = grid[np.abs(grid - candidate) > POINT_TOL * max(1.0, c)]
    alphas = np.union1d(grid, [candidate])
    members = []
    for a in alphas:
        xi = base.copy()
        xi[iq] += c - a
        xi[iqp] += a
        if abs(lp.d1(mu, xi) - lam * D) > tol:
            continue
        if abs(lp.d1(xi, nu) - (1.0 - lam) * D) <= tol:
            members.append(a)
    return SweepResult(lam, c, alphas, np.asarray(members), candidate)


def family_member(eta: DiscreteMeasure, c: float, q, qp, alpha: float) -> DiscreteMeasure:
    return mix([(1.0, eta), (c - alpha, dirac(q)), (alpha, dirac(qp))])


def build_detour_geodesic(eta: DiscreteMeasure, c: float, q, qp, z, norm: NormSpec) -> GeodesicCurve:
    """Geodesic from ``eta + c delta_q`` to ``eta + c delta_qp`` through ``eta + c delta_z``."""
    if not c > 0:
        raise InvalidParameterError(f"c must be positive, got {c}")
    q, qp = _distinct(norm, q, qp)
    z = norm.group.check(z)
    dqz, dzq = float(distance(norm, q, z)), float(distance(norm, z, qp))
    if min(dqz, dzq) <= POINT_TOL:
        raise PreconditionError("the detour point must differ from both endpoints")
    defect = dqz + dzq - float(distance(norm, q, qp))
    if abs(defect) > GEODESIC_TOL:
        raise PreconditionError(f"the detour point is not on the metric segment (defect {fmt(defect)})")
    mu = translate_measure(eta, dirac(q, c))
    xi = translate_measure(eta, dirac(z, c))
    nu = translate_measure(eta, dirac(qp, c))
    T1 = w1(norm, mu, xi)
    T = w1(norm, mu, nu)
    return _curve([(0.0, mu), (T1, xi), (T, nu)])


def _selector_mask(points: np.ndarray, selector) -> np.ndarray:
    if callable(selector):
        return np.array([bool(selector(p)) for p in points])
    chosen = np.atleast_2d(np.asarray(selector, dtype=float))
    return np.array([bool(np.any(np.linalg.norm(chosen - p, axis=1) <= POINT_TOL)) for p in points])


def build_branching_geodesics(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    split_set_selector: Callable[[np.ndarray], bool] | Sequence,
    norm: NormSpec,
) -> tuple[GeodesicCurve, GeodesicCurve]:
    """Two geodesics from ``mu`` to ``nu`` that move the selected mass first or last.

    ``split_set_selector`` is a predicate on points or a list of points; it
    selects the part of the excess ``(mu - nu)_+`` that ``gamma_1`` transports
    first and ``gamma_2`` transports last.
    """
    eta, mu_p, nu_p = decompose(mu, nu)
    if len(mu_p) < 2:
        raise PreconditionError("the excess of mu over nu must have at least two atoms for branching")
    S = _selector_mask(mu_p.points, split_set_selector)
    if not S.any() or S.all():
        raise PreconditionError("the split set must contain some but not all excess atoms")
    _, plan = w1_distance(norm, mu_p, nu_p)
    dim = mu.dim

    def part(mask):
        m1 = mix([(1.0, DiscreteMeasure(mu_p.points[mask], mu_p.weights[mask]))]) if mask.any() else empty_measure(dim)
        col = plan.flow[mask].sum(axis=0)
        n1 = mix([(1.0, DiscreteMeasure(nu_p.points, np.where(col > 0, col, 0.0)))])
        return m1, n1

    mu1, nu1 = part(S)
    mu2, nu2 = part(~S)
    T1 = w1(norm, mu1, nu1)
    T = w1(norm, mu, nu)
    mid1 = mix([(1.0, eta), (1.0, nu1), (1.0, mu2)])
    mid2 = mix([(1.0, eta), (1.0, mu1), (1.0, nu2)])
    gamma1 = _curve([(0.0, mu), (T1, mid1), (T, nu)])
    gamma2 = _curve([(0.0, mu), (T - T1, mid2), (T, nu)])
    return gamma1, gamma2


def build_extension(eta: DiscreteMeasure, c: float, q, qp, norm: NormSpec) -> GeodesicCurve:
    """Extend the geodesic from ``eta + c delta_q`` to ``eta + c delta_qp`` on to ``delta_qp``."""
    if eta.is_empty:
        raise PreconditionError("eta is zero: the geodesic between two Dirac masses cannot be extended")
    if not 0.0 < c < 1.0:
        raise InvalidParameterError(f"c must lie in (0, 1), got {c}")
    if abs(eta.total + c - 1.0) > 1e-10:
        raise InvalidParameterError(f"total mass eta + c must be 1, got {eta.total + c}")
    if not tilde_related(norm, q, qp):
        raise PreconditionError("q and q' are not related: the segment between them is not trivial")
    q, qp = _distinct(norm, q, qp)
    mu = translate_measure(eta, dirac(q, c))
    nu = translate_measure(eta, dirac(qp, c))
    end = dirac(qp)
    T = w1(norm, mu, nu)
    T_ext = w1(norm, mu, end)
    return _curve([(0.0, mu), (T, nu), (T_ext, end)])


@dataclass
class UnitSpeedReport:
    rows: list[tuple[float, float, float, float]] = field(default_factory=list)
    tol: float = GEODESIC_TOL

    @property
    def max_deviation(self) -> float:
        return max((r[3] for r in self.rows), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol

    def to_csv(self) -> str:
        return to_csv(("t_i", "t_j", "d1", "deviation"), self.rows)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_deviation": self.max_deviation,
            "tol": self.tol,
            "rows": [dict(zip(("t_i", "t_j", "d1", "deviation"), r)) for r in self.rows],
        }

    def to_json(self) -> str:
        return to_json(self.to_dict())


def validate_unit_speed(
    norm: NormSpec, curve: GeodesicCurve, grid_count: int = 11, tol: float = GEODESIC_TOL
) -> UnitSpeedReport:
    if grid_count < 2:
        raise InvalidParameterError("grid_count must be at least 2")
    t0, t1 = curve.domain
    grid = np.linspace(t0, t1, grid_count)
    measures = [curve.evaluate(t) for t in grid]
    report = UnitSpeedReport(tol=tol)
    for i in range(grid_count):
        for j in range(i + 1, grid_count):
            d = w1(norm, measures[i], measures[j])
            report.rows.append((float(grid[i]), float(grid[j]), d, abs(d - abs(grid[j] - grid[i]))))
    return report
