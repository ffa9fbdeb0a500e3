"""Finitely supported measures on a group and their exact 1-Wasserstein distance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidParameterError, MassMismatchError, PreconditionError
from .norms import NormSpec, distance
from .reports import to_csv
from .transport import bruteforce_transport, network_simplex

POINT_TOL = 1e-12
MASS_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Nonnegative measure with finitely many atoms.

    Atoms are stored in lexicographic coordinate order with duplicates (within
    ``POINT_TOL``) merged. A measure with no atoms is allowed as the result of
    measure algebra but is rejected by :func:`make_measure`.
    """

    points: np.ndarray
    weights: np.ndarray

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    @property
    def is_empty(self) -> bool:
        return len(self.weights) == 0

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self):
        return zip(self.points, self.weights)

    def __add__(self, other: DiscreteMeasure) -> DiscreteMeasure:
        return translate_measure(self, other)

    def __mul__(self, c: float) -> DiscreteMeasure:
        return scale_measure(self, c)

    __rmul__ = __mul__

    def mass_at(self, point, tol: float = POINT_TOL) -> float:
        if self.is_empty:
            return 0.0
        d = np.linalg.norm(self.points - np.asarray(point, dtype=float), axis=1)
        return float(self.weights[d <= tol].sum())

    def allclose(self, other: DiscreteMeasure, tol: float = 1e-12) -> bool:
        return (
            len(self) == len(other)
            and np.allclose(self.points, other.points, rtol=0, atol=tol)
            and np.allclose(self.weights, other.weights, rtol=0, atol=tol)
        )

    def to_dict(self) -> dict:
        return {"points": self.points.tolist(), "weights": self.weights.tolist()}

    def __repr__(self) -> str:
        atoms = ", ".join(f"{w:.6g}@({', '.join(f'{c:.6g}' for c in p)})" for p, w in self)
        return f"DiscreteMeasure[{atoms}]"


def _canonical(points, weights, dim: int | None = None) -> DiscreteMeasure:
    points = np.asarray(points, dtype=float)
    weights = np.asarray(weights, dtype=float).ravel()
    if points.size == 0:
        d = dim if dim is not None else (points.shape[-1] if points.ndim == 2 else 0)
        return DiscreteMeasure(np.zeros((0, d)), np.zeros(0))
    points = points.reshape(len(weights), -1)
    keep = weights > 0
    points, weights = points[keep], weights[keep]
    order = np.lexsort(points.T[::-1])
    reps: list[np.ndarray] = []
    mass: list[float] = []
    for k in order:
        p = points[k]
        if reps:
            d = np.linalg.norm(np.asarray(reps) - p, axis=1)
            j = int(np.argmin(d))
            if d[j] <= POINT_TOL:
                mass[j] += weights[k]
                continue
        reps.append(p)
        mass.append(float(weights[k]))
    pts = np.asarray(reps).reshape(len(reps), points.shape[1])
    w = np.asarray(mass)
    order = np.lexsort(pts.T[::-1]) if len(w) else np.zeros(0, dtype=int)
    pts, w = pts[order], w[order]
    pts.setflags(write=False)
    w.setflags(write=False)
    return DiscreteMeasure(pts, w)


def make_measure(points, weights) -> DiscreteMeasure:
    weights = np.asarray(weights, dtype=float).ravel()
    points = np.asarray(points, dtype=float)
    if len(weights) == 0 or points.size == 0:
        raise InvalidParameterError("a measure needs at least one atom")
    if points.ndim == 1:
        points = points[None, :]
    if points.ndim != 2 or len(points) != len(weights):
        raise InvalidParameterError(f"{len(points)} points but {len(weights)} weights")
    if not np.all(np.isfinite(points)) or not np.all(np.isfinite(weights)):
        raise InvalidParameterError("points and weights must be finite")
    if np.any(weights <= 0):
        raise InvalidParameterError("weights must be strictly positive")
    return _canonical(points, weights)


def dirac(point, mass: float = 1.0) -> DiscreteMeasure:
    return make_measure([point], [mass])


def empty_measure(dim: int) -> DiscreteMeasure:
    return _canonical(np.zeros((0, dim)), np.zeros(0), dim)


def scale_measure(mu: DiscreteMeasure, c: float) -> DiscreteMeasure:
    if c < 0:
        raise InvalidParameterError("measures can only be scaled by nonnegative factors")
    return _canonical(mu.points, mu.weights * c, mu.dim)


def translate_measure(mu: DiscreteMeasure, xi: DiscreteMeasure) -> DiscreteMeasure:
    """The sum measure ``mu + xi``."""
    if mu.is_empty:
        return xi
    if xi.is_empty:
        return mu
    if mu.dim != xi.dim:
        raise InvalidParameterError(f"dimension mismatch: {mu.dim} vs {xi.dim}")
    return _canonical(np.vstack([mu.points, xi.points]), np.concatenate([mu.weights, xi.weights]))


def mix(parts: list[tuple[float, DiscreteMeasure]]) -> DiscreteMeasure:
    """``sum_k c_k mu_k`` for nonnegative coefficients."""
    dim = next((m.dim for _, m in parts), 0)
    parts = [(c, m) for c, m in parts if c > 0 and not m.is_empty]
    if not parts:
        return empty_measure(dim)
    return _canonical(
        np.vstack([m.points for _, m in parts]),
        np.concatenate([c * m.weights for c, m in parts]),
    )


@dataclass(frozen=True, eq=False)
class Coupling:
    row_points: np.ndarray
    col_points: np.ndarray
    flow: np.ndarray
    cost: np.ndarray
    value: float
    basis: tuple[tuple[int, int], ...] = ()
    u: np.ndarray | None = None
    v: np.ndarray | None = None

    def check_marginals(self, mu: DiscreteMeasure, nu: DiscreteMeasure, tol: float = MASS_TOL) -> bool:
        return (
            self.flow.shape == (len(mu), len(nu))
            and np.all(self.flow >= -tol)
            and np.allclose(self.flow.sum(axis=1), mu.weights, rtol=0, atol=tol)
            and np.allclose(self.flow.sum(axis=0), nu.weights, rtol=0, atol=tol)
        )

    def to_csv(self, all_cells: bool = False) -> str:
        m, n = self.flow.shape
        cells = [(i, j) for i in range(m) for j in range(n)] if all_cells else [
            (i, j) for i in range(m) for j in range(n) if self.flow[i, j] > 0
        ]
        return to_csv(("i", "j", "flow", "cost"), ((i, j, float(self.flow[i, j]), float(self.cost[i, j])) for i, j in cells))


@dataclass(frozen=True, eq=False)
class DualPotential:
    points: np.ndarray
    values: np.ndarray
    lipschitz_bound: float

    def __call__(self, point) -> float:
        d = np.linalg.norm(self.points - np.asarray(point, dtype=float), axis=1)
        k = int(np.argmin(d))
        if d[k] > POINT_TOL:
            raise KeyError("point is not in the potential's support")
        return float(self.values[k])


def cost_matrix(norm: NormSpec, P, Q) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    return np.asarray(distance(norm, P[:, None, :], Q[None, :, :]), dtype=float).reshape(len(P), len(Q))


def _check_pair(mu: DiscreteMeasure, nu: DiscreteMeasure) -> None:
    if mu.is_empty or nu.is_empty:
        raise InvalidParameterError("d1 needs nonempty measures")
    if abs(mu.total - nu.total) > MASS_TOL:
        raise MassMismatchError(f"total masses differ: {mu.total!r} vs {nu.total!r}")


def w1_distance(norm: NormSpec, mu: DiscreteMeasure, nu: DiscreteMeasure) -> tuple[float, Coupling]:
    _check_pair(mu, nu)
    C = cost_matrix(norm, mu.points, nu.points)
    sol = network_simplex(C, mu.weights, nu.weights)
    plan = Coupling(mu.points, nu.points, sol.flow, C, sol.value, tuple(sol.basis), sol.u, sol.v)
    return sol.value, plan


def w1(norm: NormSpec, mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    return w1_distance(norm, mu, nu)[0]


def w1_bruteforce(cost, mu_weights, nu_weights) -> float:
    return bruteforce_transport(cost, mu_weights, nu_weights)


def _potentials(plan: Coupling, mu: DiscreteMeasure, nu: DiscreteMeasure):
    if plan.u is not None and plan.v is not None:
        return np.asarray(plan.u), np.asarray(plan.v)
    sol = network_simplex(plan.cost, mu.weights, nu.weights)
    return sol.u, sol.v


def kr_dual(
    norm: NormSpec, mu: DiscreteMeasure, nu: DiscreteMeasure, plan: Coupling, tol: float = 1e-9
) -> tuple[DualPotential, float]:
    """Kantorovich-Rubinstein certificate for an optimal plan.

    LP potentials seed ``f(x_i) = -u_i`` on the atoms of ``mu``; the McShane
    extension ``f(z) = min_i (f(x_i) + d(z, x_i))`` is then 1-Lipschitz and
    attains the primal value on ``nu - mu``.
    """
    _check_pair(mu, nu)
    if not plan.check_marginals(mu, nu):
        raise PreconditionError("plan marginals do not match the measures")
    u, v = _potentials(plan, mu, nu)
    scale = max(1.0, float(np.max(np.abs(plan.cost))))
    reduced = plan.cost - u[:, None] - v[None, :]
    if reduced.min() < -tol * scale:
        i, j = np.unravel_index(int(np.argmin(reduced)), reduced.shape)
        raise PreconditionError(f"dual infeasible at cell ({i}, {j}): reduced cost {reduced[i, j]:.3e}")
    used = plan.flow > tol
    if np.any(np.abs(reduced[used]) > tol * scale):
        raise PreconditionError("complementary slackness violated: plan is not optimal")

    support = translate_measure(mu, nu).points
    dist_to_mu = cost_matrix(norm, support, mu.points)
    f = np.min(-u[None, :] + dist_to_mu, axis=1)
    pot = DualPotential(support, f, 0.0)
    f_mu = np.array([pot(p) for p in mu.points])
    f_nu = np.array([pot(p) for p in nu.points])
    dual_value = float(nu.weights @ f_nu - mu.weights @ f_mu)
    gap = plan.value - dual_value

    D = cost_matrix(norm, support, support)
    diff = np.abs(f[:, None] - f[None, :])
    off = ~np.eye(len(f), dtype=bool)
    lip = float(np.max(diff[off] / D[off])) if off.any() else 0.0
    if np.any(diff > D + tol):
        raise PreconditionError("extended potential is not 1-Lipschitz on the support")
    return DualPotential(support, f, lip), gap


class DiracPairForm(NamedTuple):
    eta: DiscreteMeasure
    c: float
    q: np.ndarray
    q_prime: np.ndarray


def decompose(mu: DiscreteMeasure, nu: DiscreteMeasure, mass_tol: float = 1e-12):
    """Split ``mu = eta + mu'`` and ``nu = eta + nu'`` with ``eta`` the common part."""
    if abs(mu.total - nu.total) > MASS_TOL:
        raise MassMismatchError(f"total masses differ: {mu.total!r} vs {nu.total!r}")
    dim = mu.dim
    nu_w = nu.weights.copy()
    eta_w = np.zeros(len(mu))
    for i, p in enumerate(mu.points):
        if len(nu):
            d = np.linalg.norm(nu.points - p, axis=1)
            j = int(np.argmin(d))
            if d[j] <= POINT_TOL:
                eta_w[i] = min(mu.weights[i], nu.weights[j])
                nu_w[j] -= eta_w[i]
    mu_w = mu.weights - eta_w
    mu_w[mu_w <= mass_tol] = 0.0
    nu_w[nu_w <= mass_tol] = 0.0
    eta = _canonical(mu.points, eta_w, dim)
    return eta, _canonical(mu.points, mu_w, dim), _canonical(nu.points, nu_w, dim)


def match_dirac_pair_form(mu: DiscreteMeasure, nu: DiscreteMeasure, mass_tol: float = 1e-12) -> DiracPairForm | None:
    eta, mu_p, nu_p = decompose(mu, nu, mass_tol)
    if len(mu_p) != 1 or len(nu_p) != 1:
        return None
    c = float(mu_p.weights[0])
    if abs(c - nu_p.weights[0]) > MASS_TOL:
        return None
    return DiracPairForm(eta, c, mu_p.points[0].copy(), nu_p.points[0].copy())


def random_measure(
    dim: int, gen: np.random.Generator, atoms: int, scale: float = 2.0, total: float = 1.0
) -> DiscreteMeasure:
    """``atoms`` uniform points in ``[-scale, scale]^dim`` with Dirichlet weights summing to ``total``."""
    points = gen.uniform(-scale, scale, (atoms, dim))
    weights = gen.dirichlet(np.ones(atoms)) * total
    return make_measure(points, np.maximum(weights, 1e-9))
