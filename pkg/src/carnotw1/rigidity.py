"""Push-forwards of group isometries and a numerical walk through the rigidity argument.

An isometry here is ``psi(q) = g0 . (A q)`` with ``A`` a layer-preserving
linear map that is both a group automorphism and norm preserving (checked on
samples). Its push-forward ``psi_#`` moves atoms and keeps weights, and is a
1-Wasserstein isometry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .carnot_core import GroupSpec, multiply
from .errors import InvalidParameterError, PreconditionError
from .geodesics import family_member, ratio_family_sweep, tilde_related
from .norms import NormSpec, distance, norm_eval
from .norms.diagnostics import sample_points
from .reports import Check, CheckReport, fmt, fmt_pair, fmt_point
from .wasserstein import DiscreteMeasure, dirac, make_measure, match_dirac_pair_form, random_measure, w1

ISOMETRY_TOL = 1e-10
PERTURB_ROUNDS = 20


@dataclass(frozen=True, eq=False)
class IsometrySpec:
    group: GroupSpec
    translation: np.ndarray
    linear: np.ndarray
    validated: bool = False

    def apply(self, p) -> np.ndarray:
        p = self.group.check(p)
        return multiply(self.group, self.translation, p @ self.linear.T)

    __call__ = apply

    def compose(self, inner: IsometrySpec) -> IsometrySpec:
        """``self o inner``; uses that the linear part is an automorphism."""
        if inner.group != self.group:
            raise InvalidParameterError("cannot compose isometries of different groups")
        g0 = multiply(self.group, self.translation, self.linear @ inner.translation)
        return IsometrySpec(self.group, g0, self.linear @ inner.linear, self.validated and inner.validated)

    def to_dict(self) -> dict:
        return {"translate": self.translation.tolist(), "linear": self.linear.tolist()}


def make_left_translation(group: GroupSpec, g0) -> IsometrySpec:
    g0 = np.array(group.check(g0), dtype=float)
    if g0.ndim != 1:
        raise InvalidParameterError("the translation must be a single point")
    return IsometrySpec(group, g0, np.eye(group.total_dim), True)


def _layer_preserving(group: GroupSpec, A: np.ndarray) -> bool:
    n1 = group.n1
    return not (np.any(A[:n1, n1:]) or np.any(A[n1:, :n1]))


def make_linear_isometry(
    norm: NormSpec, matrix, sample_count: int = 2000, seed: int = 0, tol: float = ISOMETRY_TOL
) -> IsometrySpec:
    group = norm.group
    A = np.array(matrix, dtype=float)
    dim = group.total_dim
    if A.shape != (dim, dim):
        raise InvalidParameterError(f"linear part has shape {A.shape}, expected {(dim, dim)}")
    if not _layer_preserving(group, A):
        raise PreconditionError("linear part must be block-diagonal by layer")
    gen = rng.stream(seed, "linear_isometry")
    p = sample_points(group, gen, sample_count)
    q = sample_points(group, gen, sample_count)
    hom = np.linalg.norm(multiply(group, p, q) @ A.T - multiply(group, p @ A.T, q @ A.T), axis=1)
    hom = hom / np.maximum(1.0, np.linalg.norm(multiply(group, p, q), axis=1))
    k = int(np.argmax(hom))
    if hom[k] > tol:
        raise PreconditionError(f"not a group homomorphism: relative error {fmt(float(hom[k]))} at {fmt_pair(p[k], q[k])}")
    Np = np.asarray(norm_eval(norm, p))
    dev = np.abs(np.asarray(norm_eval(norm, p @ A.T)) - Np) / np.maximum(1.0, Np)
    k = int(np.argmax(dev))
    if dev[k] > tol:
        raise PreconditionError(f"not norm preserving: relative error {fmt(float(dev[k]))} at {fmt_point(p[k])}")
    return IsometrySpec(group, group.identity(), A, True)


def heisenberg_rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


HEISENBERG_SWAP = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]])


def _require_validated(iso: IsometrySpec) -> None:
    if not iso.validated:
        raise PreconditionError("isometry has not been validated")


def push_forward(iso: IsometrySpec, mu: DiscreteMeasure) -> DiscreteMeasure:
    _require_validated(iso)
    return make_measure(iso.apply(mu.points), mu.weights)


def _measure_pairs(group: GroupSpec, seed: int, count: int, max_atoms: int, stream_name: str):
    gen = rng.stream(seed, stream_name)
    for _ in range(count):
        a, b = gen.integers(1, max_atoms + 1, 2)
        yield random_measure(group.total_dim, gen, a), random_measure(group.total_dim, gen, b)


def verify_pushforward_isometry(
    iso: IsometrySpec, norm: NormSpec, pair_count: int = 100, seed: int = 0, tol: float = 1e-9, max_atoms: int = 10
) -> CheckReport:
    _require_validated(iso)
    worst, witness = 0.0, ""
    for k, (mu, nu) in enumerate(_measure_pairs(norm.group, seed, pair_count, max_atoms, "pushforward_pairs")):
        dev = abs(w1(norm, push_forward(iso, mu), push_forward(iso, nu)) - w1(norm, mu, nu))
        if dev > worst:
            worst, witness = dev, f"pair {k}"
    report = CheckReport("push-forward isometry", style="deviation", flags={"pairs": pair_count})
    report.checks.append(Check("d1_preservation", worst, worst <= tol, witness))
    return report


def _vertical_direction(group: GroupSpec, gen: np.random.Generator) -> np.ndarray:
    v = np.zeros(group.total_dim)
    if group.n2 == 1:
        v[-1] = 1.0
    else:
        d = gen.standard_normal(group.n2)
        v[group.n1 :] = d / np.linalg.norm(d)
    return v


def pairwise_related(norm: NormSpec, points: np.ndarray) -> bool:
    return all(
        tilde_related(norm, points[i], points[j]) for i in range(len(points)) for j in range(i + 1, len(points))
    )


def perturb_to_tilde_position(norm: NormSpec, points, epsilon: float, seed: int = 0) -> np.ndarray:
    """Move each point by less than ``epsilon`` so that all pairs become related.

    The ``k``-th of ``K`` points is lifted by the central element
    ``delta_k e_v`` with ``delta_k = epsilon^2 k / (4 K N(e_v)^2)``, so it moves
    by ``sqrt(delta_k) N(e_v) <= epsilon / 2``. Distinct lifts make pairwise
    differences non-horizontal generically; on failure the lifts are halved.
    """
    if not norm.is_hsc:
        raise PreconditionError(f"norm {norm.describe()} is not known to be horizontally strictly convex")
    if not epsilon > 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    group = norm.group
    pts = np.array(group.check(points), dtype=float).reshape(-1, group.total_dim)
    K = len(pts)
    if K <= 1:
        return pts
    if K != len(make_measure(pts, np.ones(K))):
        raise InvalidParameterError("points must be pairwise distinct")
    e_v = _vertical_direction(group, rng.stream(seed, "perturb_direction"))
    base = epsilon**2 / (4.0 * float(norm_eval(norm, e_v)) ** 2)
    k = np.arange(1, K + 1)
    for _ in range(PERTURB_ROUNDS):
        lifted = multiply(group, pts, (base * k / K)[:, None] * e_v)
        moved = np.asarray(distance(norm, pts, lifted))
        if np.all(moved < epsilon) and pairwise_related(norm, lifted):
            return lifted
        base *= 0.5
    raise PreconditionError(f"no related perturbation found after {PERTURB_ROUNDS} rounds")


def _ratio_reconstruction(norm: NormSpec, iso: IsometrySpec, xi: DiscreteMeasure) -> float:
    """Recover ``Phi(xi)`` from two measures with one atom fewer.

    With atoms ``q_1..q_{k+1}`` and weights ``l_1..l_{k+1}``, merge the last
    two atoms onto ``q_k`` (giving ``xi_1``) or onto ``q_{k+1}`` (``xi_2``).
    ``xi`` is the unique member of the ratio set of ``(xi_1, xi_2)`` with
    ``lam = l_{k+1} / (l_k + l_{k+1})``; the same sweep run on the pushed
    measures must land on ``Phi(xi)``. Returns the d1 error of the recovery.
    """
    w = xi.weights
    # Push every atom in one batch so the images are bit-identical to those in
    # push_forward(iso, xi); a 1-ulp vertical difference would otherwise show
    # up as ~1e-8 in d1 through the square root in the gauge.
    pts = iso.apply(xi.points)
    eta = make_measure(pts[:-2], w[:-2]) if len(w) > 2 else DiscreteMeasure(np.zeros((0, xi.dim)), np.zeros(0))
    c = float(w[-2] + w[-1])
    lam = float(w[-1]) / c
    q, qp = pts[-2], pts[-1]
    sweep = ratio_family_sweep(norm, eta, c, q, qp, lam)
    if len(sweep.members) != 1:
        return float("inf")
    recovered = family_member(eta, c, q, qp, float(sweep.members[0]))
    return w1(norm, recovered, push_forward(iso, xi))


def rigidity_demo(
    norm: NormSpec,
    iso: IsometrySpec,
    measure_count: int = 100,
    seed: int = 0,
    epsilons: tuple[float, ...] = (0.1, 0.01),
    tol: float = 1e-9,
    reconstruction_count: int = 10,
    max_atoms: int = 6,
) -> CheckReport:
    _require_validated(iso)
    if not norm.is_hsc:
        raise PreconditionError(f"norm {norm.describe()} is not known to be horizontally strictly convex")
    group = norm.group
    report = CheckReport("rigidity demo", style="deviation", flags={"measures": measure_count, "seed": seed})

    pres = verify_pushforward_isometry(iso, norm, measure_count, seed, tol, max_atoms)["d1_preservation"]
    report.checks.append(pres)

    gen = rng.stream(seed, "demo_points")
    pts = sample_points(group, gen, measure_count)
    atom_excess, map_err = 0.0, 0.0
    for q in pts:
        image = push_forward(iso, dirac(q))
        atom_excess = max(atom_excess, float(len(image) - 1))
        map_err = max(map_err, float(np.linalg.norm(image.points[0] - iso.apply(q))))
    report.checks.append(Check("dirac_to_dirac", atom_excess, atom_excess == 0.0))
    report.checks.append(Check("induced_point_map", map_err, map_err <= 1e-12))

    eta_mass = 0.0
    others = sample_points(group, gen, measure_count)
    for q, qp in zip(pts, others):
        if not tilde_related(norm, q, qp):
            continue
        form = match_dirac_pair_form(push_forward(iso, dirac(q)), push_forward(iso, dirac(qp)))
        eta_mass = max(eta_mass, float("inf") if form is None else form.eta.total)
    report.checks.append(Check("dirac_pair_form", eta_mass, eta_mass == 0.0))

    for eps in epsilons:
        worst, related = 0.0, True
        g_eps = rng.stream(seed, "demo_density", repr(eps))
        for _ in range(measure_count):
            xi = random_measure(group.total_dim, g_eps, int(g_eps.integers(1, max_atoms + 1)))
            moved = perturb_to_tilde_position(norm, xi.points, eps, seed)
            related = related and (len(moved) < 2 or pairwise_related(norm, moved))
            worst = max(worst, w1(norm, xi, make_measure(moved, xi.weights)))
        report.checks.append(Check(f"f_sim_density_eps_{eps:g}", worst, related and worst < eps))

    worst = 0.0
    g_rec = rng.stream(seed, "demo_reconstruction")
    for _ in range(reconstruction_count):
        xi = random_measure(group.total_dim, g_rec, int(g_rec.integers(2, max_atoms + 1)))
        moved = make_measure(perturb_to_tilde_position(norm, xi.points, epsilons[0], seed), xi.weights)
        worst = max(worst, _ratio_reconstruction(norm, iso, moved))
    report.checks.append(Check("ratio_reconstruction", worst, worst <= tol))
    return report
