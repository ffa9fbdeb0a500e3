"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line.

Sizes, tolerances and runtime limits are the stated ones. Every criterion is
checked against an independent route where one exists.
"""

from __future__ import annotations

import math
import time

import numpy as np

from carnotw1.carnot_core import dilate, multiply, same_horizontal_line_through_origin
from carnotw1.errors import PreconditionError
from carnotw1.geodesics import (
    build_branching_geodesics,
    build_detour_geodesic,
    build_extension,
    linear_interpolation,
    ratio_family_sweep,
    sampled_segment_search,
    tilde_related,
    validate_unit_speed,
)
from carnotw1.norms import (
    check_norm_axioms,
    distance,
    estimate_C1_C2,
    hebisch_sikora,
    hs_r0,
    hsc_defect,
    hsc_scan,
    norm_eval,
    pmax,
    r0_from_constants,
    verify_hs_proof_inequalities,
)
from carnotw1.norms.diagnostics import sample_points
from carnotw1.rigidity import (
    HEISENBERG_SWAP,
    heisenberg_rotation,
    make_left_translation,
    make_linear_isometry,
    rigidity_demo,
)
from carnotw1.wasserstein import (
    dirac,
    empty_measure,
    kr_dual,
    make_measure,
    random_measure,
    translate_measure,
    w1,
    w1_bruteforce,
    w1_distance,
)
from oracles import heis1_c1_analytic


def _verdict(capsys, number: int, title: str, ok: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\nCRITERION {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    assert ok, detail


def _horizontal(rng, scale=1.0):
    v = np.zeros(3)
    v[:2] = rng.normal(size=2) * scale
    return v


def test_criterion_01_oracle_equivalence(capsys, kor):
    rng = np.random.default_rng(1001)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        m = int(rng.integers(1, 8))
        n = int(rng.integers(1, 9 - m))
        mu, nu = random_measure(3, rng, m), random_measure(3, rng, n)
        value, plan = w1_distance(kor, mu, nu)
        worst = max(worst, abs(value - w1_bruteforce(plan.cost, mu.weights, nu.weights)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed <= 10.0
    _verdict(capsys, 1, "W1 vs spanning-tree brute force", ok,
             f"500 instances, max |diff| {worst:.2e} (tol 1e-10), {elapsed:.2f}s (limit 10s)")


def test_criterion_02_kr_duality(capsys, kor):
    rng = np.random.default_rng(1002)
    start = time.perf_counter()
    worst_gap, worst_lip = 0.0, 0.0
    for k in range(200):
        m, n = (20, 20) if k < 20 else (int(rng.integers(1, 21)), int(rng.integers(1, 21)))
        mu, nu = random_measure(3, rng, m), random_measure(3, rng, n)
        _, plan = w1_distance(kor, mu, nu)
        pot, gap = kr_dual(kor, mu, nu, plan)
        worst_gap = max(worst_gap, abs(gap))
        worst_lip = max(worst_lip, pot.lipschitz_bound)
    elapsed = time.perf_counter() - start
    ok = worst_gap <= 1e-9 and worst_lip <= 1 + 1e-9 and elapsed <= 30.0
    _verdict(capsys, 2, "Kantorovich-Rubinstein duality", ok,
             f"200 instances up to 20x20, max gap {worst_gap:.2e} (tol 1e-9), "
             f"max Lipschitz {worst_lip:.12f}, {elapsed:.2f}s (limit 30s)")


def test_criterion_03_translation_invariance(capsys, kor):
    rng = np.random.default_rng(1003)
    worst = 0.0
    for _ in range(200):
        mu, nu, xi = (random_measure(3, rng, int(rng.integers(1, 7))) for _ in range(3))
        lhs = w1(kor, translate_measure(mu, xi), translate_measure(nu, xi))
        worst = max(worst, abs(lhs - w1(kor, mu, nu)))
    _verdict(capsys, 3, "translation invariance", worst <= 1e-9, f"200 triples, max |diff| {worst:.2e} (tol 1e-9)")


def test_criterion_04_dirac_embedding(capsys, heis1_norms):
    rng = np.random.default_rng(1004)
    worst = {}
    for name, N in heis1_norms.items():
        P, Q = rng.uniform(-3, 3, (2, 1000, 3))
        d = distance(N, P, Q)
        worst[name] = max(abs(w1(N, dirac(p), dirac(q)) - d[k]) for k, (p, q) in enumerate(zip(P, Q)))
    ok = max(worst.values()) <= 1e-12
    _verdict(capsys, 4, "Dirac embedding", ok,
             "1000 pairs per norm, " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (tol 1e-12)")


def test_criterion_05_norm_axioms(capsys, heis1_norms, step2):
    # Koranyi, Lee-Naor and PMax are defined by Heisenberg formulas only; on the
    # generic step-two group the gauge family is the one available.
    cases = {f"H1 {k}": N for k, N in heis1_norms.items()}
    cases["step2 hs"] = hebisch_sikora(step2, hs_r0(step2) / 2)
    counts = {}
    for name, N in cases.items():
        rep = check_norm_axioms(N, sample_count=10_000, seed=5, tol=1e-10)
        counts[name] = (rep.flags["violation_count"], rep.passed)
    ok = all(c == 0 and p for c, p in counts.values())
    _verdict(capsys, 5, "norm axioms and homogeneity", ok,
             "10^4 samples each, violations " + ", ".join(f"{k}={c}" for k, (c, _) in counts.items()) + " (tol 1e-10)")


def test_criterion_06_hs_triangle_inequality(capsys, heis1, step2):
    details, ok = [], True
    for label, group in (("H1", heis1), ("step2", step2)):
        r0 = hs_r0(group)
        for frac in (0.5, 0.95):
            N = hebisch_sikora(group, frac * r0)
            g = np.random.default_rng(1006)
            p = sample_points(group, g, 100_000, 0.01, 10.0)
            q = sample_points(group, g, 100_000, 0.01, 10.0)
            defect = norm_eval(N, p) + norm_eval(N, q) - norm_eval(N, multiply(group, p, q))
            rep = verify_hs_proof_inequalities(group, frac * r0, sample_count=10_000, seed=6, tol=1e-10)
            slack = min(c.worst for c in rep.checks if c.name != "equality_case")
            eq = abs(rep["equality_case"].worst)
            ok &= bool(defect.min() >= -1e-12) and slack >= -1e-10 and eq <= 1e-12 and rep.passed
            details.append(f"{label} r={frac}r0: min defect {defect.min():.2e}, min slack {slack:.2e}, equality {eq:.1e}")
    _verdict(capsys, 6, "gauge triangle inequality below r0", ok, "; ".join(details))


def test_criterion_07_hsc_classification(capsys, heis1, heis1_norms):
    parts, ok = [], True
    for name in ("koranyi", "lee-naor", "hs"):
        rep = hsc_scan(heis1_norms[name], sample_count=10_000, seed=7, tol=1e-12)
        good = rep.hsc_consistent and rep.min_defect_nonhorizontal > 0 and rep.max_defect_horizontal_collinear <= 1e-12
        ok &= good
        parts.append(f"{name} min non-horizontal {rep.min_defect_nonhorizontal:.2e} "
                     f"max collinear {rep.max_defect_horizontal_collinear:.1e}")
    N = pmax(heis1, 2.0, 1.0)
    exact = True
    for z in (0.25, 0.5, 1.0):
        q, qp = np.array([1.0, 0.0, z]), np.array([1.0, 0.0, -z])
        exact &= norm_eval(N, multiply(heis1, q, qp)) == 2.0 == norm_eval(N, q) + norm_eval(N, qp)
        exact &= hsc_defect(N, q, qp) == 0.0
        exact &= not same_horizontal_line_through_origin(heis1, q, qp)
    flagged = not hsc_scan(N, sample_count=10_000, seed=7).hsc_consistent
    ok &= exact and flagged
    parts.append(f"pmax counterexample exact {exact}, pmax flagged {flagged}")
    _verdict(capsys, 7, "horizontal strict convexity classification", ok, "; ".join(parts))


def test_criterion_08_c1_and_r0(capsys, heis1):
    c = estimate_C1_C2(heis1)
    r0 = r0_from_constants(c.c1, c.c2)
    ok = 1.96 <= c.c1_sampled <= 2.0 and c.c1_sampled <= heis1_c1_analytic() and 0.40 <= r0 <= 0.45
    _verdict(capsys, 8, "C1 and r0 on H1", ok,
             f"C1 estimate {c.c1_sampled:.12f} (analytic {heis1_c1_analytic()}), inflated {c.c1:.6f}, r0 {r0:.6f}")


def _pair_instance(rng, group):
    """eta + c delta_q and eta + c delta_q' with a non-horizontal difference q^-1 q'."""
    eta = random_measure(3, rng, int(rng.integers(1, 4)), total=float(rng.uniform(0.2, 0.8)))
    c = 1.0 - eta.total
    q = rng.uniform(-2, 2, 3)
    qp = multiply(group, q, np.array([*rng.normal(size=2), rng.uniform(0.5, 2.0) * rng.choice([-1, 1])]))
    return eta, c, q, qp


def test_criterion_09_geodesic_suite(capsys, heis1, kor):
    rng = np.random.default_rng(1009)
    sweep_ok, sweep_worst = True, 0.0
    for _ in range(50):
        eta, c, q, qp = _pair_instance(rng, heis1)
        for lam in (0.25, 0.5, 0.75):
            res = ratio_family_sweep(kor, eta, c, q, qp, lam, tol=1e-9)
            sweep_ok &= res.unique_at_candidate
            sweep_worst = max(sweep_worst, float(np.max(np.abs(res.members - lam * c))))

    detour_dev, detour_gap, branch_dev, branch_gap = 0.0, math.inf, 0.0, math.inf
    for _ in range(50):
        eta = random_measure(3, rng, 2, total=0.5)
        q = rng.uniform(-2, 2, 3)
        v = _horizontal(rng)
        qp, z = multiply(heis1, q, v), multiply(heis1, q, dilate(heis1, rng.uniform(0.2, 0.8), v))
        curve = build_detour_geodesic(eta, 0.5, q, qp, z, kor)
        detour_dev = max(detour_dev, validate_unit_speed(kor, curve, 11, 1e-9).max_deviation)
        T = curve.domain[1]
        mu, nu = curve(0.0), curve(T)
        gap = max(w1(kor, curve(t), linear_interpolation(mu, nu, t, T)) for t in np.linspace(0, T, 11))
        detour_gap = min(detour_gap, gap)

        a, b, cc, d = rng.uniform(-2, 2, (4, 3))
        mu = make_measure([a, b], [0.5, 0.5])
        nu = make_measure([cc, d], [0.5, 0.5])
        g1, g2 = build_branching_geodesics(mu, nu, [a], kor)
        branch_dev = max(branch_dev, *(validate_unit_speed(kor, g, 11, 1e-9).max_deviation for g in (g1, g2)))
        branch_gap = min(branch_gap, max(w1(kor, g1(t), g2(t)) for t in np.linspace(0, g1.domain[1], 11)))

    ext_ok, ext_dev = True, 0.0
    for _ in range(50):
        eta, c, q, qp = _pair_instance(rng, heis1)
        curve = build_extension(eta, c, q, qp, kor)
        ext_dev = max(ext_dev, validate_unit_speed(kor, curve, 11, 1e-9).max_deviation)
        try:
            build_extension(empty_measure(3), c, q, qp, kor)
            ext_ok = False
        except PreconditionError:
            pass
    ok = (sweep_ok and sweep_worst <= 1e-9 and detour_dev <= 1e-9 and detour_gap >= 1e-6
          and branch_dev <= 1e-9 and branch_gap >= 1e-6 and ext_ok and ext_dev <= 1e-9)
    _verdict(capsys, 9, "geodesic construction suite", ok,
             f"sweep unique {sweep_ok} (|alpha - lambda c| {sweep_worst:.1e}); detour max dev {detour_dev:.1e}, "
             f"min gap {detour_gap:.2e}; branching max dev {branch_dev:.1e}, min gap {branch_gap:.2e}; "
             f"extension iff eta nonzero {ext_ok}, max dev {ext_dev:.1e}")


def test_criterion_10_relation_characterization(capsys, heis1, kor):
    rng = np.random.default_rng(1010)
    agree, disagreements = 0, []
    for k in range(100):
        q = rng.uniform(-2, 2, 3)
        w = _horizontal(rng) if k % 2 else np.array([*rng.normal(size=2), rng.uniform(0.1, 2.0)])
        qp = multiply(heis1, q, w)
        related = tilde_related(kor, q, qp)
        found = sampled_segment_search(kor, q, qp, sample_count=10_000, seed=k)
        if related == (found is None) and related == (k % 2 == 0):
            agree += 1
        else:
            disagreements.append(k)
    _verdict(capsys, 10, "relation shortcut vs segment search", agree == 100,
             f"{agree}/100 agree (50 related, 50 horizontal), disagreements {disagreements}")


def test_criterion_11_rigidity_demo(capsys, heis1, kor):
    isos = {
        "identity": make_left_translation(heis1, [0, 0, 0]),
        "left translation": make_left_translation(heis1, [0.5, -1.0, 1.0]),
        "rotation": make_linear_isometry(kor, heisenberg_rotation(0.7)),
        "reflection": make_linear_isometry(kor, HEISENBERG_SWAP),
    }
    start = time.perf_counter()
    parts, ok = [], True
    for name, iso in isos.items():
        rep = rigidity_demo(kor, iso, measure_count=100, seed=11, epsilons=(0.1, 0.01), tol=1e-9)
        ok &= rep.passed
        d1 = rep["d1_preservation"].worst
        rec = rep["ratio_reconstruction"].worst
        eps = rep["f_sim_density_eps_0.01"].worst
        parts.append(f"{name} {'pass' if rep.passed else 'FAIL'} "
                     f"(d1 {d1:.1e}, reconstruction {rec:.1e}, d1(xi, xi') at eps 0.01 {eps:.1e})")
    elapsed = time.perf_counter() - start
    ok &= elapsed <= 60.0
    _verdict(capsys, 11, "rigidity demonstration", ok, "; ".join(parts) + f"; {elapsed:.1f}s (limit 60s)")
