"""Sampled diagnostics: norm axioms, homogeneity and horizontal strict convexity."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import rng
from ..carnot_core import GroupSpec, dilate, inverse, multiply
from ..reports import Check, CheckReport, fmt, fmt_pair, to_csv, to_json
from .homogeneous import NormSpec, norm_eval

DEFAULT_EQ_TOL = 1e-9
DEFAULT_MARGIN = 0.02
MAX_LISTED = 20


def sample_points(group: GroupSpec, g: np.random.Generator, count: int, lo=0.1, hi=10.0) -> np.ndarray:
    """Points ``delta_lam(u)`` with ``u`` uniform in the unit cube and ``lam`` log-uniform."""
    u = g.uniform(-1.0, 1.0, (count, group.total_dim))
    lam = np.exp(g.uniform(np.log(lo), np.log(hi), count))
    return dilate(group, lam, u)


def _violations(name, mask, values, p, q=None):
    out = []
    for k in np.flatnonzero(mask):
        witness = fmt_pair(p[k], q[k]) if q is not None else fmt_pair(p[k], p[k])
        out.append((name, float(values[k]), witness))
    return out


def check_norm_axioms(norm: NormSpec, sample_count: int = 10_000, seed: int = 0, tol: float = 1e-10) -> CheckReport:
    group = norm.group
    g = rng.stream(seed, "check_norm_axioms")
    p = sample_points(group, g, sample_count)
    q = sample_points(group, g, sample_count)
    lam = np.exp(g.uniform(np.log(1e-2), np.log(1e2), sample_count))
    tiny = sample_points(group, g, sample_count, 1e-6, 1e-3)

    Np, Nq = norm_eval(norm, p), norm_eval(norm, q)
    report = CheckReport(f"norm axioms for {norm.describe()}", flags={"samples": sample_count, "tol": tol})
    violations = []

    n_e = norm_eval(norm, group.identity())
    n_min = np.minimum(Np, norm_eval(norm, tiny))
    k = int(np.argmin(n_min))
    ok = n_e == 0.0 and bool(n_min[k] > 0)
    report.checks.append(Check("definiteness", float(n_min[k]), ok, fmt_pair(tiny[k], group.identity())))
    if n_e != 0.0:
        violations.append(("definiteness", float(n_e), "identity"))
    violations += _violations("definiteness", n_min <= 0, n_min, tiny)

    dev = np.abs(norm_eval(norm, inverse(group, p)) - Np) / np.maximum(1.0, Np)
    k = int(np.argmax(dev))
    report.checks.append(Check("symmetry", -float(dev[k]), bool(dev[k] <= tol), fmt_pair(p[k], inverse(group, p[k]))))
    violations += _violations("symmetry", dev > tol, -dev, p)

    defect = Np + Nq - norm_eval(norm, multiply(group, p, q))
    k = int(np.argmin(defect))
    report.checks.append(Check("triangle", float(defect[k]), bool(defect[k] >= -tol), fmt_pair(p[k], q[k])))
    violations += _violations("triangle", defect < -tol, defect, p, q)

    hom = np.abs(norm_eval(norm, dilate(group, lam, p)) - lam * Np) / np.maximum(1.0, lam * Np)
    k = int(np.argmax(hom))
    report.checks.append(
        Check("homogeneity", -float(hom[k]), bool(hom[k] <= tol), fmt_pair(p[k], p[k]) + f";lambda={fmt(float(lam[k]))}")
    )
    violations += _violations("homogeneity", hom > tol, -hom, p)

    unit = np.abs(norm_eval(norm, dilate(group, 1.0, p)) - Np)
    k = int(np.argmax(unit))
    report.checks.append(Check("homogeneity_unit", -float(unit[k]), bool(unit[k] == 0.0), fmt_pair(p[k], p[k])))

    violations.sort(key=lambda v: (v[0], v[1], v[2]))
    report.flags["violation_count"] = len(violations)
    report.flags["violations"] = violations[:MAX_LISTED]
    if norm.kind == "hs":
        report.flags["r"] = norm.r
        report.flags["r0"] = norm.r0
        report.flags["beyond_r0"] = norm.beyond_r0
    return report


@dataclass
class HscReport:
    norm: str
    sample_count: int
    min_defect_nonhorizontal: float
    max_defect_horizontal_collinear: float
    min_defect: float
    nonhorizontal_witness: str = ""
    collinear_witness: str = ""
    triangle_witness: str = ""
    violations: list[tuple[str, float]] = field(default_factory=list)
    counterexamples: list[tuple[str, float]] = field(default_factory=list)
    eq_tol: float = DEFAULT_EQ_TOL
    tol: float = 1e-12

    @property
    def hsc_consistent(self) -> bool:
        return (
            not self.violations
            and not self.counterexamples
            and self.min_defect_nonhorizontal > 0
            and self.max_defect_horizontal_collinear <= self.tol
        )

    def to_csv(self) -> str:
        cx = self.counterexamples[0] if self.counterexamples else ("", np.inf)
        rows = [
            ("triangle", self.min_defect, self.triangle_witness),
            ("collinear_defect", -self.max_defect_horizontal_collinear, self.collinear_witness),
            ("nonhorizontal_defect", self.min_defect_nonhorizontal, self.nonhorizontal_witness),
            ("hsc_counterexample", float(cx[1]), cx[0]),
        ]
        return to_csv(("check", "worst_slack", "argmax_pair"), rows)

    def to_dict(self) -> dict:
        return {
            "norm": self.norm,
            "sample_count": self.sample_count,
            "hsc_consistent": self.hsc_consistent,
            "min_defect_nonhorizontal": self.min_defect_nonhorizontal,
            "max_defect_horizontal_collinear": self.max_defect_horizontal_collinear,
            "min_defect": self.min_defect,
            "violations": self.violations,
            "counterexamples": self.counterexamples,
        }

    def to_json(self) -> str:
        return to_json(self.to_dict())


def _scan_pairs(group: GroupSpec, g: np.random.Generator, count: int):
    """Generic pairs, positively aligned horizontal pairs, and aligned pairs with opposite vertical parts."""
    k1 = count - 2 * (count // 3)
    k2 = count // 3
    k3 = count // 3
    n1 = group.n1
    p1, q1 = sample_points(group, g, k1), sample_points(group, g, k1)

    def horiz_dirs(k):
        x = g.standard_normal((k, n1))
        return x / np.linalg.norm(x, axis=1, keepdims=True) * g.uniform(0.2, 3.0, (k, 1))

    x = horiz_dirs(k2)
    s1, s2 = g.uniform(0.1, 3.0, (k2, 1)), g.uniform(0.1, 3.0, (k2, 1))
    p2 = np.zeros((k2, group.total_dim))
    q2 = np.zeros((k2, group.total_dim))
    p2[:, :n1], q2[:, :n1] = s1 * x, s2 * x

    x = horiz_dirs(k3)
    s = g.uniform(0.2, 3.0, (k3, 1))
    v = g.standard_normal((k3, group.n2))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    size = (np.minimum(1.0, s) * np.linalg.norm(x, axis=1, keepdims=True)) ** 2
    v *= g.uniform(0.01, 1.0, (k3, 1)) * size
    p3 = np.concatenate([x, v], axis=1)
    q3 = np.concatenate([s * x, -v], axis=1)
    return np.concatenate([p1, p2, p3]), np.concatenate([q1, q2, q3])


def hsc_scan(
    norm: NormSpec,
    sample_count: int = 10_000,
    seed: int = 0,
    tol: float = 1e-12,
    eq_tol: float = DEFAULT_EQ_TOL,
    margin: float = DEFAULT_MARGIN,
) -> HscReport:
    """Look for pairs saturating the triangle inequality off a common horizontal line.

    A pair counts as non-horizontal when the homogeneous size of the vertical
    part of ``p^-1 . q`` is at least ``margin`` times the pair's scale; a zero
    defect (within ``eq_tol``) on such a pair is a counterexample to horizontal
    strict convexity. Positively aligned horizontal pairs should have zero defect.
    """
    group = norm.group
    n1 = group.n1
    g = rng.stream(seed, "hsc_scan")
    p, q = _scan_pairs(group, g, sample_count)
    Np, Nq = norm_eval(norm, p), norm_eval(norm, q)
    defect = Np + Nq - norm_eval(norm, multiply(group, p, q))

    xp, xq = p[:, :n1], q[:, :n1]
    yp, yq = p[:, n1:], q[:, n1:]
    nxp, nxq = np.linalg.norm(xp, axis=1), np.linalg.norm(xq, axis=1)
    scale = nxp + nxq + np.sqrt(np.linalg.norm(yp, axis=1)) + np.sqrt(np.linalg.norm(yq, axis=1))
    rel = multiply(group, inverse(group, p), q)
    vgauge = np.sqrt(np.linalg.norm(rel[:, n1:], axis=1))
    nonhoriz = vgauge >= margin * scale

    htol = 1e-12 * np.maximum(1.0, scale)
    horizontal = (np.max(np.abs(yp), axis=1) <= htol) & (np.max(np.abs(yq), axis=1) <= htol)
    aligned = np.max(np.abs(nxp[:, None] * xq - nxq[:, None] * xp), axis=1) <= htol * np.maximum(1.0, scale)
    collinear = horizontal & aligned & (nxp > 0) & (nxq > 0)

    def pick(mask, best):
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            return np.nan, ""
        k = idx[best(defect[idx])]
        return float(defect[k]), fmt_pair(p[k], q[k])

    min_nh, w_nh = pick(nonhoriz, np.argmin)
    max_col, w_col = pick(collinear, np.argmax)
    min_all, w_all = pick(np.ones_like(defect, dtype=bool), np.argmin)

    viol = [(fmt_pair(p[k], q[k]), float(defect[k])) for k in np.flatnonzero(defect < -tol)]
    cex = [(fmt_pair(p[k], q[k]), float(defect[k])) for k in np.flatnonzero(nonhoriz & (np.abs(defect) <= eq_tol))]
    viol.sort(key=lambda v: (v[1], v[0]))
    cex.sort(key=lambda v: (abs(v[1]), v[0]))
    return HscReport(
        norm=norm.describe(),
        sample_count=len(defect),
        min_defect_nonhorizontal=min_nh,
        max_defect_horizontal_collinear=max_col,
        min_defect=min_all,
        nonhorizontal_witness=w_nh,
        collinear_witness=w_col,
        triangle_witness=w_all,
        violations=viol[:MAX_LISTED],
        counterexamples=cex[:MAX_LISTED],
        eq_tol=eq_tol,
        tol=tol,
    )
