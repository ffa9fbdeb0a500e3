"""Batch command-line front end.

Exit codes: 0 success, 1 I/O or parse error, 2 validation or precondition
failure, 3 a check suite found violations. Output is deterministic given the
inputs and ``--seed``.
"""

from __future__ import annotations

import argparse
import sys
from importlib.metadata import PackageNotFoundError, version
from typing import Callable

import numpy as np

from . import formats
from .carnot_core import GroupSpec, make_heisenberg
from .errors import CarnotError
from .formats import FormatError, read_json
from .geodesics import build_branching_geodesics, validate_unit_speed
from .norms import (
    NormSpec,
    check_norm_axioms,
    distance,
    estimate_C1_C2,
    hsc_scan,
    norm_eval,
    r0_from_constants,
    verify_hs_proof_inequalities,
)
from .reports import fmt, to_csv, to_json
from .rigidity import perturb_to_tilde_position, rigidity_demo
from .wasserstein import w1_distance

EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_CHECK = 0, 1, 2, 3


class Outcome:
    """Rendered output of a subcommand plus whether its checks passed."""

    def __init__(self, csv_text: str, json_obj: dict, passed: bool = True):
        self.csv_text = csv_text
        self.json_obj = json_obj
        self.passed = passed


def _version_string() -> str:
    try:
        pkg = version("artifact")
    except PackageNotFoundError:
        pkg = "unknown"
    fmts = ", ".join(f"{k}={v}" for k, v in formats.FORMAT_VERSIONS.items())
    return f"carnotw1 {pkg} (formats: {fmts})"


def _group(args) -> GroupSpec:
    if args.group is None:
        return make_heisenberg(1)
    return formats.group_from_json(read_json(args.group))


def _norm(args) -> NormSpec:
    return formats.norm_from_json(read_json(args.norm), _group(args))


def _point(text: str, group: GroupSpec) -> np.ndarray:
    try:
        coords = [float(c) for c in text.split(",")]
    except ValueError as exc:
        raise FormatError(f"cannot parse point {text!r}; expected comma-separated numbers") from exc
    return group.check(coords)


def _scalar(name: str, value: float, extra: dict | None = None) -> Outcome:
    return Outcome(fmt(value) + "\n", {name: value, **(extra or {})})


def cmd_norm(args) -> Outcome:
    norm = _norm(args)
    return _scalar("norm", float(norm_eval(norm, _point(args.point, norm.group))))


def cmd_dist(args) -> Outcome:
    norm = _norm(args)
    return _scalar("distance", float(distance(norm, _point(args.p, norm.group), _point(args.q, norm.group))))


def cmd_w1(args) -> Outcome:
    norm = _norm(args)
    mu = formats.measure_from_json(read_json(args.mu))
    nu = formats.measure_from_json(read_json(args.nu))
    value, plan = w1_distance(norm, mu, nu)
    text = fmt(value) + "\n" + (plan.to_csv() if args.plan else "")
    cells = [
        {"i": i, "j": j, "flow": float(plan.flow[i, j]), "cost": float(plan.cost[i, j])}
        for i, j in zip(*np.nonzero(plan.flow > 0))
    ]
    return Outcome(text, {"w1": value, "plan": cells})


def cmd_geodesic_validate(args) -> Outcome:
    norm = _norm(args)
    curve = formats.curve_from_json(read_json(args.curve))
    report = validate_unit_speed(norm, curve, args.grid, args.tol if args.tol is not None else 1e-9)
    return Outcome(report.to_csv(), report.to_dict(), report.passed)


def cmd_geodesic_branch(args) -> Outcome:
    norm = _norm(args)
    mu = formats.measure_from_json(read_json(args.mu))
    nu = formats.measure_from_json(read_json(args.nu))
    selected = formats.points_from_json(read_json(args.select), norm.group)
    curves = build_branching_geodesics(mu, nu, selected, norm)
    tol = args.tol if args.tol is not None else 1e-9
    reports = [validate_unit_speed(norm, c, args.grid, tol) for c in curves]
    rows = [
        (f"gamma_{k + 1}", "pass" if r.passed else "FAIL", r.max_deviation, ";".join(fmt(t) for t in c.times))
        for k, (c, r) in enumerate(zip(curves, reports))
    ]
    obj = {
        "curves": [c.to_dict() for c in curves],
        "max_deviation": [r.max_deviation for r in reports],
        "passed": all(r.passed for r in reports),
    }
    return Outcome(to_csv(("curve", "status", "max_deviation", "knot_times"), rows), obj, obj["passed"])


def cmd_check_norm(args) -> Outcome:
    norm = _norm(args)
    report = check_norm_axioms(norm, args.samples, args.seed, args.tol if args.tol is not None else 1e-10)
    return Outcome(report.to_csv(), report.to_dict(), report.passed)


def cmd_check_hsc(args) -> Outcome:
    norm = _norm(args)
    report = hsc_scan(norm, args.samples, args.seed, args.tol if args.tol is not None else 1e-12)
    return Outcome(report.to_csv(), report.to_dict(), report.hsc_consistent)


def cmd_check_hs_proof(args) -> Outcome:
    group = _group(args)
    report = verify_hs_proof_inequalities(
        group, args.r, args.samples, args.seed, args.tol if args.tol is not None else 1e-10
    )
    return Outcome(report.to_csv(), report.to_dict(), report.passed)


def cmd_r0(args) -> Outcome:
    group = _group(args)
    c = estimate_C1_C2(group, seed=args.seed)
    r0 = r0_from_constants(c.c1, c.c2)
    csv_text = to_csv(("c1", "c2", "c1_sampled", "r0"), [(c.c1, c.c2, c.c1_sampled, r0)])
    return Outcome(csv_text, {"c1": c.c1, "c2": c.c2, "c1_sampled": c.c1_sampled, "r0": r0})


def cmd_rigidity_demo(args) -> Outcome:
    norm = _norm(args)
    iso = formats.isometry_from_json(read_json(args.iso), norm)
    report = rigidity_demo(norm, iso, args.samples, args.seed, tol=args.tol if args.tol is not None else 1e-9)
    return Outcome(report.to_csv(), report.to_dict(), report.passed)


def cmd_perturb(args) -> Outcome:
    norm = _norm(args)
    pts = formats.points_from_json(read_json(args.points), norm.group)
    moved = perturb_to_tilde_position(norm, pts, args.epsilon, args.seed)
    header = tuple(f"c{k}" for k in range(norm.group.total_dim))
    return Outcome(to_csv(header, [tuple(float(x) for x in p) for p in moved]), {"points": moved.tolist()})


COMMANDS: dict[str, tuple[Callable[[argparse.Namespace], Outcome], str]] = {
    "norm": (cmd_norm, "evaluate a homogeneous norm at a point"),
    "dist": (cmd_dist, "distance between two points"),
    "w1": (cmd_w1, "1-Wasserstein distance between two measures"),
    "geodesic-validate": (cmd_geodesic_validate, "check that a curve is a unit-speed geodesic"),
    "geodesic-branch": (cmd_geodesic_branch, "build and validate two branching geodesics"),
    "check-norm": (cmd_check_norm, "sample the norm axioms"),
    "check-hsc": (cmd_check_hsc, "scan for horizontal strict convexity counterexamples"),
    "check-hs-proof": (cmd_check_hs_proof, "sample the Hebisch-Sikora triangle-inequality argument"),
    "r0": (cmd_r0, "estimate the Hebisch-Sikora constants and radius threshold"),
    "rigidity-demo": (cmd_rigidity_demo, "run the rigidity demonstration for an isometry"),
    "perturb": (cmd_perturb, "perturb points into pairwise related position"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all random streams (default 0)")
    common.add_argument("--samples", type=int, default=10_000, help="sample count for check suites")
    common.add_argument("--tol", type=float, default=None, help="override the check tolerance")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    common.add_argument("--output", default=None, help="write output to this file instead of stdout")

    parser = argparse.ArgumentParser(
        prog="carnotw1", description=__doc__.splitlines()[0], formatter_class=argparse.RawTextHelpFormatter
    )
    parser.add_argument("--version", action="version", version=_version_string())
    sub = parser.add_subparsers(dest="command", required=True)
    p = {name: sub.add_parser(name, parents=[common], help=desc) for name, (_, desc) in COMMANDS.items()}

    for name in COMMANDS:
        p[name].add_argument("--group", default=None, help="group JSON file (default: first Heisenberg group)")
        if name not in ("r0", "check-hs-proof"):
            p[name].add_argument("--norm", required=True, help="norm JSON file")
    p["norm"].add_argument("--point", required=True, help="comma-separated coordinates")
    p["dist"].add_argument("--p", required=True, help="comma-separated coordinates")
    p["dist"].add_argument("--q", required=True, help="comma-separated coordinates")
    for name in ("w1", "geodesic-branch"):
        p[name].add_argument("--mu", required=True, help="measure JSON file")
        p[name].add_argument("--nu", required=True, help="measure JSON file")
    p["w1"].add_argument("--plan", action="store_true", help="also print the optimal plan as CSV")
    p["geodesic-validate"].add_argument("--curve", required=True, help="curve JSON file")
    for name in ("geodesic-validate", "geodesic-branch"):
        p[name].add_argument("--grid", type=int, default=11, help="time grid size (default 11)")
    p["geodesic-branch"].add_argument("--select", required=True, help="JSON list of split-set points")
    p["check-hs-proof"].add_argument("--r", type=float, required=True, help="Euclidean ball radius")
    p["rigidity-demo"].add_argument("--iso", required=True, help="isometry JSON file")
    p["perturb"].add_argument("--points", required=True, help="point list JSON file")
    p["perturb"].add_argument("--epsilon", type=float, required=True, help="maximal displacement")
    return parser


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise FormatError(f"cannot write {path}: {exc.strerror}") from exc


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_IO
    handler = COMMANDS[args.command][0]
    try:
        outcome = handler(args)
        text = to_json(outcome.json_obj) if args.format == "json" else outcome.csv_text
        _emit(text, args.output)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CarnotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK if outcome.passed else EXIT_CHECK


def main() -> None:
    sys.exit(run())
