"""JSON file formats for groups, norms, measures, curves, isometries and point lists."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .carnot_core import GroupSpec, make_heisenberg, make_step2_group
from .errors import CarnotError
from .geodesics import GeodesicCurve
from .norms import NormSpec, make_norm
from .rigidity import IsometrySpec, make_left_translation, make_linear_isometry
from .wasserstein import DiscreteMeasure, make_measure

FORMAT_VERSIONS = {"group": 1, "norm": 1, "measure": 1, "curve": 1, "isometry": 1, "points": 1}


class FormatError(CarnotError):
    """A file is missing, unreadable, or does not have the expected structure."""


def read_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def _field(obj: Any, key: str, what: str):
    if not isinstance(obj, dict) or key not in obj:
        raise FormatError(f"{what} object needs a {key!r} field")
    return obj[key]


def _array(value, what: str) -> np.ndarray:
    try:
        return np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{what} must be numeric") from exc


def _kind(obj: Any, key: str, what: str):
    if isinstance(obj, dict) and key not in obj and "kind" in obj:
        return obj["kind"]
    return _field(obj, key, what)


def group_from_json(obj: Any) -> GroupSpec:
    kind = _kind(obj, "type", "group")
    if kind == "heisenberg":
        return make_heisenberg(_field(obj, "n", "heisenberg group"))
    if kind == "step2":
        return make_step2_group(
            int(_field(obj, "n1", "step2 group")),
            int(_field(obj, "n2", "step2 group")),
            _array(_field(obj, "bracket", "step2 group"), "bracket"),
        )
    raise FormatError(f"unknown group kind {kind!r}; expected 'heisenberg' or 'step2'")


def group_to_json(group: GroupSpec) -> dict:
    if group.kind == "heisenberg":
        return {"type": "heisenberg", "n": group.heisenberg_n}
    return {"type": "step2", "n1": group.n1, "n2": group.n2, "bracket": group.bracket.tolist()}


def norm_from_json(obj: Any, group: GroupSpec) -> NormSpec:
    kind = _kind(obj, "norm", "norm")
    params = {k: obj[k] for k in ("p", "a", "r", "r0") if k in obj}
    if isinstance(params.get("p"), str):
        if params["p"].lower() not in ("inf", "infinity"):
            raise FormatError(f"pmax exponent {params['p']!r} is not a number or 'inf'")
        params["p"] = math.inf
    return make_norm(group, kind, **params)


def norm_to_json(norm: NormSpec) -> dict:
    out: dict[str, Any] = {"norm": norm.kind}
    if norm.kind == "pmax":
        out.update(p="inf" if math.isinf(norm.p) else norm.p, a=norm.a)
    if norm.kind == "hs":
        out.update(r=norm.r, r0=norm.r0)
    return out


def measure_from_json(obj: Any) -> DiscreteMeasure:
    return make_measure(
        _array(_field(obj, "points", "measure"), "points"), _array(_field(obj, "weights", "measure"), "weights")
    )


def curve_from_json(obj: Any) -> GeodesicCurve:
    knots = _field(obj, "knots", "curve")
    if not isinstance(knots, list):
        raise FormatError("curve 'knots' must be a list")
    return GeodesicCurve(
        tuple((float(_field(k, "t", "knot")), measure_from_json(_field(k, "measure", "knot"))) for k in knots)
    )


def isometry_from_json(obj: Any, norm: NormSpec) -> IsometrySpec:
    group = norm.group
    if not isinstance(obj, dict):
        raise FormatError("isometry must be a JSON object")
    translate = make_left_translation(group, _array(obj.get("translate", group.identity()), "translate"))
    linear = make_linear_isometry(norm, _array(obj.get("linear", np.eye(group.total_dim)), "linear"))
    return translate.compose(linear)


def points_from_json(obj: Any, group: GroupSpec) -> np.ndarray:
    pts = _array(_field(obj, "points", "point list") if isinstance(obj, dict) else obj, "points")
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2:
        raise FormatError("points must be a list of coordinate lists")
    return group.check(pts)
