"""Homogeneous norms on step-two groups and the left-invariant distance they induce."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..carnot_core import GroupSpec, inverse, multiply
from ..errors import InvalidParameterError, PreconditionError
from .gauge import hs_norm, hs_r0

KINDS = ("koranyi", "lee-naor", "pmax", "hs")


@dataclass(frozen=True, eq=False)
class NormSpec:
    kind: str
    group: GroupSpec
    p: float | None = None
    a: float | None = None
    r: float | None = None
    r0: float | None = None

    @property
    def beyond_r0(self) -> bool:
        """Set for a Hebisch-Sikora radius outside the guaranteed-norm range."""
        return self.kind == "hs" and self.r >= self.r0

    @property
    def is_hsc(self) -> bool:
        """Whether the norm is known to be horizontally strictly convex."""
        if self.kind in ("koranyi", "lee-naor"):
            return True
        return self.kind == "hs" and not self.beyond_r0

    def describe(self) -> str:
        if self.kind == "pmax":
            return f"pmax(p={self.p}, a={self.a})"
        if self.kind == "hs":
            return f"hs(r={self.r})"
        return self.kind

    def __call__(self, p):
        return norm_eval(self, p)


def _require_heisenberg(group: GroupSpec, kind: str) -> None:
    if group.kind != "heisenberg":
        raise InvalidParameterError(f"{kind} norm is only defined on Heisenberg groups, got {group.kind}")


def koranyi(group: GroupSpec) -> NormSpec:
    _require_heisenberg(group, "koranyi")
    return NormSpec("koranyi", group)


def lee_naor(group: GroupSpec) -> NormSpec:
    _require_heisenberg(group, "lee-naor")
    return NormSpec("lee-naor", group)


def pmax(group: GroupSpec, p: float = 2.0, a: float = 1.0) -> NormSpec:
    _require_heisenberg(group, "pmax")
    p = float(p)
    if not (p >= 1.0):
        raise InvalidParameterError(f"pmax exponent must satisfy 1 <= p <= inf, got {p}")
    n = group.heisenberg_n
    if not (0 < a <= n ** -0.5 * (1 + 1e-15)):
        raise InvalidParameterError(f"pmax weight must satisfy 0 < a <= n^-1/2 = {n ** -0.5:.6g}, got {a}")
    return NormSpec("pmax", group, p=p, a=float(a))


def hebisch_sikora(group: GroupSpec, r: float, r0: float | None = None) -> NormSpec:
    if not r > 0:
        raise InvalidParameterError(f"Hebisch-Sikora radius must be positive, got {r}")
    if r0 is None:
        r0 = hs_r0(group)
    return NormSpec("hs", group, r=float(r), r0=float(r0))


def make_norm(group: GroupSpec, kind: str, **params) -> NormSpec:
    kind = kind.lower()
    if kind == "koranyi":
        return koranyi(group)
    if kind in ("lee-naor", "leenaor", "lee_naor"):
        return lee_naor(group)
    if kind == "pmax":
        return pmax(group, params.get("p", 2.0), params.get("a", 1.0))
    if kind in ("hs", "hebisch-sikora"):
        if "r" not in params:
            raise InvalidParameterError("hs norm needs a radius r")
        return hebisch_sikora(group, params["r"], params.get("r0"))
    raise InvalidParameterError(f"unknown norm kind {kind!r}; expected one of {KINDS}")


def _koranyi(group, p):
    h2 = np.sum(p[..., : group.n1] ** 2, axis=-1)
    z = p[..., -1]
    return (h2 * h2 + z * z) ** 0.25


def norm_eval(norm: NormSpec, p):
    group = norm.group
    p = group.check(p)
    if norm.kind == "koranyi":
        out = _koranyi(group, p)
    elif norm.kind == "lee-naor":
        h2 = np.sum(p[..., : group.n1] ** 2, axis=-1)
        out = np.sqrt(_koranyi(group, p) ** 2 + h2)
    elif norm.kind == "pmax":
        h = p[..., : group.n1]
        if math.isinf(norm.p):
            hp = np.max(np.abs(h), axis=-1)
        else:
            hp = np.linalg.norm(h, ord=norm.p, axis=-1)
        out = np.maximum(hp, norm.a * np.sqrt(np.abs(p[..., -1])))
    elif norm.kind == "hs":
        return hs_norm(group, norm.r, p)
    else:
        raise InvalidParameterError(f"unknown norm kind {norm.kind!r}")
    return float(out) if np.ndim(out) == 0 else out


def distance(norm: NormSpec, p, q):
    g = norm.group
    return norm_eval(norm, multiply(g, inverse(g, p), q))


def hsc_defect(norm: NormSpec, p, q):
    """``N(p) + N(q) - N(p.q)``: nonnegative for a norm, zero on triangle equality."""
    g = norm.group
    p = g.check(p)
    q = g.check(q)
    if not (np.any(p, axis=-1).all() and np.any(q, axis=-1).all()):
        raise PreconditionError("defect is only defined for points different from the identity")
    return norm_eval(norm, p) + norm_eval(norm, q) - norm_eval(norm, multiply(g, p, q))
