"""Step-two Carnot groups in exponential coordinates of the first kind.

Points are plain float arrays whose last axis has length ``total_dim``; every
operation broadcasts over leading axes, so a batch of points is an array of
shape ``(..., total_dim)``. The identity is the zero vector and inversion is
negation.

Two group laws are supported:

* ``heisenberg(n)``: coordinates ``(x_1..x_n, y_1..y_n, z)`` with
  ``z'' = z + z' + 2 * sum_i (x'_i y_i - x_i y'_i)``.
* ``step2(n1, n2, B)``: first layer ``x`` of size ``n1``, second layer of size
  ``n2``, product ``x + x' + 1/2 B(x, x')`` where
  ``B(x, x')_k = sum_ab B[a, b, k] x_a x'_b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, InvalidParameterError

DEFAULT_HORIZONTAL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class GroupSpec:
    kind: str
    n1: int
    n2: int
    bracket: np.ndarray = field(repr=False)

    @property
    def layer_dims(self) -> list[int]:
        return [self.n1, self.n2]

    @property
    def total_dim(self) -> int:
        return self.n1 + self.n2

    @property
    def weights(self) -> list[int]:
        return [1] * self.n1 + [2] * self.n2

    @property
    def heisenberg_n(self) -> int | None:
        return self.n1 // 2 if self.kind == "heisenberg" else None

    @property
    def key(self) -> tuple:
        """Hashable identity of the group law, used for caching."""
        return (self.kind, self.n1, self.n2, self.bracket.tobytes())

    def __eq__(self, other):
        return isinstance(other, GroupSpec) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def check(self, p) -> np.ndarray:
        arr = np.asarray(p, dtype=float)
        if arr.ndim == 0 or arr.shape[-1] != self.total_dim:
            raise DimensionMismatchError(
                f"point has shape {arr.shape}, expected last axis {self.total_dim}"
            )
        return arr

    def identity(self) -> np.ndarray:
        return np.zeros(self.total_dim)

    def horizontal(self, p) -> np.ndarray:
        return self.check(p)[..., : self.n1]

    def vertical(self, p) -> np.ndarray:
        return self.check(p)[..., self.n1 :]

    def correction(self, x, xp) -> np.ndarray:
        """Second-layer term of the product of two horizontal parts ``x``, ``xp``.

        Bilinear and skew: ``correction(x, x) == 0``.
        """
        x = np.asarray(x, dtype=float)
        xp = np.asarray(xp, dtype=float)
        if self.kind == "heisenberg":
            n = self.n1 // 2
            a, b = x[..., :n], x[..., n:]
            ap, bp = xp[..., :n], xp[..., n:]
            return 2.0 * np.sum(ap * b - a * bp, axis=-1, keepdims=True)
        return 0.5 * np.einsum("...a,abk,...b->...k", x, self.bracket, xp)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def make_heisenberg(n: int) -> GroupSpec:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidParameterError(f"Heisenberg dimension must be a positive integer, got {n!r}")
    n = int(n)
    # Bracket equivalent to the factor-2 law, kept for generic consumers
    # (constant estimation); multiply uses the closed form directly.
    bracket = np.zeros((2 * n, 2 * n, 1))
    for i in range(n):
        bracket[i, n + i, 0] = -4.0
        bracket[n + i, i, 0] = 4.0
    return GroupSpec("heisenberg", 2 * n, 1, _frozen(bracket))


def make_step2_group(n1: int, n2: int, bracket) -> GroupSpec:
    if n1 < 1 or n2 < 1:
        raise InvalidParameterError(f"layer dimensions must be positive, got n1={n1}, n2={n2}")
    B = np.asarray(bracket, dtype=float)
    if B.shape != (n1, n1, n2):
        raise InvalidParameterError(
            f"bracket shape invariant violated: got {B.shape}, expected {(n1, n1, n2)}"
        )
    if not np.array_equal(B, -np.transpose(B, (1, 0, 2))):
        raise InvalidParameterError("bracket skew-symmetry invariant violated: B[a][b][k] != -B[b][a][k]")
    if not np.any(B != 0):
        raise InvalidParameterError("bracket non-degeneracy invariant violated: [V1, V1] = 0")
    return GroupSpec("step2", int(n1), int(n2), _frozen(B))


def multiply(spec: GroupSpec, p, q) -> np.ndarray:
    p = spec.check(p)
    q = spec.check(q)
    out = p + q
    n1 = spec.n1
    out[..., n1:] += spec.correction(p[..., :n1], q[..., :n1])
    return out


def inverse(spec: GroupSpec, p) -> np.ndarray:
    return -spec.check(p)


def dilate(spec: GroupSpec, lam: float, p) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise InvalidParameterError(f"dilation factor must be positive, got {lam}")
    p = spec.check(p)
    out = p.copy()
    lam = lam[..., None] if lam.ndim else lam
    out[..., : spec.n1] *= lam
    out[..., spec.n1 :] *= lam * lam
    return out


def is_horizontal(spec: GroupSpec, p, tol: float = DEFAULT_HORIZONTAL_TOL):
    v = spec.vertical(p)
    res = np.all(np.abs(v) <= tol, axis=-1)
    return bool(res) if res.ndim == 0 else res


def same_horizontal_line_through_origin(spec: GroupSpec, p, q, tol: float = DEFAULT_HORIZONTAL_TOL) -> bool:
    p = spec.check(p)
    q = spec.check(q)
    if not np.any(p) or not np.any(q):
        raise InvalidParameterError("horizontal-line test requires points different from the identity")
    if not (is_horizontal(spec, p, tol) and is_horizontal(spec, q, tol)):
        return False
    xp, xq = p[: spec.n1], q[: spec.n1]
    np_, nq = np.linalg.norm(xp), np.linalg.norm(xq)
    if np_ <= tol or nq <= tol:
        return False
    return any(np.all(np.abs(np_ * xq - s * nq * xp) <= tol) for s in (1.0, -1.0))
