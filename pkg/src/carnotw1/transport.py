"""Exact transportation problems on dense cost matrices.

``network_simplex`` solves ``min <C, X>`` over nonnegative ``X`` with row sums
``a`` and column sums ``b`` by the primal network simplex on the bipartite
graph rows x columns. The basis is always a spanning tree with ``m + n - 1``
cells (some possibly at zero flow), so the returned plan is a basic optimal
solution and its potentials certify optimality.

Pivoting: the entering cell is the most negative reduced cost, ties broken by
(row, column); the leaving cell is the blocking cell with the smallest
(row, column). After a run of degenerate pivots the entering rule falls back
to Bland's (first eligible cell in row-major order) until a pivot makes
progress, which rules out cycling.

``bruteforce_transport`` is an independent oracle for tiny instances: it
enumerates every spanning tree of K_{m,n}, solves for the unique flow the
tree supports, and keeps the cheapest nonnegative one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParameterError

BRUTEFORCE_MAX_NODES = 8


@dataclass
class TransportSolution:
    value: float
    flow: np.ndarray
    basis: list[tuple[int, int]]
    u: np.ndarray
    v: np.ndarray
    pivots: int


def _northwest_corner(a, b):
    m, n = len(a), len(b)
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    flow = {}
    i = j = 0
    while True:
        x = min(a[i], b[j])
        flow[i, j] = x
        a[i] -= x
        b[j] -= x
        if i == m - 1 and j == n - 1:
            break
        if i == m - 1:
            j += 1
        elif j == n - 1 or a[i] <= b[j]:
            i += 1
        else:
            j += 1
    return flow


def _tree(m, n, basis, cost_rows):
    """Potentials with u[0] = 0 plus parent links rooted at row 0.

    Nodes ``0..m-1`` are rows, ``m..m+n-1`` are columns; ``cost_rows`` is the
    cost matrix as nested lists (scalar numpy indexing is too slow here).
    """
    size = m + n
    adj = [[] for _ in range(size)]
    for i, j in basis:
        adj[i].append(m + j)
        adj[m + j].append(i)
    pot = [0.0] * size
    parent = [-1] * size
    depth = [0] * size
    seen = [False] * size
    seen[0] = True
    stack = [0]
    count = 1
    while stack:
        node = stack.pop()
        for nb in adj[node]:
            if seen[nb]:
                continue
            seen[nb] = True
            count += 1
            parent[nb] = node
            depth[nb] = depth[node] + 1
            if node < m:
                pot[nb] = cost_rows[node][nb - m] - pot[node]
            else:
                pot[nb] = cost_rows[nb][node - m] - pot[node]
            stack.append(nb)
    if count != size:
        raise RuntimeError("basis is not a spanning tree")
    return pot[:m], pot[m:], parent, depth


def _cycle(i, j, m, parent, depth):
    """Cells of the tree path from column j back to row i, in order."""
    a, b = m + j, i
    left, right = [], []
    while a != b:
        if depth[a] >= depth[b]:
            left.append((a, parent[a]))
            a = parent[a]
        else:
            right.append((b, parent[b]))
            b = parent[b]
    path = left + [(y, x) for x, y in reversed(right)]
    cells = []
    for x, y in path:
        cells.append((x, y - m) if x < m else (y, x - m))
    return cells


# Below this many cells the pricing loop runs in plain Python; numpy call
# overhead dominates for tiny instances.
_SMALL_CELLS = 256


def _price_small(cost_rows, u, v, flow, m, n, eps, first):
    best, best_rc = None, -eps
    for i in range(m):
        row = cost_rows[i]
        ui = u[i]
        for j in range(n):
            if (i, j) in flow:
                continue
            rc = row[j] - ui - v[j]
            if rc < best_rc:
                if first:
                    return i, j
                best, best_rc = (i, j), rc
    return best


def _price_large(cost, u, v, in_basis, n, eps, first):
    reduced = cost - np.asarray(u)[:, None] - np.asarray(v)[None, :]
    reduced[in_basis] = 0.0
    if first:
        eligible = np.flatnonzero(reduced.ravel() < -eps)
        if eligible.size == 0:
            return None
        k = int(eligible[0])
    else:
        k = int(np.argmin(reduced))
        if reduced.flat[k] >= -eps:
            return None
    return divmod(k, n)


def network_simplex(cost, a, b, max_pivots: int | None = None) -> TransportSolution:
    cost = np.asarray(cost, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if cost.ndim != 2 or cost.shape != (len(a), len(b)) or cost.size == 0:
        raise InvalidParameterError(f"cost shape {cost.shape} does not match supplies {len(a)} x {len(b)}")
    m, n = cost.shape
    flow = _northwest_corner(a, b)
    small = m * n <= _SMALL_CELLS
    if not small:
        in_basis = np.zeros((m, n), dtype=bool)
        for c in flow:
            in_basis[c] = True
    eps = 1e-12 * max(1.0, float(np.max(np.abs(cost))))
    if max_pivots is None:
        max_pivots = 50 * (m + n) * max(m, n) + 1000
    bland_after = m + n
    degenerate_run = 0
    pivots = 0
    cost_rows = cost.tolist()
    while True:
        u, v, parent, depth = _tree(m, n, flow, cost_rows)
        first = degenerate_run > bland_after
        if small:
            cell = _price_small(cost_rows, u, v, flow, m, n, eps, first)
        else:
            cell = _price_large(cost, u, v, in_basis, n, eps, first)
        if cell is None:
            break
        if pivots >= max_pivots:
            raise RuntimeError(f"network simplex did not converge in {max_pivots} pivots")
        i, j = cell
        path = _cycle(i, j, m, parent, depth)
        minus = path[0::2]
        plus = path[1::2]
        theta = min(flow[c] for c in minus)
        leave = min(c for c in minus if flow[c] <= theta)
        if theta > 0.0:
            for c in minus:
                flow[c] -= theta
            for c in plus:
                flow[c] += theta
        del flow[leave]
        flow[i, j] = theta
        if not small:
            in_basis[leave] = False
            in_basis[i, j] = True
        degenerate_run = degenerate_run + 1 if theta == 0.0 else 0
        pivots += 1
    plan = np.zeros((m, n))
    for c, x in flow.items():
        plan[c] = max(x, 0.0)
    basis = sorted(flow)
    value = float(sum(plan[c] * cost_rows[c[0]][c[1]] for c in basis))
    return TransportSolution(value, plan, basis, np.array(u), np.array(v), pivots)


@lru_cache(maxsize=None)
def _tree_table(m: int, n: int):
    """All spanning trees of K_{m,n} with the linear map from supplies to tree flows."""
    edges = [(i, j) for i in range(m) for j in range(n)]
    k = m + n - 1
    trees, maps = [], []
    for combo in itertools.combinations(range(len(edges)), k):
        parent = list(range(m + n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        acyclic = True
        for e in combo:
            i, j = edges[e]
            ri, rj = find(i), find(m + j)
            if ri == rj:
                acyclic = False
                break
            parent[ri] = rj
        if not acyclic:
            continue
        # Conservation at every row and every column but the last.
        A = np.zeros((k, k))
        for col, e in enumerate(combo):
            i, j = edges[e]
            A[i, col] = 1.0
            if j < n - 1:
                A[m + j, col] = 1.0
        trees.append(combo)
        maps.append(np.linalg.inv(A))
    return np.array(trees, dtype=int), np.array(maps)


def bruteforce_transport(cost, a, b, feas_tol: float = 1e-12) -> float:
    cost = np.asarray(cost, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = cost.shape
    if m + n > BRUTEFORCE_MAX_NODES:
        raise InvalidParameterError(f"brute-force oracle is limited to m + n <= {BRUTEFORCE_MAX_NODES}, got {m + n}")
    if len(a) != m or len(b) != n:
        raise InvalidParameterError("cost shape does not match supplies")
    trees, maps = _tree_table(m, n)
    rhs = np.concatenate([a, b[:-1]])
    flows = maps @ rhs
    scale = max(1.0, float(a.sum()))
    feasible = flows.min(axis=1) >= -feas_tol * scale
    costs = (flows * cost.ravel()[trees]).sum(axis=1)
    return float(costs[feasible].min())
