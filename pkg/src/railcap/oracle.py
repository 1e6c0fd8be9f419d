"""Brute-force reference solver for small instances.

Enumerates every simple path of every OD pair and solves the complete LP in
exact rational arithmetic, either by enumerating all bases (tiny problems) or
by a tableau simplex under Bland's rule.  Nothing here shares code with the
floating-point master or with pricing.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

from railcap.errors import InstanceTooLarge
from railcap.network import ServiceNetwork
from railcap.paths import DualPrices, PassengerPath
from railcap.solver import FlowSolution

MAX_STATIONS = 10
MAX_ARCS = 20
VERTEX_ENUM_LIMIT = 3000


def _rational(x: float) -> Fraction:
    """Exact value of ``x``, or a short fraction if one reproduces it to 1 ulp."""
    exact = Fraction(x)
    short = exact.limit_denominator(10**6)
    if abs(short - exact) <= abs(exact) * Fraction(1, 2**52):
        return short
    return exact


def enumerate_simple_paths(network: ServiceNetwork, origin: str, destination: str, max_arcs: int) -> list[list[str]]:
    out = []
    adj: dict[str, list[str]] = {}
    for a, b in network.arcs:
        adj.setdefault(a, []).append(b)
    for lst in adj.values():
        lst.sort()

    def walk(path):
        u = path[-1]
        if u == destination:
            out.append(list(path))
            return
        if len(path) - 1 >= max_arcs:
            return
        for v in adj.get(u, ()):
            if v not in path:
                path.append(v)
                walk(path)
                path.pop()

    walk([origin])
    return out


def _tableau_simplex(c, A, b):
    """max c.x, A x <= b, x >= 0 with b >= 0, exact.  Returns (x, y, z)."""
    m, n = len(A), len(c)
    T = [list(A[i]) + [Fraction(int(i == r)) for r in range(m)] + [b[i]] for i in range(m)]
    obj = [-cj for cj in c] + [Fraction(0)] * m + [Fraction(0)]
    basis = list(range(n, n + m))
    while True:
        enter = next((j for j in range(n + m) if obj[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            if T[i][enter] > 0:
                ratio = T[i][-1] / T[i][enter]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise ArithmeticError("unbounded")
        r = best[1]
        piv = T[r][enter]
        T[r] = [v / piv for v in T[r]]
        for i in range(m):
            if i != r and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [vi - f * vr for vi, vr in zip(T[i], T[r])]
        f = obj[enter]
        obj = [vo - f * vr for vo, vr in zip(obj, T[r])]
        basis[r] = enter
    x = [Fraction(0)] * (n + m)
    for i, j in enumerate(basis):
        x[j] = T[i][-1]
    y = obj[n : n + m]
    return x[:n], y, obj[-1]


def _solve_square(M, rhs):
    """Gauss-Jordan over Fractions; None when singular."""
    k = len(M)
    aug = [list(row) + [r] for row, r in zip(M, rhs)]
    for col in range(k):
        piv = next((r for r in range(col, k) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(k):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[-1] for row in aug]


def enumerate_vertices(c, A, b):
    """Best vertex of {A x <= b, x >= 0} by trying every basis.  Returns (x, z)."""
    m, n = len(A), len(c)
    full = [list(A[i]) + [Fraction(int(i == r)) for r in range(m)] for i in range(m)]
    best_x, best_z = [Fraction(0)] * n, Fraction(0)
    for cols in itertools.combinations(range(n + m), m):
        sub = [[full[i][j] for j in cols] for i in range(m)]
        sol = _solve_square(sub, b)
        if sol is None or any(v < 0 for v in sol):
            continue
        x = [Fraction(0)] * (n + m)
        for j, v in zip(cols, sol):
            x[j] = v
        z = sum((c[j] * x[j] for j in range(n)), Fraction(0))
        if z > best_z:
            best_x, best_z = x[:n], z
    return best_x, best_z


def oracle_solve(
    network: ServiceNetwork,
    od_pairs=None,
    path_length_cap: int | None = None,
    objective: str = "inverse_cost",
    method: str = "auto",
) -> FlowSolution:
    """Global optimum over all simple paths of at most ``path_length_cap`` arcs."""
    if len(network.stations) > MAX_STATIONS or len(network.arcs) > MAX_ARCS:
        raise InstanceTooLarge(
            f"oracle limited to {MAX_STATIONS} stations / {MAX_ARCS} arcs, "
            f"got {len(network.stations)} / {len(network.arcs)}"
        )
    ods = tuple(sorted(od_pairs, key=lambda o: (o.origin, o.destination))) if od_pairs is not None else network.od_pairs
    if path_length_cap is None:
        path_length_cap = max(1, len(network.stations) - 1)
    arcs = sorted(network.arcs)
    arc_cost = {a: _rational(network.arcs[a].arc_cost) for a in arcs}

    columns: dict[int, list[PassengerPath]] = {}
    live = []  # (k, i, arcs, exact cost)
    for k, od in enumerate(ods):
        columns[k] = []
        for st in enumerate_simple_paths(network, od.origin, od.destination, path_length_cap):
            parc = tuple(zip(st[:-1], st[1:]))
            exact = sum((arc_cost[a] for a in parc), Fraction(0))
            columns[k].append(PassengerPath(k, parc, math.fsum(network.arcs[a].arc_cost for a in parc)))
            if od.demand > 0:
                live.append((k, len(columns[k]) - 1, parc, exact))

    demands = {k: od.demand for k, od in enumerate(ods)}
    exact_d = {k: _rational(d) for k, d in demands.items()}
    od_ids = sorted({k for k, *_ in live})
    m = len(od_ids) + len(arcs)
    A = [[Fraction(0)] * len(live) for _ in range(m)]
    c = []
    for j, (k, _, parc, cost) in enumerate(live):
        c.append(exact_d[k] / cost if objective == "inverse_cost" else exact_d[k])
        A[od_ids.index(k)][j] = Fraction(1)
        for a in parc:
            A[len(od_ids) + arcs.index(a)][j] += exact_d[k]
    b = [Fraction(1)] * len(od_ids) + [Fraction(network.arcs[a].seat_capacity) for a in arcs]

    y = [Fraction(0)] * m
    if not live:
        x = []
    elif method == "vertices" or (method == "auto" and math.comb(len(live) + m, m) <= VERTEX_ENUM_LIMIT):
        x, _ = enumerate_vertices(c, A, b)
        y = None
    else:
        x, y, _ = _tableau_simplex(c, A, b)

    shares = {(k, i): 0.0 for k in columns for i in range(len(columns[k]))}
    for (k, i, _, _), v in zip(live, x):
        shares[(k, i)] = float(v)
    loads = {a: Fraction(0) for a in arcs}
    for (k, _, parc, _), v in zip(live, x):
        for a in parc:
            loads[a] += exact_d[k] * v
    z = sum((cj * xj for cj, xj in zip(c, x)), Fraction(0))
    duals = DualPrices()
    if y is not None:
        duals = DualPrices(
            {k: float(y[i]) for i, k in enumerate(od_ids)},
            {a: float(y[len(od_ids) + i]) for i, a in enumerate(arcs)},
        )
    return FlowSolution(
        columns,
        shares,
        float(z),
        duals,
        {a: float(v) for a, v in loads.items()},
        demands,
        {a: float(network.arcs[a].seat_capacity) for a in arcs},
    )
