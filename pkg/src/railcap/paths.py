"""Passenger paths on the service network.

Shortest paths break ties towards the lexicographically smallest station
sequence, so every routine here is deterministic.

Pricing looks for a path maximising the reduced cost

    rc(p) = v(c_p) - mu_k - d_k * sum(lambda_a for a in p)

where ``v`` is the column's objective weight (``d_k / c_p`` by default).
``v`` is convex and non-increasing in the path cost, so ``rc`` is convex and
non-increasing in ``(cost, dual length)`` and its maximum over all simple
paths sits on a supported point of the two-criteria Pareto front.  Those
points are exactly the minimisers of ``cost + theta * dual_length`` for some
``theta >= 0``; a dichotomic search over ``theta`` enumerates them.
"""
from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from railcap.config import SolverConfig
from railcap.errors import NoPath
from railcap.network import Arc, ServiceNetwork

log = logging.getLogger(__name__)

Weight = tuple[float, ...]


@dataclass(frozen=True)
class PassengerPath:
    od: int
    arcs: tuple[Arc, ...]
    cost: float

    @property
    def stations(self) -> tuple[str, ...]:
        return (self.arcs[0][0],) + tuple(b for _, b in self.arcs)


@dataclass(frozen=True)
class DualPrices:
    od_duals: Mapping[int, float] = field(default_factory=dict)
    arc_duals: Mapping[Arc, float] = field(default_factory=dict)

    def mu(self, k: int) -> float:
        return self.od_duals.get(k, 0.0)

    def lam(self, arc: Arc) -> float:
        return self.arc_duals.get(arc, 0.0)


def path_cost(network: ServiceNetwork, arcs: Sequence[Arc]) -> float:
    return math.fsum(network.arcs[a].arc_cost for a in arcs)


def make_path(network: ServiceNetwork, k: int, stations: Sequence[str]) -> PassengerPath:
    arcs = tuple(zip(stations[:-1], stations[1:]))
    return PassengerPath(k, arcs, path_cost(network, arcs))


def check_path(network: ServiceNetwork, path: PassengerPath) -> None:
    """Raise ValueError unless ``path`` is a simple directed path of its OD pair."""
    od = network.od_pairs[path.od]
    if not path.arcs:
        raise ValueError("empty path")
    st = path.stations
    if st[0] != od.origin or st[-1] != od.destination:
        raise ValueError(f"path {st} does not join {od.origin}->{od.destination}")
    if len(set(st)) != len(st):
        raise ValueError(f"path {st} revisits a station")
    for a, b in zip(path.arcs, path.arcs[1:]):
        if a[1] != b[0]:
            raise ValueError(f"path {st} is not contiguous")
    for a in path.arcs:
        if a not in network.arcs:
            raise ValueError(f"path uses unknown arc {a}")
    if not math.isclose(path.cost, path_cost(network, path.arcs), rel_tol=1e-12):
        raise ValueError("path cost does not match its arcs")


# ---------------------------------------------------------------- Dijkstra


def _add(a: Weight, b: Weight) -> Weight:
    return tuple(x + y for x, y in zip(a, b))


def _close(a: Weight, b: Weight) -> bool:
    return all(abs(x - y) <= 1e-12 * max(1.0, abs(x), abs(y)) for x, y in zip(a, b))


def _lex_shortest(
    network: ServiceNetwork,
    origin: str,
    destination: str,
    weight: Callable[[Arc], Weight],
    banned_nodes: frozenset = frozenset(),
    banned_arcs: frozenset = frozenset(),
) -> list[str] | None:
    """Minimum-weight station sequence, lexicographically smallest among ties.

    Distances to ``destination`` come from a reverse Dijkstra; the path is then
    read off greedily by always stepping to the smallest-id station on a
    tight arc.
    """
    if origin in banned_nodes or destination in banned_nodes:
        return None
    preds: dict[str, list[Arc]] = {}
    for key in network.arcs:
        if key in banned_arcs or key[0] in banned_nodes or key[1] in banned_nodes:
            continue
        preds.setdefault(key[1], []).append(key)

    zero = tuple(0.0 for _ in weight(next(iter(network.arcs)))) if network.arcs else (0.0,)
    dist: dict[str, Weight] = {destination: zero}
    heap = [(zero, destination)]
    done = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for key in preds.get(v, ()):
            u = key[0]
            nd = _add(d, weight(key))
            if u not in dist or nd < dist[u]:
                dist[u] = nd
                heapq.heappush(heap, (nd, u))
    if origin not in dist:
        return None

    path = [origin]
    seen = {origin}
    u = origin
    while u != destination:
        step = None
        for arc in network.successors(u):
            v = arc.target
            if v in seen or v not in dist or arc.key in banned_arcs or v in banned_nodes:
                continue
            if _close(_add(weight(arc.key), dist[v]), dist[u]):
                step = v
                break  # successors are sorted by target id
        if step is None:  # only reachable through accumulated rounding; fall back to the best successor
            options = [
                (_add(weight(a.key), dist[a.target]), a.target)
                for a in network.successors(u)
                if a.target not in seen and a.target in dist and a.key not in banned_arcs and a.target not in banned_nodes
            ]
            if not options:
                return None
            step = min(options)[1]
        path.append(step)
        seen.add(step)
        u = step
    return path


def shortest_path(
    network: ServiceNetwork,
    origin: str,
    destination: str,
    arc_weights: Mapping[Arc, float] | None = None,
    od: int = -1,
) -> PassengerPath:
    """Minimum-weight simple path; the returned ``cost`` is always plain arc cost.

    Raises NoPath when ``destination`` cannot be reached.
    """
    if arc_weights is None:
        w = {key: arc.arc_cost for key, arc in network.arcs.items()}
    else:
        w = dict(arc_weights)
        bad = [key for key in network.arcs if not w.get(key, 0.0) > 0]
        if bad:
            raise ValueError(f"arc weights must be strictly positive, not on {bad[0]}")
    stations = _lex_shortest(network, origin, destination, lambda a: (w[a],))
    if stations is None:
        raise NoPath(origin, destination)
    return make_path(network, od, stations)


def k_shortest_paths(
    network: ServiceNetwork,
    origin: str,
    destination: str,
    k: int,
    weight: Callable[[Arc], float] | None = None,
) -> list[list[str]]:
    """Yen's algorithm: up to ``k`` simple paths in non-decreasing weight order."""
    if weight is None:
        weight = lambda a: network.arcs[a].arc_cost  # noqa: E731
    return _yen(network, origin, destination, k, lambda a: (weight(a),))


def _yen(network, origin, destination, k, wt) -> list[list[str]]:
    def total(p):
        arcs = list(zip(p[:-1], p[1:]))
        return tuple(math.fsum(c) for c in zip(*(wt(a) for a in arcs)))

    first = _lex_shortest(network, origin, destination, wt)
    if first is None:
        return []
    found = [first]
    candidates: list = []
    seen_cands = {tuple(first)}
    while len(found) < k:
        last = found[-1]
        for i in range(len(last) - 1):
            spur = last[i]
            root = last[: i + 1]
            banned_arcs = frozenset(
                (p[i], p[i + 1]) for p in found if len(p) > i + 1 and p[: i + 1] == root
            )
            tail = _lex_shortest(network, spur, destination, wt, frozenset(root[:-1]), banned_arcs)
            if tail is None:
                continue
            cand = tuple(root[:-1] + tail)
            if cand not in seen_cands:
                seen_cands.add(cand)
                heapq.heappush(candidates, (total(cand), cand))
        if not candidates:
            break
        found.append(list(heapq.heappop(candidates)[1]))
    return found


# ---------------------------------------------------------------- columns


def initial_columns(network: ServiceNetwork) -> tuple[dict[int, list[PassengerPath]], set[int]]:
    """One plain shortest path per OD pair, plus the set of unroutable OD indices."""
    columns: dict[int, list[PassengerPath]] = {}
    unroutable: set[int] = set()
    for k, od in enumerate(network.od_pairs):
        try:
            columns[k] = [shortest_path(network, od.origin, od.destination, od=k)]
        except NoPath:
            columns[k] = []
            unroutable.add(k)
    return columns, unroutable


def column_value(demand: float, cost: float, objective: str = "inverse_cost") -> float:
    """Objective coefficient of a path column."""
    if objective == "inverse_cost":
        return demand / cost
    if objective == "passengers":
        return demand
    raise ValueError(f"unknown objective {objective!r}")


def reduced_cost(
    network: ServiceNetwork, path: PassengerPath, duals: DualPrices, objective: str = "inverse_cost"
) -> float:
    d = network.od_pairs[path.od].demand
    lam = math.fsum(duals.lam(a) for a in path.arcs)
    return column_value(d, path.cost, objective) - duals.mu(path.od) - d * lam


def _supported_paths(network: ServiceNetwork, origin: str, destination: str, duals: DualPrices, max_probes: int):
    """Supported points of the (cost, dual length) front as (theta, stations) pairs."""
    cost = lambda a: network.arcs[a].arc_cost  # noqa: E731
    lam = duals.lam

    def measure(st):
        arcs = list(zip(st[:-1], st[1:]))
        return math.fsum(cost(a) for a in arcs), math.fsum(lam(a) for a in arcs)

    left = _lex_shortest(network, origin, destination, lambda a: (cost(a), lam(a)))
    if left is None:
        return []
    right = _lex_shortest(network, origin, destination, lambda a: (lam(a), cost(a)))
    found = [(0.0, left)]
    cl, ll = measure(left)
    cr, lr = measure(right)
    if right == left or (math.isclose(cl, cr, rel_tol=1e-12) and math.isclose(ll, lr, rel_tol=1e-12, abs_tol=1e-15)):
        return found
    found.append((math.inf, right))
    stack = [((cl, ll), (cr, lr))]
    probes = 0
    while stack and probes < max_probes:
        (c1, l1), (c2, l2) = stack.pop()
        if not (c2 > c1 and l1 > l2):
            continue
        theta = (c2 - c1) / (l1 - l2)
        probes += 1
        mid = _lex_shortest(network, origin, destination, lambda a: (cost(a) + theta * lam(a), cost(a)))
        cm, lm = measure(mid)
        if cm + theta * lm < c1 + theta * l1 - 1e-12 * max(1.0, c1 + theta * l1):
            found.append((theta, mid))
            stack.append(((cm, lm), (c2, l2)))
            stack.append(((c1, l1), (cm, lm)))
    return found


def price_paths(
    network: ServiceNetwork,
    duals: DualPrices,
    existing_columns: Mapping[int, Sequence[PassengerPath]],
    config: SolverConfig | None = None,
) -> dict[int, list[PassengerPath]]:
    """New columns with reduced cost above tolerance, at most a few per OD pair.

    Returns an empty mapping when no OD pair has an improving path.
    """
    config = config or SolverConfig()
    new: dict[int, list[PassengerPath]] = {}
    for k, od in enumerate(network.od_pairs):
        if od.demand <= 0:
            continue
        cols = existing_columns.get(k, ())
        have = {p.arcs for p in cols}
        picked = _price_od(network, k, duals, have, config)
        if picked:
            new[k] = picked
    return new


def _price_od(network, k, duals, have, config) -> list[PassengerPath]:
    od = network.od_pairs[k]
    tol = config.rc_tolerance
    supported = _supported_paths(network, od.origin, od.destination, duals, config.max_pricing_probes)
    if not supported:
        return []
    cap = math.inf
    if math.isfinite(config.detour_factor):
        base = shortest_path(network, od.origin, od.destination, od=k)
        cap = config.detour_factor * base.cost * (1 + 1e-12)

    scored = []
    for theta, st in supported:
        p = make_path(network, k, st)
        scored.append((reduced_cost(network, p, duals, config.objective), theta, p))
    scored.sort(key=lambda s: (-s[0], s[2].stations))
    best_rc, best_theta, best = scored[0]
    if best_rc <= tol or best.arcs in have:
        # the global maximiser is not improving, or is already priced in
        return []

    out = [p for rc, _, p in scored if rc > tol and p.cost <= cap and p.arcs not in have]
    if not out:
        # best point breaks the detour cap: look further down the ranking it came from
        cost = lambda a: network.arcs[a].arc_cost  # noqa: E731
        if math.isfinite(best_theta):
            wt = lambda a: (cost(a) + best_theta * duals.lam(a), cost(a))  # noqa: E731
        else:
            wt = lambda a: (duals.lam(a), cost(a))  # noqa: E731
        for st in _yen(network, od.origin, od.destination, config.k_shortest, wt):
            p = make_path(network, k, st)
            if p.cost <= cap and p.arcs not in have:
                rc = reduced_cost(network, p, duals, config.objective)
                if rc > tol:
                    out.append(p)
        out.sort(key=lambda p: (-reduced_cost(network, p, duals, config.objective), p.stations))
    # drop duplicates while keeping order
    uniq, seen = [], set()
    for p in out:
        if p.arcs not in seen:
            seen.add(p.arcs)
            uniq.append(p)
    return uniq[: config.columns_per_round]
