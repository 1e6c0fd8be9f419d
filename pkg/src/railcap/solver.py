"""Restricted master problem and the column-generation loop.

The master maximises sum_k sum_p w_p f_p^k subject to

    sum_p f_p^k <= 1                                   for every OD pair k
    sum_k sum_p [a in p] d_k f_p^k <= seat_capacity_a  for every service arc a
    f >= 0

where ``w_p = d_k / c_p`` (or ``d_k`` with the ``passengers`` objective).
The upper bound f <= 1 follows from the share rows.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from railcap.config import SolverConfig
from railcap.lp import solve_packing_lp
from railcap.network import Arc, ODPair, ServiceNetwork
from railcap.paths import DualPrices, PassengerPath, column_value, initial_columns, price_paths

log = logging.getLogger(__name__)


@dataclass
class MasterProblem:
    columns: dict[int, list[PassengerPath]]
    arc_capacities: dict[Arc, float]
    demands: dict[int, float]

    def __post_init__(self):
        for k, cols in self.columns.items():
            for p in cols:
                missing = [a for a in p.arcs if a not in self.arc_capacities]
                if missing:
                    raise ValueError(f"column of OD {k} uses arc {missing[0]} with no capacity")
        if any(d < 0 for d in self.demands.values()):
            raise ValueError("demands must be non-negative")
        if any(c < 0 for c in self.arc_capacities.values()):
            raise ValueError("capacities must be non-negative")

    @classmethod
    def from_network(cls, network: ServiceNetwork, columns: Mapping[int, Sequence[PassengerPath]]) -> "MasterProblem":
        return cls(
            {k: list(v) for k, v in columns.items()},
            {key: float(arc.seat_capacity) for key, arc in network.arcs.items()},
            {k: od.demand for k, od in enumerate(network.od_pairs)},
        )


@dataclass
class FlowSolution:
    columns: dict[int, list[PassengerPath]]
    shares: dict[tuple[int, int], float]  # (k, column index) -> f
    objective: float
    duals: DualPrices
    arc_loads: dict[Arc, float]
    demands: dict[int, float]
    arc_capacities: dict[Arc, float] = field(default_factory=dict)

    @property
    def transported(self) -> float:
        return math.fsum(self.demands[k] * f for (k, _), f in self.shares.items())

    def share_sum(self, k: int) -> float:
        return math.fsum(f for (kk, _), f in self.shares.items() if kk == k)

    def flows(self):
        """Yield (path, share) for every column, in (k, insertion) order."""
        for k in sorted(self.columns):
            for i, p in enumerate(self.columns[k]):
                yield p, self.shares.get((k, i), 0.0)

    def recompute_loads(self) -> dict[Arc, float]:
        parts: dict[Arc, list[float]] = {a: [] for a in self.arc_capacities}
        for p, f in self.flows():
            for a in p.arcs:
                parts.setdefault(a, []).append(self.demands[p.od] * f)
        return {a: math.fsum(v) for a, v in parts.items()}

    def dual_bound(self) -> float:
        return math.fsum(
            [self.duals.mu(k) for k in self.demands]
            + [self.duals.lam(a) * cap for a, cap in self.arc_capacities.items()]
        )


def solve_master(problem: MasterProblem, config: SolverConfig | None = None) -> FlowSolution:
    """Optimal shares and duals for the current column set."""
    config = config or SolverConfig()
    arcs = sorted(problem.arc_capacities)
    arc_row = {a: i for i, a in enumerate(arcs)}
    live = []  # (k, i, path)
    for k in sorted(problem.columns):
        if problem.demands.get(k, 0.0) <= 0:
            continue
        for i, p in enumerate(problem.columns[k]):
            live.append((k, i, p))
    ods = sorted({k for k, _, _ in live})
    od_row = {k: i for i, k in enumerate(ods)}

    shares = {(k, i): 0.0 for k in problem.columns for i in range(len(problem.columns[k]))}
    if not live:
        return FlowSolution(
            {k: list(v) for k, v in problem.columns.items()},
            shares,
            0.0,
            DualPrices({}, {a: 0.0 for a in arcs}),
            {a: 0.0 for a in arcs},
            dict(problem.demands),
            dict(problem.arc_capacities),
        )

    m = len(ods) + len(arcs)
    A = np.zeros((m, len(live)))
    c = np.zeros(len(live))
    for j, (k, _, p) in enumerate(live):
        d = problem.demands[k]
        c[j] = column_value(d, p.cost, config.objective)
        A[od_row[k], j] = 1.0
        for a in p.arcs:
            A[len(ods) + arc_row[a], j] += d
    b = np.concatenate([np.ones(len(ods)), [problem.arc_capacities[a] for a in arcs]])

    res = solve_packing_lp(c, A, b, tol=config.lp_tolerance, max_iter=config.max_lp_iterations)
    for j, (k, i, _) in enumerate(live):
        shares[(k, i)] = min(1.0, float(res.x[j]))
    duals = DualPrices(
        {k: float(res.duals[od_row[k]]) for k in ods},
        {a: float(res.duals[len(ods) + arc_row[a]]) for a in arcs},
    )
    sol = FlowSolution(
        {k: list(v) for k, v in problem.columns.items()},
        shares,
        0.0,
        duals,
        {},
        dict(problem.demands),
        dict(problem.arc_capacities),
    )
    sol.arc_loads = sol.recompute_loads()
    sol.objective = math.fsum(
        column_value(problem.demands[p.od], p.cost, config.objective) * f
        for p, f in sol.flows()
        if problem.demands[p.od] > 0
    )
    return sol


@dataclass
class RoundRecord:
    round: int
    objective: float
    columns_added: int
    total_columns: int


@dataclass
class CGResult:
    solution: FlowSolution
    trace: list[RoundRecord]
    unroutable: set[int]
    warnings: list[str] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return not any(w.startswith("RoundBudgetExhausted") for w in self.warnings)


def solve_with_column_generation(
    network: ServiceNetwork,
    od_pairs: Sequence[ODPair] | None = None,
    config: SolverConfig | None = None,
) -> CGResult:
    """Alternate master solves and pricing until no improving path remains."""
    config = config or SolverConfig()
    if od_pairs is not None and tuple(od_pairs) != network.od_pairs:
        from dataclasses import replace

        network = replace(network, od_pairs=tuple(sorted(od_pairs, key=lambda o: (o.origin, o.destination))))
    columns, unroutable = initial_columns(network)
    trace: list[RoundRecord] = []
    warnings: list[str] = []
    for rnd in range(1, config.max_rounds + 1):
        sol = solve_master(MasterProblem.from_network(network, columns), config)
        new = price_paths(network, sol.duals, columns, config)
        added = sum(len(v) for v in new.values())
        for k in sorted(new):
            columns[k].extend(new[k])
        trace.append(RoundRecord(rnd, sol.objective, added, sum(len(v) for v in columns.values())))
        log.debug("round %d: objective %.6f, %d column(s) added", rnd, sol.objective, added)
        if not added:
            return CGResult(sol, trace, unroutable, warnings)
    # the last round added columns that were never solved; include them
    sol = solve_master(MasterProblem.from_network(network, columns), config)
    trace.append(RoundRecord(config.max_rounds + 1, sol.objective, 0, sum(len(v) for v in columns.values())))
    warnings.append(f"RoundBudgetExhausted: stopped after {config.max_rounds} pricing rounds")
    log.warning(warnings[-1])
    return CGResult(sol, trace, unroutable, warnings)


def check_feasibility(sol: FlowSolution, rel_tol: float = 1e-9) -> list[str]:
    """Return a description of every violated solution invariant (empty if clean)."""
    problems = []
    for (k, i), f in sol.shares.items():
        if not (0.0 <= f <= 1.0):
            problems.append(f"share ({k},{i}) = {f} outside [0, 1]")
    for k in sol.columns:
        s = sol.share_sum(k)
        if s > 1 + rel_tol:
            problems.append(f"OD {k} shares sum to {s}")
    for a, cap in sol.arc_capacities.items():
        load = sol.arc_loads.get(a, 0.0)
        if cap - load < -rel_tol * max(1.0, cap):
            problems.append(f"arc {a} load {load} > capacity {cap}")
    again = sol.recompute_loads()
    for a, load in again.items():
        if abs(load - sol.arc_loads.get(a, 0.0)) > rel_tol * max(1.0, load):
            problems.append(f"arc {a} stored load disagrees with shares")
    return problems
