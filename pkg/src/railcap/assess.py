"""Demand-share x capacity-regime scenarios and their utilization metrics."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from railcap.config import AssessConfig
from railcap.errors import RailcapError, ScenarioError, UnknownPolicy
from railcap.network import (
    Arc,
    CapacityRegime,
    ModelInputs,
    ServiceNetwork,
    Train,
    apply_capacity_regime,
    build_service_network,
    filter_demand,
    scale_demand,
)
from railcap.solver import FlowSolution, solve_with_column_generation

log = logging.getLogger(__name__)

FULL_TOL = 1e-9
HIGH_UTIL = 0.9
DEFAULT_SHARES = (0.05, 0.25, 0.5, 0.75, 1.0)
DEFAULT_REGIMES = ("normal", "covid")


@dataclass(frozen=True)
class Scenario:
    demand_share: float
    regime: CapacityRegime
    label: str = ""

    def __post_init__(self):
        if not 0 <= self.demand_share <= 1:
            raise ValueError(f"demand share {self.demand_share} outside [0, 1]")
        if isinstance(self.regime, str):
            object.__setattr__(self, "regime", CapacityRegime.parse(self.regime))
        if not self.label:
            object.__setattr__(self, "label", f"{self.regime.label}-{self.demand_share:.2f}")


@dataclass(frozen=True)
class Stats:
    mean: float
    median: float
    std: float
    q25: float
    q75: float
    count: int

    @classmethod
    def of(cls, values: Sequence[float]) -> "Stats":
        """Population std; median and quartiles take the lower order statistic."""
        if len(values) == 0:
            nan = float("nan")
            return cls(nan, nan, nan, nan, nan, 0)
        v = np.asarray(values, dtype=float)
        q = np.quantile(v, [0.25, 0.5, 0.75], method="lower")
        return cls(math.fsum(values) / len(v), float(q[1]), float(v.std()), float(q[0]), float(q[2]), len(v))


@dataclass(frozen=True)
class LinkStats:
    mean: float
    median: float
    std: float
    frac_full: float
    frac_ge_090: float


@dataclass(frozen=True)
class TrainStats:
    avg_util: Stats
    max_util: Stats
    frac_max_ge_090: float
    zero_seat_trains: int


@dataclass
class ScenarioResult:
    label: str
    regime: str
    demand_share: float
    offered: float
    transported: float
    unserved_fraction: float
    objective: float
    link_stats: LinkStats
    train_stats: TrainStats
    arc_utilization: dict[Arc, float] = field(default_factory=dict)
    train_utilization: dict[str, tuple[float, float]] = field(default_factory=dict)
    solution: FlowSolution | None = None
    network: ServiceNetwork | None = None
    rounds: int = 0
    warnings: list[str] = field(default_factory=list)


# ---------------------------------------------------------------- metrics


def link_utilization(solution: FlowSolution, network: ServiceNetwork) -> tuple[dict[Arc, float], LinkStats]:
    util = {}
    for key, arc in network.arcs.items():
        load = solution.arc_loads.get(key, 0.0)
        util[key] = load / arc.seat_capacity if arc.seat_capacity > 0 else 0.0
    return util, link_stats(list(util.values()))


def link_stats(values: Sequence[float]) -> LinkStats:
    s = Stats.of(values)
    n = len(values)
    full = sum(1 for u in values if u >= 1 - FULL_TOL)
    high = sum(1 for u in values if u >= HIGH_UTIL - FULL_TOL)
    return LinkStats(s.mean, s.median, s.std, full / n if n else 0.0, high / n if n else 0.0)


def _split(load: float, weights: Sequence[float], order: Sequence[int]) -> list[float]:
    """Split ``load`` by ``weights`` so the parts sum back to ``load`` exactly.

    Every part except ``order[0]`` (the heaviest) is floored to a multiple of
    ulp(load); then their sum and the remainder are exact in floating point,
    and the remainder is non-negative.
    """
    total = math.fsum(weights)
    parts = [0.0] * len(weights)
    if load == 0 or total == 0:
        return parts
    q = math.ulp(load)
    head = order[0]
    for i, w in enumerate(weights):
        if i != head:
            parts[i] = math.floor(load * w / total / q) * q
    parts[head] = load - math.fsum(parts)
    return parts


def allocate_train_loads(
    solution: FlowSolution, network: ServiceNetwork, policy: str = "proportional"
) -> dict[str, list[float]]:
    """Per-train load on each link of its route.

    ``proportional`` splits an arc's load by seats, ``equal`` splits it evenly
    among the serving trains.
    """
    if policy not in ("proportional", "equal"):
        raise UnknownPolicy(f"unknown allocation policy {policy!r}")
    per_arc: dict[Arc, dict[str, float]] = {}
    for key, arc in network.arcs.items():
        trains = [network.trains[t] for t in arc.serving_trains]
        if policy == "proportional":
            weights = [float(t.seats) for t in trains]
        else:
            weights = [1.0] * len(trains)
        order = sorted(range(len(trains)), key=lambda i: (-weights[i], trains[i].id))
        parts = _split(solution.arc_loads.get(key, 0.0), weights, order)
        if policy == "proportional" and not any(weights) and solution.arc_loads.get(key, 0.0) > 0:
            parts = _split(solution.arc_loads[key], [1.0] * len(trains), order)
        per_arc[key] = {t.id: p for t, p in zip(trains, parts)}
    return {
        tid: [per_arc[a][tid] for a in train.route]
        for tid, train in sorted(network.trains.items())
    }


def train_utilization(
    train_loads: Mapping[str, Sequence[float]], trains: Mapping[str, Train] | Iterable[Train]
) -> tuple[dict[str, tuple[float, float]], TrainStats]:
    """(average, maximum) load/seats per train over its route links.

    Zero-seat trains have no defined utilization; they are left out and counted.
    """
    if not isinstance(trains, Mapping):
        trains = {t.id: t for t in trains}
    util = {}
    zero = 0
    for tid in sorted(train_loads):
        seats = trains[tid].seats
        loads = train_loads[tid]
        if seats <= 0:
            zero += 1
            continue
        ratios = [x / seats for x in loads]
        util[tid] = (math.fsum(ratios) / len(ratios) if ratios else 0.0, max(ratios, default=0.0))
    avg = [u[0] for u in util.values()]
    mx = [u[1] for u in util.values()]
    high = sum(1 for v in mx if v >= HIGH_UTIL - FULL_TOL)
    return util, TrainStats(Stats.of(avg), Stats.of(mx), high / len(mx) if mx else 0.0, zero)


# ---------------------------------------------------------------- scenarios


def run_scenario(inputs: ModelInputs, scenario: Scenario, config: AssessConfig | None = None) -> ScenarioResult:
    """Scale demand, apply the seat regime, solve and measure one scenario."""
    config = config or AssessConfig()
    try:
        ods = scale_demand(filter_demand(inputs.od_pairs, config.threshold), scenario.demand_share)
        trains = apply_capacity_regime(inputs.trains, scenario.regime)
        network = build_service_network(inputs.stations, inputs.links, trains, ods)
        cg = solve_with_column_generation(network, config=config.solver)
        sol = cg.solution
        arc_util, lstats = link_utilization(sol, network)
        loads = allocate_train_loads(sol, network, config.allocation)
        train_util, tstats = train_utilization(loads, network.trains)
    except RailcapError as exc:
        raise ScenarioError(scenario.label, exc) from exc

    offered = math.fsum(od.demand for od in network.od_pairs)
    transported = sol.transported
    unserved = max(0.0, 1.0 - transported / offered) if offered > 0 else 0.0
    log.info("%s: transported %.1f of %.1f", scenario.label, transported, offered)
    return ScenarioResult(
        label=scenario.label,
        regime=scenario.regime.label,
        demand_share=scenario.demand_share,
        offered=offered,
        transported=transported,
        unserved_fraction=unserved,
        objective=sol.objective,
        link_stats=lstats,
        train_stats=tstats,
        arc_utilization=arc_util,
        train_utilization=train_util,
        solution=sol,
        network=network,
        rounds=len(cg.trace),
        warnings=list(cg.warnings),
    )


def scenario_grid(shares: Sequence[float] = DEFAULT_SHARES, regimes: Sequence = DEFAULT_REGIMES) -> list[Scenario]:
    """Regime-major grid, shares ascending within each regime."""
    out = []
    for r in regimes:
        regime = CapacityRegime.parse(r) if isinstance(r, str) else r
        for s in shares:
            out.append(Scenario(s, regime))
    return out


def _run(args):
    return run_scenario(*args)


def run_sweep(
    inputs: ModelInputs,
    scenarios: Sequence[Scenario],
    config: AssessConfig | None = None,
    jobs: int = 1,
) -> list[ScenarioResult]:
    """Results come back in the order of ``scenarios`` whatever ``jobs`` is."""
    config = config or AssessConfig()
    work = [(inputs, sc, config) for sc in scenarios]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run, work))
    return [_run(w) for w in work]
