"""One test per acceptance criterion; the first docstring line is the
criterion as printed in the pass/fail summary."""
import math
import random
import time
from types import SimpleNamespace

import pytest
from conftest import DUALITY_TOL, FEAS_TOL, has_duals, network_from_arcs, weak_duality_gap

import railcap.oracle as oracle_mod
from railcap.assess import (
    DEFAULT_REGIMES,
    DEFAULT_SHARES,
    Scenario,
    allocate_train_loads,
    link_utilization,
    run_scenario,
    train_utilization,
)
from railcap.cli import main
from railcap.config import AssessConfig, SolverConfig
from railcap.fixtures import diamond, nl_mini, random_instance
from railcap.io import write_native
from railcap.network import (
    COVID_SEATS,
    NORMAL_SEATS,
    CapacityRegime,
    Link,
    ODPair,
    Station,
    Train,
    apply_capacity_regime,
    build_from_inputs,
    build_service_network,
    filter_demand,
    scale_demand,
)
from railcap.oracle import oracle_solve
from railcap.solver import check_feasibility, solve_with_column_generation

pytestmark = pytest.mark.acceptance

SEED = 20201
N_INSTANCES = 200
EXACT = SolverConfig(detour_factor=math.inf, max_rounds=1000)


def nl_curve(regime):
    return [run_scenario(nl_mini(), Scenario(a, regime)) for a in DEFAULT_SHARES]


@pytest.fixture(scope="module")
def nl_results():
    return {r: nl_curve(r) for r in DEFAULT_REGIMES}


def test_study_setup_constants():
    """Study setup: 1000/200 seats, shares 5-100%, demand > 100 (headline figures need proprietary data; not reproduced)"""
    assert (NORMAL_SEATS, COVID_SEATS) == (1000, 200)
    assert DEFAULT_SHARES == (0.05, 0.25, 0.5, 0.75, 1.0)
    assert AssessConfig().threshold == 100
    ods = (ODPair("A", "B", 100.0), ODPair("A", "C", 100.5))
    assert filter_demand(ods, 100) == ods[1:]


def test_oracle_equivalence():
    """Oracle equivalence: 200 seeded instances, |z_CG - z_oracle| <= 1e-6 max(1, z_oracle), under 60 s"""
    rng = random.Random(SEED)
    start = time.perf_counter()
    worst = 0.0
    nontrivial = 0
    for _ in range(N_INSTANCES):
        net = build_from_inputs(random_instance(rng, max_stations=8, max_arcs=14, max_ods=5))
        assert len(net.stations) <= 8 and len(net.arcs) <= 14 and len(net.od_pairs) <= 5
        z_cg = solve_with_column_generation(net, config=EXACT).solution.objective
        z_or = oracle_solve(net).objective
        worst = max(worst, abs(z_cg - z_or) / max(1.0, z_or))
        nontrivial += z_or > 0
    elapsed = time.perf_counter() - start
    print(f"oracle equivalence: worst relative gap {worst:.2e}, {nontrivial} non-zero instances, {elapsed:.1f} s")
    assert worst <= 1e-6
    assert nontrivial >= N_INSTANCES // 2
    assert elapsed <= 60


def test_feasibility_suite(every_solution_is_feasible):
    """Feasibility: share bounds, share sums, arc capacity within 1e-9 and weak duality within 1e-6 for every solution"""
    # the autouse fixture applies the same check to every FlowSolution of every test
    rng = random.Random(SEED + 1)
    for _ in range(150):
        solve_with_column_generation(build_from_inputs(random_instance(rng)), config=EXACT)
    for regime in DEFAULT_REGIMES:
        nl_curve(regime)
    solve_with_column_generation(build_from_inputs(diamond()))
    made = every_solution_is_feasible
    assert len(made) >= 150
    for sol in made:
        assert check_feasibility(sol, FEAS_TOL) == []
        if has_duals(sol):
            assert weak_duality_gap(sol) <= DUALITY_TOL


def test_nl_mini_concavity(nl_results):
    """Concavity: NL-mini z(alpha) non-decreasing and chord-concave per regime; covid transported <= normal"""
    inputs = nl_mini()
    ods = filter_demand(inputs.od_pairs, 100)
    assert len(inputs.stations) == 12 and 16 <= len({l.key for l in inputs.links}) <= 24 and 8 <= len(ods) <= 12
    covid = apply_capacity_regime(inputs.trains, CapacityRegime.parse("covid"))
    flooded = tuple(ODPair(o.origin, o.destination, 100 * o.demand) for o in ods)
    saturated = solve_with_column_generation(build_service_network(inputs.stations, inputs.links, covid, flooded))
    ratio = math.fsum(o.demand for o in ods) / saturated.solution.transported
    assert 1.5 <= ratio <= 2.5, ratio
    for regime, results in nl_results.items():
        z = [r.objective for r in results]
        tol = 1e-9 * max(z)
        assert all(b >= a - tol for a, b in zip(z, z[1:])), regime
        xs = DEFAULT_SHARES
        # chord test: every interior point lies on or above the chord of its neighbours
        for i in range(1, len(xs) - 1):
            t = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1])
            assert z[i] >= (1 - t) * z[i - 1] + t * z[i + 1] - tol, (regime, xs[i])
    for c, n in zip(nl_results["covid"], nl_results["normal"]):
        assert c.transported <= n.transported + 1e-9 * n.transported


def test_nl_mini_qualitative(nl_results, monkeypatch):
    """Qualitative: NL-mini serves >= 99% at 5%, covid unserved grows 25% -> 100%, covid trains >= 0.9 full exceed normal"""
    # the fixture exceeds the oracle's size guard; its path set is small, so lift the guard here
    monkeypatch.setattr(oracle_mod, "MAX_STATIONS", 12)
    monkeypatch.setattr(oracle_mod, "MAX_ARCS", 24)
    for results in nl_results.values():
        for r in results:
            z = oracle_solve(r.network).objective
            assert abs(r.objective - z) <= 1e-6 * max(1.0, z), r.label
    normal, covid = nl_results["normal"], nl_results["covid"]
    assert 1 - normal[0].unserved_fraction >= 0.99
    assert 1 - covid[0].unserved_fraction >= 0.99
    assert covid[-1].unserved_fraction > covid[1].unserved_fraction
    assert covid[-1].train_stats.frac_max_ge_090 > normal[-1].train_stats.frac_max_ge_090
    print(
        "NL-mini covid unserved by share:",
        " ".join(f"{r.demand_share:.2f}:{r.unserved_fraction:.3f}" for r in covid),
        f"| trains >= 0.9 at 100%: covid {covid[-1].train_stats.frac_max_ge_090:.3f}"
        f" normal {normal[-1].train_stats.frac_max_ge_090:.3f}",
    )


def test_metric_fixtures():
    """Metric fixtures: hand-computed link and train utilization examples exact; allocation conserves every arc load"""
    net = network_from_arcs({("A", "B"): 5, ("B", "C"): 5, ("C", "D"): 5}, seats=200)
    util, s = link_utilization(SimpleNamespace(arc_loads={("A", "B"): 100.0}), net)
    assert util[("A", "B")] == 0.5
    _, s = link_utilization(SimpleNamespace(arc_loads={("A", "B"): 0.0, ("B", "C"): 100.0, ("C", "D"): 200.0}), net)
    assert (s.mean, s.median) == (0.5, 0.5) and round(s.std, 4) == 0.4082
    _, s = link_utilization(SimpleNamespace(arc_loads={a: 200.0 for a in net.arcs}), net)
    assert s.frac_full == 1.0

    def shared(seats):
        trains = [Train.through(f"T{i}", ["A", "B"], [5], n) for i, n in enumerate(seats)]
        return build_service_network([Station("A", ""), Station("B", "")], [Link("A", "B")], trains, [])

    def on_ab(x):
        return SimpleNamespace(arc_loads={("A", "B"): x})

    assert allocate_train_loads(on_ab(150.0), shared([1000])) == {"T0": [150.0]}
    assert allocate_train_loads(on_ab(400.0), shared([200, 600])) == {"T0": [100.0], "T1": [300.0]}
    assert allocate_train_loads(on_ab(0.0), shared([200, 600])) == {"T0": [0.0], "T1": [0.0]}
    t = Train.through("T", ["A", "B", "C", "D"], [1, 1, 1], 200)
    assert train_utilization({"T": [100.0, 200.0, 150.0]}, [t])[0]["T"] == (0.75, 1.0)
    assert train_utilization({"T": [0.0, 0.0, 0.0]}, [t])[0]["T"] == (0.0, 0.0)

    rng = random.Random(SEED + 2)
    for _ in range(100):
        inputs = random_instance(rng)
        for policy in ("proportional", "equal"):
            r = run_scenario(inputs, Scenario(1.0, "scale=1"), AssessConfig(threshold=0, allocation=policy))
            per_train = allocate_train_loads(r.solution, r.network, policy)
            for key, arc in r.network.arcs.items():
                parts = [per_train[tid][r.network.trains[tid].route.index(key)] for tid in arc.serving_trains]
                assert math.fsum(parts) == r.solution.arc_loads.get(key, 0.0)
            if policy == "proportional":
                assert all(mx <= 1 + 1e-9 for _, mx in r.train_utilization.values())


def test_sweep_determinism(tmp_path, capsys):
    """Determinism: two cmd_sweep runs with identical config give byte-identical outputs"""
    model = write_native(nl_mini(), tmp_path / "model")
    outs = []
    for name, jobs in (("first", "1"), ("second", "2")):
        assert main(["sweep", "--input", str(model), "--out", str(tmp_path / name), "--jobs", jobs]) == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]
    files = sorted(p.name for p in (tmp_path / "first").iterdir())
    assert files == sorted(p.name for p in (tmp_path / "second").iterdir())
    assert "results.csv" in files and len(files) == 22
    for name in files:
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()
