import math
from fractions import Fraction
import random
from types import SimpleNamespace

import pytest
from conftest import network_from_arcs
from hypothesis import given, settings
from hypothesis import strategies as st

from railcap.assess import (
    Scenario,
    Stats,
    allocate_train_loads,
    link_utilization,
    run_scenario,
    run_sweep,
    scenario_grid,
    train_utilization,
)
from railcap.config import AssessConfig, SolverConfig
from railcap.errors import ScenarioError, UnknownPolicy
from railcap.fixtures import diamond, line, nl_mini, random_instance
from railcap.network import Link, ModelInputs, ODPair, Station, Train, build_from_inputs, build_service_network


def loads(**by_arc):
    """Stand-in solution: only arc loads matter to the metrics."""
    return SimpleNamespace(arc_loads={tuple(k): v for k, v in by_arc.items()})


def test_single_link_utilization():
    net = network_from_arcs({("A", "B"): 5}, seats=200)
    util, _ = link_utilization(loads(AB=100.0), net)
    assert util[("A", "B")] == 0.5


def test_link_statistics():
    net = network_from_arcs({("A", "B"): 5, ("B", "C"): 5, ("C", "D"): 5}, seats=200)
    _, s = link_utilization(loads(AB=0.0, BC=100.0, CD=200.0), net)
    assert s.mean == 0.5
    assert s.median == 0.5
    assert s.std == pytest.approx(math.sqrt(1 / 6), abs=1e-12)
    assert round(s.std, 4) == 0.4082
    assert s.frac_full == pytest.approx(1 / 3)


def test_all_full():
    net = network_from_arcs({("A", "B"): 5, ("B", "C"): 5}, seats=200)
    _, s = link_utilization(loads(AB=200.0, BC=200.0), net)
    assert s.frac_full == 1.0 and s.frac_ge_090 == 1.0


def test_median_takes_lower_middle():
    assert Stats.of([0.1, 0.2, 0.3, 0.4]).median == 0.2
    assert math.isnan(Stats.of([]).mean)


def _shared_arc(seats):
    trains = [Train.through(f"T{i}", ["A", "B"], [5], s) for i, s in enumerate(seats)]
    return build_service_network([Station("A", "A"), Station("B", "B")], [Link("A", "B")], trains, [])


def test_one_train_carries_the_arc_load():
    assert allocate_train_loads(loads(AB=150.0), _shared_arc([1000])) == {"T0": [150.0]}


def test_proportional_split():
    assert allocate_train_loads(loads(AB=400.0), _shared_arc([200, 600])) == {"T0": [100.0], "T1": [300.0]}


def test_equal_split():
    assert allocate_train_loads(loads(AB=400.0), _shared_arc([200, 600]), "equal") == {"T0": [200.0], "T1": [200.0]}


def test_zero_load():
    assert allocate_train_loads(loads(AB=0.0), _shared_arc([200, 600])) == {"T0": [0.0], "T1": [0.0]}


def test_unknown_policy():
    with pytest.raises(UnknownPolicy):
        allocate_train_loads(loads(AB=0.0), _shared_arc([200]), "busiest")


def test_train_utilization_example():
    t = Train.through("T", ["A", "B", "C", "D"], [1, 1, 1], 200)
    util, stats = train_utilization({"T": [100.0, 200.0, 150.0]}, [t])
    assert util["T"] == (0.75, 1.0)
    assert stats.frac_max_ge_090 == 1.0


def test_empty_train():
    t = Train.through("T", ["A", "B"], [1], 200)
    util, _ = train_utilization({"T": [0.0]}, [t])
    assert util["T"] == (0.0, 0.0)


def test_zero_seat_trains_are_left_out():
    trains = [Train.through("T0", ["A", "B"], [1], 0), Train.through("T1", ["A", "B"], [1], 100)]
    util, stats = train_utilization({"T0": [0.0], "T1": [50.0]}, trains)
    assert list(util) == ["T1"]
    assert stats.zero_seat_trains == 1


@settings(max_examples=60)
@given(st.integers(0, 100_000), st.sampled_from(["proportional", "equal"]))
def test_allocation_conserves_arc_load(seed, policy):
    net = build_from_inputs(random_instance(random.Random(seed)))
    rng = random.Random(seed)
    sol = SimpleNamespace(arc_loads={a: rng.choice([0.0, 1 / 3, 97.1, 1e-7, 12345.6789]) for a in net.arcs})
    per_train = allocate_train_loads(sol, net, policy)
    for key, arc in net.arcs.items():
        parts = [per_train[t][net.trains[t].route.index(key)] for t in arc.serving_trains]
        assert math.fsum(parts) == sol.arc_loads[key]
        assert all(p >= 0 for p in parts)


@settings(max_examples=40)
@given(st.integers(0, 100_000))
def test_proportional_max_util_within_seats(seed):
    inputs = random_instance(random.Random(seed))
    res = run_scenario(inputs, Scenario(1.0, "scale=1"), AssessConfig(threshold=0))
    assert all(mx <= 1 + 1e-9 for _, mx in res.train_utilization.values())


def test_zero_share_scenario():
    res = run_scenario(nl_mini(), Scenario(0.0, "covid"))
    assert res.transported == 0 and res.unserved_fraction == 0
    assert all(u == 0 for u in res.arc_utilization.values())
    assert all(u == (0.0, 0.0) for u in res.train_utilization.values())


def test_covid_bottleneck_leaves_demand_unserved():
    # 200 covid seats on the only route against demand 300
    res = run_scenario(line(seats=1000, demand=300.0), Scenario(1.0, "covid"))
    assert res.transported == pytest.approx(200)
    assert res.unserved_fraction == pytest.approx(1 / 3)


def test_threshold_filter_is_strict():
    res = run_scenario(line(demand=100.0), Scenario(1.0, "normal"))
    assert res.offered == 0 and res.unserved_fraction == 0


def test_grid_order_and_labels():
    grid = scenario_grid()
    assert len(grid) == 10
    assert [s.label for s in grid[:2]] == ["normal-0.05", "normal-0.25"]
    assert grid[5].label == "covid-0.05"


def test_sweep_parallel_matches_serial():
    grid = scenario_grid((0.5, 1.0))
    a = run_sweep(nl_mini(), grid, jobs=1)
    b = run_sweep(nl_mini(), grid, jobs=2)
    assert [r.label for r in a] == [r.label for r in b]
    assert [r.objective for r in a] == [r.objective for r in b]
    assert [r.arc_utilization for r in a] == [r.arc_utilization for r in b]


def test_scenario_error_carries_label():
    inputs = diamond()
    bad = ModelInputs(inputs.stations, inputs.links, inputs.trains, (ODPair("A", "Z", 500.0),))
    with pytest.raises(ScenarioError) as err:
        run_scenario(bad, Scenario(1.0, "normal"))
    assert err.value.label == "normal-1.00"
    assert err.value.kind == "data"


def test_covid_never_beats_normal_on_nl_mini():
    for a in (0.05, 0.25, 0.5, 0.75, 1.0):
        cov = run_scenario(nl_mini(), Scenario(a, "covid"))
        nor = run_scenario(nl_mini(), Scenario(a, "normal"))
        assert cov.transported <= nor.transported + 1e-9 * max(1.0, nor.transported)


def test_detour_setting_reaches_solver():
    cfg = AssessConfig(solver=SolverConfig(detour_factor=1.0))
    res = run_scenario(diamond(), Scenario(1.0, "seats=100"), cfg)
    assert res.transported == pytest.approx(100)  # only the bottom route is admissible


@given(
    st.floats(0, 1e7, allow_nan=False, allow_subnormal=False),
    st.lists(st.integers(0, 2000), min_size=1, max_size=6),
)
def test_split_is_exact_for_any_load(load, seats):
    net = _shared_arc(seats)
    per_train = allocate_train_loads(loads(AB=load), net)
    parts = [p for (v,) in per_train.values() for p in [v]]
    assert sum(Fraction(p) for p in parts) == Fraction(load)
    assert all(p >= 0 for p in parts)
