import math

import pytest
from hypothesis import HealthCheck, settings

from railcap.network import Link, ODPair, Station, Train, build_service_network
from railcap.solver import FlowSolution, check_feasibility

settings.register_profile(
    "railcap", deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture]
)
settings.load_profile("railcap")

FEAS_TOL = 1e-9
DUALITY_TOL = 1e-6


def network_from_arcs(arcs, ods=(), seats=100):
    """One single-link train per arc; ``arcs`` maps (a, b) -> minutes."""
    ids = sorted({s for a in arcs for s in a} | {s for od in ods for s in od[:2]})
    trains = [Train.through(f"T{a}{b}", [a, b], [t], seats) for (a, b), t in sorted(arcs.items())]
    return build_service_network(
        [Station(s, s) for s in ids],
        [Link(a, b) for a, b in arcs],
        trains,
        [ODPair(*od) for od in ods],
    )


def weak_duality_gap(sol: FlowSolution) -> float:
    return sol.objective - sol.dual_bound()


def has_duals(sol: FlowSolution) -> bool:
    return bool(sol.duals.od_duals) or bool(sol.duals.arc_duals)


@pytest.fixture(autouse=True)
def every_solution_is_feasible(monkeypatch):
    """Check share bounds, share sums, arc capacity and weak duality for every
    FlowSolution built during a test.  Hand-made solutions without duals skip
    the duality check."""
    made = []
    original = FlowSolution.__init__

    def recording_init(self, *args, **kwargs):
        original(self, *args, **kwargs)
        made.append(self)

    monkeypatch.setattr(FlowSolution, "__init__", recording_init)
    yield made
    for sol in made:
        assert check_feasibility(sol, FEAS_TOL) == []
        if has_duals(sol):
            assert weak_duality_gap(sol) <= DUALITY_TOL, "weak duality violated"


# ---------------------------------------------------------------- acceptance reporting

_acceptance = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if "test_acceptance" in item.nodeid and (rep.when == "call" or (rep.when == "setup" and rep.failed)):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        _acceptance.append(("PASS" if rep.passed else "FAIL", doc))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for status, doc in _acceptance:
        terminalreporter.write_line(f"{status}  {doc}")


def isclose(a, b, tol=1e-9):
    return math.isclose(a, b, rel_tol=tol, abs_tol=tol)
