import shutil
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from railcap.errors import DanglingReference, DuplicateId, NonMonotoneStopTimes, ParseError
from railcap.io import parse_clock, parse_window, read_gtfs_lite, read_native, write_native
from railcap.network import Link, ModelInputs, ODPair, Station, Train, build_from_inputs

THREE = Path(__file__).parent / "data" / "three_station"


@pytest.fixture
def three(tmp_path):
    d = tmp_path / "model"
    shutil.copytree(THREE, d)
    return d


def test_three_station_fixture():
    m = read_native(THREE)
    assert [s.id for s in m.stations] == ["A", "B", "C"]
    assert [(l.source, l.target, l.infra_capacity) for l in m.links] == [("A", "B", 4), ("B", "C", None)]
    ic1 = m.trains[0]
    assert ic1.route == (("A", "B"), ("B", "C")) and ic1.travel_times == (10.0, 12.0)
    assert m.trains[1].travel_times == (9.0, 13.0)
    net = build_from_inputs(m)
    assert net.arcs[("A", "B")].seat_capacity == 1000
    assert net.arcs[("A", "B")].arc_cost == 9.5


def test_unknown_station_in_demand(three):
    with open(three / "demand.csv", "a") as fh:
        fh.write("A,Z,10\n")
    with pytest.raises(DanglingReference) as err:
        read_native(three)
    assert err.value.line == 5
    assert "demand.csv:5" in str(err.value)


def test_duplicate_train_id(three):
    with open(three / "trains.csv", "a") as fh:
        fh.write("IC1,100\n")
    with pytest.raises(DuplicateId):
        read_native(three)


def test_bad_number_has_column(three):
    (three / "trains.csv").write_text("id,seats\nIC1,many\nIC2,600\n")
    with pytest.raises(ParseError) as err:
        read_native(three)
    assert err.value.line == 2 and err.value.column == "seats"


def test_missing_file(three):
    (three / "links.csv").unlink()
    with pytest.raises(ParseError):
        read_native(three)


def test_going_backwards_in_time(three):
    text = (three / "train_stops.csv").read_text().replace("IC1,3,C,23,", "IC1,3,C,9,")
    (three / "train_stops.csv").write_text(text)
    with pytest.raises(NonMonotoneStopTimes):
        read_native(three)


def test_undefined_link(three):
    (three / "links.csv").write_text("from,to,infra_capacity\nA,B,\n")
    with pytest.raises(DanglingReference):
        read_native(three)


ids = st.sampled_from(["A", "B", "C", "D", "E"])


@st.composite
def models(draw):
    stations = [Station(s, f"station {s}") for s in "ABCDE"]
    links = {}
    trains = []
    for i in range(draw(st.integers(0, 4))):
        path = draw(st.lists(ids, min_size=2, max_size=5, unique=True))
        times = draw(
            st.lists(
                st.one_of(st.integers(1, 90).map(float), st.sampled_from([0.5, 2.25, 7.125, 1 / 3, 0.1])),
                min_size=len(path) - 1,
                max_size=len(path) - 1,
            )
        )
        for a, b in zip(path, path[1:]):
            links.setdefault((a, b), draw(st.one_of(st.none(), st.integers(0, 9))))
        trains.append(Train.through(f"T{i}", path, times, draw(st.integers(0, 2000))))
    ods = {}
    for o, d in draw(st.lists(st.tuples(ids, ids).filter(lambda t: t[0] != t[1]), max_size=6)):
        ods[(o, d)] = draw(st.one_of(st.integers(0, 5000).map(float), st.floats(0, 1e4, allow_nan=False)))
    return ModelInputs(
        tuple(stations),
        tuple(Link(a, b, c) for (a, b), c in links.items()),
        tuple(trains),
        tuple(ODPair(o, d, v) for (o, d), v in ods.items()),
    )


@given(models())
def test_native_round_trip(tmp_path_factory, model):
    d = tmp_path_factory.mktemp("rt")
    write_native(model, d)
    again = read_native(d)
    assert again == model


# ---------------------------------------------------------------- GTFS-lite


def _gtfs(tmp_path, stop_times, trips="trip_id\nt1\n"):
    (tmp_path / "stops.txt").write_text("stop_id,stop_name\nA,Alpha\nB,Bravo\nC,Charlie\n")
    (tmp_path / "trips.txt").write_text(trips)
    (tmp_path / "stop_times.txt").write_text(
        "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n" + stop_times
    )
    return tmp_path


def test_gtfs_trip_in_window(tmp_path):
    d = _gtfs(tmp_path, "t1,08:00:00,08:00:00,A,1\nt1,08:10:00,08:10:00,B,2\nt1,08:24:00,08:24:00,C,3\n")
    m = read_gtfs_lite(d, "08:00-09:00")
    (t,) = m.trains
    assert t.route == (("A", "B"), ("B", "C"))
    assert t.travel_times == (10.0, 14.0)
    assert t.seats == 1000
    assert [(l.source, l.target) for l in m.links] == [("A", "B"), ("B", "C")]


def test_gtfs_trip_before_window(tmp_path):
    d = _gtfs(tmp_path, "t1,07:30:00,07:30:00,A,1\nt1,07:40:00,07:40:00,B,2\n")
    assert read_gtfs_lite(d, "08:00-09:00").trains == ()


def test_gtfs_window_is_half_open(tmp_path):
    d = _gtfs(tmp_path, "t1,09:00:00,09:00:00,A,1\nt1,09:10:00,09:10:00,B,2\n")
    assert read_gtfs_lite(d, "08:00-09:00").trains == ()


def test_gtfs_non_monotone(tmp_path):
    d = _gtfs(tmp_path, "t1,08:00:00,08:05:00,A,1\nt1,08:03:00,08:04:00,B,2\n")
    with pytest.raises(NonMonotoneStopTimes) as err:
        read_gtfs_lite(d, "08:00-09:00")
    assert err.value.line == 3


def test_gtfs_seats_and_duplicate_links(tmp_path):
    d = _gtfs(
        tmp_path,
        "t1,08:00,08:00,A,1\nt1,08:10,08:10,B,2\nt2,08:30,08:30,A,1\nt2,08:41,08:41,B,2\n",
        trips="trip_id,seats\nt1,300\nt2,\n",
    )
    m = read_gtfs_lite(d, "08:00-09:00")
    assert [t.seats for t in m.trains] == [300, 1000]
    assert len(m.links) == 1
    assert build_from_inputs(m).arcs[("A", "B")].arc_cost == 10.5


def test_clock_parsing():
    assert parse_clock("25:01:30") == Fraction(25 * 60 + 1) + Fraction(1, 2)
    assert parse_window("08:00-09:00") == (480, 540)
    for bad in ("8h", "09:00-08:00", "0800"):
        with pytest.raises(ValueError):
            parse_window(bad)
