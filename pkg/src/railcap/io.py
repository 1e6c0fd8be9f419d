"""Native CSV model files and a minimal GTFS importer.

Native directory layout (headers fixed, extra columns ignored)::

    stations.csv     id,name
    links.csv        from,to,infra_capacity        (empty capacity = unbounded)
    trains.csv       id,seats
    train_stops.csv  train_id,seq,station_id,arr_min,dep_min
    demand.csv       origin,destination,demand

Stop times are minutes from the window start.  They are parsed as exact
fractions so that an exported model reads back bit-identical.
"""
from __future__ import annotations

import csv
import re
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from railcap.errors import DanglingReference, DuplicateId, NonMonotoneStopTimes, ParseError
from railcap.network import NORMAL_SEATS, Link, ModelInputs, ODPair, Station, Train

NATIVE_FILES = ("stations.csv", "links.csv", "trains.csv", "train_stops.csv", "demand.csv")


def _rows(path: Path, required: Iterable[str]):
    """Yield (line number, row dict) after checking the header."""
    if not path.exists():
        raise ParseError(path, 0, "file not found")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise ParseError(path, 1, f"missing column(s) {', '.join(missing)}")
        for row in reader:
            if not any((v or "").strip() for v in row.values() if isinstance(v, str)):
                continue
            yield reader.line_num, {k: (v or "").strip() for k, v in row.items() if k is not None}


def _number(path, line, row, name, kind=float, allow_empty=False):
    text = row.get(name, "")
    if text == "":
        if allow_empty:
            return None
        raise ParseError(path, line, f"empty {name}", column=name)
    try:
        return kind(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(path, line, f"bad {name} value {text!r}", column=name) from None


def read_native(directory: str | Path) -> ModelInputs:
    d = Path(directory)
    stations = read_stations(d / "stations.csv")
    ids = {s.id for s in stations}

    links = []
    link_keys = set()
    p = d / "links.csv"
    for line, row in _rows(p, ("from", "to", "infra_capacity")):
        a, b = row["from"], row["to"]
        for end in (a, b):
            if end not in ids:
                raise DanglingReference(p, line, f"unknown station {end!r}")
        if (a, b) in link_keys:
            raise DuplicateId(p, line, f"duplicate link {a}->{b}")
        cap = _number(p, line, row, "infra_capacity", int, allow_empty=True)
        try:
            links.append(Link(a, b, cap))
        except ValueError as exc:
            raise ParseError(p, line, str(exc)) from None
        link_keys.add((a, b))

    seats = {}
    seat_lines = {}
    p = d / "trains.csv"
    for line, row in _rows(p, ("id", "seats")):
        tid = row["id"]
        if tid in seats:
            raise DuplicateId(p, line, f"duplicate train id {tid!r}")
        seats[tid] = _number(p, line, row, "seats", int)
        seat_lines[tid] = line

    stops: dict[str, list] = {}
    p = d / "train_stops.csv"
    for line, row in _rows(p, ("train_id", "seq", "station_id", "arr_min", "dep_min")):
        tid = row["train_id"]
        if tid not in seats:
            raise DanglingReference(p, line, f"unknown train {tid!r}")
        if row["station_id"] not in ids:
            raise DanglingReference(p, line, f"unknown station {row['station_id']!r}")
        seq = _number(p, line, row, "seq", int)
        arr = _number(p, line, row, "arr_min", Fraction, allow_empty=True)
        dep = _number(p, line, row, "dep_min", Fraction, allow_empty=True)
        stops.setdefault(tid, []).append((seq, line, row["station_id"], arr, dep))

    trains = []
    for tid in seats:
        rows = sorted(stops.get(tid, []))
        if len(rows) < 2:
            raise ParseError(p, seat_lines[tid], f"train {tid!r} needs at least two stops")
        for (s1, *_), (s2, line, *_) in zip(rows, rows[1:]):
            if s1 == s2:
                raise DuplicateId(p, line, f"train {tid!r} repeats stop sequence {s1}")
        route, times = [], []
        for (_, _, a, arr_a, dep_a), (_, line, b, arr_b, dep_b) in zip(rows, rows[1:]):
            if (a, b) not in link_keys:
                raise DanglingReference(p, line, f"train {tid!r} uses undefined link {a}->{b}")
            leave = dep_a if dep_a is not None else arr_a
            reach = arr_b if arr_b is not None else dep_b
            if leave is None or reach is None:
                raise ParseError(p, line, f"train {tid!r} lacks times around {a}->{b}")
            if reach <= leave:
                raise NonMonotoneStopTimes(p, line, f"train {tid!r} reaches {b} at {reach} but left {a} at {leave}")
            if arr_b is not None and dep_b is not None and dep_b < arr_b:
                raise NonMonotoneStopTimes(p, line, f"train {tid!r} departs {b} before arriving")
            route.append((a, b))
            times.append(float(reach - leave))
        trains.append(Train(tid, tuple(route), tuple(times), seats[tid]))

    od_pairs = read_demand(d / "demand.csv", ids)
    return ModelInputs(tuple(stations), tuple(links), tuple(trains), od_pairs)


def read_stations(path: Path, id_col="id", name_col="name") -> list[Station]:
    out, seen = [], set()
    for line, row in _rows(path, (id_col,)):
        sid = row[id_col]
        if not sid:
            raise ParseError(path, line, "empty station id", column=id_col)
        if sid in seen:
            raise DuplicateId(path, line, f"duplicate station id {sid!r}")
        seen.add(sid)
        out.append(Station(sid, row.get(name_col, "")))
    return out


def read_demand(path: str | Path, station_ids: Iterable[str]) -> tuple[ODPair, ...]:
    path = Path(path)
    ids = set(station_ids)
    out, seen = [], set()
    for line, row in _rows(path, ("origin", "destination", "demand")):
        o, dst = row["origin"], row["destination"]
        for end in (o, dst):
            if end not in ids:
                raise DanglingReference(path, line, f"unknown station {end!r}")
        if (o, dst) in seen:
            raise DuplicateId(path, line, f"duplicate OD pair {o}->{dst}")
        seen.add((o, dst))
        value = _number(path, line, row, "demand", float)
        try:
            out.append(ODPair(o, dst, value))
        except ValueError as exc:
            raise ParseError(path, line, str(exc)) from None
    return tuple(out)


# ---------------------------------------------------------------- export


def _fmt_exact(x: Fraction) -> str:
    """Shortest decimal string that parses back to exactly ``x`` (dyadic x)."""
    if x.denominator == 1:
        return str(x.numerator)
    short = repr(float(x))
    if Fraction(short) == x:
        return short
    den = x.denominator
    k = 0
    while 10**k % den:
        k += 1
    digits = str(abs(x.numerator) * (10**k // den)).rjust(k + 1, "0")
    sign = "-" if x < 0 else ""
    return f"{sign}{digits[:-k]}.{digits[-k:]}".rstrip("0")


def _fmt_float(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_native(inputs: ModelInputs, directory: str | Path) -> Path:
    """Write ``inputs`` in the native layout; stops get zero dwell from minute 0."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "stations.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "name"])
        for s in inputs.stations:
            w.writerow([s.id, s.name])
    with open(d / "links.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["from", "to", "infra_capacity"])
        for link in inputs.links:
            w.writerow([link.source, link.target, "" if link.infra_capacity is None else link.infra_capacity])
    with open(d / "trains.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "seats"])
        for t in inputs.trains:
            w.writerow([t.id, t.seats])
    with open(d / "train_stops.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["train_id", "seq", "station_id", "arr_min", "dep_min"])
        for t in inputs.trains:
            clock = Fraction(0)
            st = t.stations
            w.writerow([t.id, 1, st[0], "", "0"])
            for i, (station, tt) in enumerate(zip(st[1:], t.travel_times), start=2):
                clock += Fraction(tt)
                stamp = _fmt_exact(clock)
                w.writerow([t.id, i, station, stamp, stamp if i < len(st) else ""])
    with open(d / "demand.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["origin", "destination", "demand"])
        for od in inputs.od_pairs:
            w.writerow([od.origin, od.destination, _fmt_float(od.demand)])
    return d


# ---------------------------------------------------------------- GTFS-lite

_CLOCK = re.compile(r"^(\d{1,3}):([0-5]\d)(?::([0-5]\d))?$")


def parse_clock(text: str) -> Fraction:
    """``HH:MM[:SS]`` (hours may exceed 23) to minutes after midnight."""
    m = _CLOCK.match(text.strip())
    if not m:
        raise ValueError(f"bad clock time {text!r}")
    h, mi, s = int(m.group(1)), int(m.group(2)), int(m.group(3) or 0)
    return Fraction(h * 60 + mi) + Fraction(s, 60)


def parse_window(text: str) -> tuple[Fraction, Fraction]:
    start, sep, end = text.partition("-")
    if not sep:
        raise ValueError(f"window must look like HH:MM-HH:MM, got {text!r}")
    lo, hi = parse_clock(start), parse_clock(end)
    if hi <= lo:
        raise ValueError(f"empty window {text!r}")
    return lo, hi


def read_gtfs_lite(
    directory: str | Path,
    window: str | tuple[Fraction, Fraction],
    default_seats: int = NORMAL_SEATS,
    demand: str | Path | None = None,
) -> ModelInputs:
    """Trains from the trips whose first departure falls in ``[start, end)``.

    Uses stops.txt (stop_id, stop_name), trips.txt (trip_id, optional seats)
    and stop_times.txt (trip_id, arrival_time, departure_time, stop_id,
    stop_sequence).  Calendars, frequencies and transfers are ignored.
    Inferred links carry no infrastructure capacity.
    """
    d = Path(directory)
    lo, hi = parse_window(window) if isinstance(window, str) else window
    stations = read_stations(d / "stops.txt", "stop_id", "stop_name")
    ids = {s.id for s in stations}

    trip_seats: dict[str, int] = {}
    p = d / "trips.txt"
    for line, row in _rows(p, ("trip_id",)):
        tid = row["trip_id"]
        if tid in trip_seats:
            raise DuplicateId(p, line, f"duplicate trip id {tid!r}")
        seats = _number(p, line, row, "seats", int, allow_empty=True) if "seats" in row else None
        trip_seats[tid] = default_seats if seats is None else seats

    stops: dict[str, list] = {}
    p = d / "stop_times.txt"
    for line, row in _rows(p, ("trip_id", "arrival_time", "departure_time", "stop_id", "stop_sequence")):
        tid = row["trip_id"]
        if tid not in trip_seats:
            raise DanglingReference(p, line, f"unknown trip {tid!r}")
        if row["stop_id"] not in ids:
            raise DanglingReference(p, line, f"unknown stop {row['stop_id']!r}")
        try:
            arr = parse_clock(row["arrival_time"]) if row["arrival_time"] else None
            dep = parse_clock(row["departure_time"]) if row["departure_time"] else None
        except ValueError as exc:
            raise ParseError(p, line, str(exc)) from None
        seq = _number(p, line, row, "stop_sequence", int)
        stops.setdefault(tid, []).append((seq, line, row["stop_id"], arr, dep))

    trains, link_keys = [], set()
    for tid in sorted(stops):
        rows = sorted(stops[tid])
        first_dep = rows[0][4] if rows[0][4] is not None else rows[0][3]
        if first_dep is None or not (lo <= first_dep < hi) or len(rows) < 2:
            continue
        route, times = [], []
        for (_, _, a, arr_a, dep_a), (_, line, b, arr_b, dep_b) in zip(rows, rows[1:]):
            leave = dep_a if dep_a is not None else arr_a
            reach = arr_b if arr_b is not None else dep_b
            if leave is None or reach is None:
                raise ParseError(p, line, f"trip {tid!r} lacks times around {a}->{b}")
            if reach <= leave:
                raise NonMonotoneStopTimes(p, line, f"trip {tid!r} reaches {b} at {reach} min but left {a} at {leave} min")
            route.append((a, b))
            times.append(float(reach - leave))
            link_keys.add((a, b))
        trains.append(Train(tid, tuple(route), tuple(times), trip_seats[tid]))

    links = tuple(Link(a, b) for a, b in sorted(link_keys))
    ods = read_demand(demand, ids) if demand is not None else ()
    return ModelInputs(tuple(stations), links, tuple(trains), ods)
