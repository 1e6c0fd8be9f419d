"""Small synthetic networks used by tests, scripts and the CLI demo."""
from __future__ import annotations

import random

from railcap.network import Link, ModelInputs, ODPair, Station, Train


def line(costs=(10.0, 12.0), seats=200, demand=100.0) -> ModelInputs:
    """A -> B -> C ... with one train and one end-to-end OD pair."""
    ids = [chr(ord("A") + i) for i in range(len(costs) + 1)]
    stations = tuple(Station(s, s) for s in ids)
    links = tuple(Link(a, b) for a, b in zip(ids, ids[1:]))
    trains = (Train.through("T1", ids, costs, seats),)
    return ModelInputs(stations, links, trains, (ODPair(ids[0], ids[-1], demand),))


def diamond(bottom_seats=100, top_seats=100, demand=200.0) -> ModelInputs:
    """A->B->D (cost 20) and A->C->D (cost 25), one train each, OD A->D."""
    stations = tuple(Station(s, s) for s in "ABCD")
    links = (Link("A", "B"), Link("B", "D"), Link("A", "C"), Link("C", "D"))
    trains = (
        Train.through("bottom", ["A", "B", "D"], [10, 10], bottom_seats),
        Train.through("top", ["A", "C", "D"], [12, 13], top_seats),
    )
    return ModelInputs(stations, links, trains, (ODPair("A", "D", demand),))


# corridor -> minutes
_NL_CORRIDORS = {
    ("ASD", "SHL"): 15,
    ("SHL", "LEDN"): 15,
    ("LEDN", "GVC"): 12,
    ("GVC", "RTD"): 10,
    ("RTD", "DDR"): 14,
    ("ASD", "UT"): 27,
    ("UT", "GD"): 20,
    ("GD", "RTD"): 19,
    ("UT", "AMF"): 15,
    ("UT", "AH"): 37,
    ("UT", "HT"): 28,
    ("HT", "EHV"): 20,
}

_NL_NAMES = {
    "ASD": "Amsterdam Centraal",
    "SHL": "Schiphol Airport",
    "LEDN": "Leiden Centraal",
    "GVC": "Den Haag Centraal",
    "RTD": "Rotterdam Centraal",
    "DDR": "Dordrecht",
    "UT": "Utrecht Centraal",
    "GD": "Gouda",
    "AMF": "Amersfoort Centraal",
    "AH": "Arnhem Centraal",
    "HT": "'s-Hertogenbosch",
    "EHV": "Eindhoven Centraal",
}

# line id, stations, trains per hour per direction, extra minutes per link (slower stock)
_NL_LINES = [
    ("IC-WEST", ["ASD", "SHL", "LEDN", "GVC", "RTD", "DDR"], 2, 0),
    ("IC-SOUTH", ["ASD", "UT", "HT", "EHV"], 1, 0),
    ("IC-EAST", ["ASD", "UT", "AH"], 1, 1),
    ("IC-GOUDA", ["RTD", "GD", "UT", "AMF"], 2, 0),
    ("SPR-HAAG", ["GVC", "RTD"], 1, 4),
]

_NL_DEMAND = [
    ("ASD", "UT", 750),
    ("UT", "ASD", 700),
    ("ASD", "RTD", 550),
    ("RTD", "ASD", 500),
    ("UT", "RTD", 400),
    ("ASD", "EHV", 375),
    ("DDR", "UT", 350),
    ("GVC", "UT", 325),
    ("LEDN", "ASD", 300),
    ("EHV", "UT", 275),
    ("AH", "ASD", 263),
    ("AMF", "GD", 80),  # below the 100 pax/h filter
]


def nl_mini(seats: int = 1000) -> ModelInputs:
    """Twelve-station Randstad-like network.

    Demand above the 100 pax/h filter totals 4788 passengers/h.  With 200-seat
    trains the timetable saturates at roughly 2600 passengers/h (the
    Amsterdam-Utrecht and Randstad corridors fill first), so full demand is
    close to twice what the distanced timetable can carry; with 1000-seat
    trains everything fits.
    """
    stations = tuple(Station(s, _NL_NAMES[s]) for s in sorted(_NL_NAMES))
    minutes = {}
    for (a, b), t in _NL_CORRIDORS.items():
        minutes[(a, b)] = t
        minutes[(b, a)] = t
    links = tuple(Link(a, b) for a, b in sorted(minutes))
    trains = []
    for line_id, stops, per_hour, extra in _NL_LINES:
        for direction, seq in (("N", stops), ("S", stops[::-1])):
            times = [minutes[(a, b)] + extra for a, b in zip(seq, seq[1:])]
            for i in range(per_hour):
                trains.append(Train.through(f"{line_id}-{direction}{i + 1}", seq, times, seats))
    ods = tuple(ODPair(o, d, float(v)) for o, d, v in _NL_DEMAND)
    return ModelInputs(stations, links, tuple(trains), ods)


def random_instance(
    rng: random.Random,
    max_stations: int = 8,
    max_arcs: int = 14,
    max_ods: int = 5,
    seat_choices=(0, 50, 100, 150, 200, 300),
) -> ModelInputs:
    """Random fixed-timetable instance; trains are short simple walks."""
    n = rng.randint(3, max_stations)
    ids = [f"S{i}" for i in range(n)]
    pairs = [(a, b) for a in ids for b in ids if a != b]
    rng.shuffle(pairs)
    arcs = sorted(pairs[: rng.randint(n - 1, min(max_arcs, len(pairs)))])
    out: dict[str, list[str]] = {}
    for a, b in arcs:
        out.setdefault(a, []).append(b)

    trains = []
    for i in range(rng.randint(3, 12)):
        start = rng.choice(sorted(out))
        walk = [start]
        for _ in range(rng.randint(1, 4)):
            nxt = [v for v in out.get(walk[-1], []) if v not in walk]
            if not nxt:
                break
            walk.append(rng.choice(nxt))
        if len(walk) < 2:
            continue
        times = [rng.randint(1, 20) for _ in walk[1:]]
        trains.append(Train.through(f"T{i}", walk, times, rng.choice(seat_choices)))
    if not trains:
        a, b = arcs[0]
        trains.append(Train.through("T0", [a, b], [5], 100))

    # prefer OD pairs the timetable can actually serve
    served: dict[str, set[str]] = {}
    for t in trains:
        for a, b in t.route:
            served.setdefault(a, set()).add(b)
    reach = []
    for o in ids:
        seen, todo = {o}, [o]
        while todo:
            for v in served.get(todo.pop(), ()):
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        reach.extend((o, d) for d in sorted(seen - {o}))

    ods = []
    picked = set()
    for _ in range(rng.randint(1, max_ods)):
        if reach and rng.random() < 0.9:
            o, d = rng.choice(reach)
        else:
            o, d = rng.sample(ids, 2)
        if (o, d) in picked:
            continue
        picked.add((o, d))
        ods.append(ODPair(o, d, float(0 if rng.random() < 0.1 else rng.randint(1, 400))))
    return ModelInputs(
        tuple(Station(s, s) for s in ids),
        tuple(Link(a, b) for a, b in arcs),
        tuple(trains),
        tuple(ods),
    )
