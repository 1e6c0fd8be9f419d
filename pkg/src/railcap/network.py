"""Stations, links, trains and demand, plus the aggregated service graph.

The service graph collapses all trains running over the same station pair
into one arc whose seat capacity is the sum of the trains' seats and whose
cost is their mean travel time over that link.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from railcap.errors import (
    EmptyTimetable,
    NegativeCapacity,
    TimetableViolation,
    UnknownLink,
    UnknownStation,
)

log = logging.getLogger(__name__)

Arc = tuple[str, str]

NORMAL_SEATS = 1000
COVID_SEATS = 200


@dataclass(frozen=True)
class Station:
    id: str
    name: str = ""


@dataclass(frozen=True)
class Link:
    source: str
    target: str
    infra_capacity: int | None = None  # trains per peak hour; None = unbounded

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError(f"link {self.source}->{self.target} is a self-loop")
        if self.infra_capacity is not None and self.infra_capacity < 0:
            raise ValueError(f"link {self.key} has negative infra_capacity")

    @property
    def key(self) -> Arc:
        return (self.source, self.target)


@dataclass(frozen=True)
class Train:
    id: str
    route: tuple[Arc, ...]
    travel_times: tuple[float, ...]
    seats: int

    @classmethod
    def through(cls, id: str, stations: Sequence[str], travel_times: Sequence[float], seats: int) -> "Train":
        """Build a train from its station sequence."""
        route = tuple(zip(stations[:-1], stations[1:]))
        return cls(id, route, tuple(float(t) for t in travel_times), seats)

    @property
    def stations(self) -> tuple[str, ...]:
        if not self.route:
            return ()
        return (self.route[0][0],) + tuple(b for _, b in self.route)


@dataclass(frozen=True)
class ODPair:
    origin: str
    destination: str
    demand: float

    def __post_init__(self):
        if self.origin == self.destination:
            raise ValueError(f"OD pair {self.origin}->{self.destination} has identical ends")
        if not self.demand >= 0:
            raise ValueError(f"OD pair {self.origin}->{self.destination} has negative demand")


@dataclass(frozen=True)
class ModelInputs:
    """Everything needed to build a service network."""

    stations: tuple[Station, ...]
    links: tuple[Link, ...]
    trains: tuple[Train, ...]
    od_pairs: tuple[ODPair, ...]


@dataclass(frozen=True)
class ServiceArc:
    source: str
    target: str
    seat_capacity: int
    arc_cost: float
    serving_trains: tuple[str, ...]

    @property
    def key(self) -> Arc:
        return (self.source, self.target)


@dataclass(frozen=True)
class ServiceNetwork:
    stations: tuple[Station, ...]
    arcs: Mapping[Arc, ServiceArc]
    od_pairs: tuple[ODPair, ...]
    trains: Mapping[str, Train] = field(default_factory=dict)

    def successors(self, station: str) -> list[ServiceArc]:
        return self._adjacency.get(station, [])

    @property
    def _adjacency(self) -> dict[str, list[ServiceArc]]:
        adj = self.__dict__.get("_adj_cache")
        if adj is None:
            adj = {}
            for arc in self.arcs.values():
                adj.setdefault(arc.source, []).append(arc)
            for lst in adj.values():
                lst.sort(key=lambda a: a.target)
            object.__setattr__(self, "_adj_cache", adj)
        return adj

    @property
    def station_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.stations)


# ---------------------------------------------------------------- validation


@dataclass(frozen=True)
class Violation:
    kind: str  # DiscontinuousRoute, RepeatedStation, TravelTimeMismatch, NonPositiveTravelTime, EmptyRoute, InfrastructureCapacityExceeded
    subject: str
    detail: str

    def __str__(self):
        return f"{self.kind}({self.subject}): {self.detail}"


@dataclass
class ValidationReport:
    violations: list[Violation]
    link_train_counts: dict[Arc, int]

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> list[str]:
        out = [str(v) for v in self.violations]
        out.append(f"{'OK' if self.ok else 'INVALID'}: {len(self.violations)} violation(s)")
        return out


def validate_timetable(
    stations: Iterable[Station], links: Iterable[Link], trains: Iterable[Train]
) -> ValidationReport:
    """Check train routes for continuity and links for infrastructure capacity.

    Model violations are collected, never raised; only dangling station or
    link references raise.
    """
    station_ids = {s.id for s in stations}
    link_map: dict[Arc, Link] = {}
    for link in links:
        for end in link.key:
            if end not in station_ids:
                raise UnknownStation(f"link {link.source}->{link.target} references unknown station {end!r}")
        link_map[link.key] = link

    violations: list[Violation] = []
    counts: dict[Arc, int] = {key: 0 for key in link_map}
    for train in sorted(trains, key=lambda t: t.id):
        for arc in train.route:
            for end in arc:
                if end not in station_ids:
                    raise UnknownStation(f"train {train.id} references unknown station {end!r}")
            if arc not in link_map:
                raise UnknownLink(f"train {train.id} uses undefined link {arc[0]}->{arc[1]}")
        violations.extend(_train_violations(train))
        for arc in set(train.route):
            counts[arc] += 1

    for key in sorted(counts):
        cap = link_map[key].infra_capacity
        if cap is not None and counts[key] > cap:
            violations.append(
                Violation(
                    "InfrastructureCapacityExceeded",
                    f"{key[0]}->{key[1]}",
                    f"{counts[key]} trains > capacity {cap}",
                )
            )
    return ValidationReport(violations, counts)


def _train_violations(train: Train) -> list[Violation]:
    out = []
    if not train.route:
        return [Violation("EmptyRoute", train.id, "route has no links")]
    for i, (prev, nxt) in enumerate(zip(train.route, train.route[1:])):
        if prev[1] != nxt[0]:
            out.append(
                Violation(
                    "DiscontinuousRoute",
                    train.id,
                    f"link {i} ends at {prev[1]} but link {i + 1} starts at {nxt[0]}",
                )
            )
    if not out:
        # with a continuous route, a revisit means several origin/terminus candidates
        seen = set()
        for st in train.stations:
            if st in seen:
                out.append(Violation("RepeatedStation", train.id, f"station {st} visited twice"))
            seen.add(st)
    if len(train.travel_times) != len(train.route):
        out.append(
            Violation(
                "TravelTimeMismatch",
                train.id,
                f"{len(train.travel_times)} travel times for {len(train.route)} links",
            )
        )
    elif any(not t > 0 for t in train.travel_times):
        out.append(Violation("NonPositiveTravelTime", train.id, "travel times must be positive"))
    if train.seats < 0:
        out.append(Violation("NegativeSeats", train.id, f"seats = {train.seats}"))
    return out


# ---------------------------------------------------------------- construction


def build_service_network(
    stations: Iterable[Station],
    links: Iterable[Link],
    trains: Iterable[Train],
    od_pairs: Iterable[ODPair],
) -> ServiceNetwork:
    stations = sorted(stations, key=lambda s: s.id)
    links = list(links)
    trains = sorted(trains, key=lambda t: t.id)
    if not trains:
        raise EmptyTimetable("no trains in timetable")
    report = validate_timetable(stations, links, trains)
    if not report.ok:
        raise TimetableViolation(report.violations)

    seats: dict[Arc, int] = {}
    times: dict[Arc, list[float]] = {}
    serving: dict[Arc, list[str]] = {}
    for train in trains:
        for arc, tt in zip(train.route, train.travel_times):
            seats[arc] = seats.get(arc, 0) + train.seats
            times.setdefault(arc, []).append(tt)
            serving.setdefault(arc, []).append(train.id)

    arcs = {
        key: ServiceArc(key[0], key[1], seats[key], math.fsum(times[key]) / len(times[key]), tuple(serving[key]))
        for key in sorted(seats)
    }

    ids = {s.id for s in stations}
    ods = sorted(od_pairs, key=lambda od: (od.origin, od.destination))
    for od in ods:
        for end in (od.origin, od.destination):
            if end not in ids:
                raise UnknownStation(f"OD pair {od.origin}->{od.destination} references unknown station {end!r}")
    log.debug("service network: %d stations, %d arcs, %d OD pairs", len(stations), len(arcs), len(ods))
    return ServiceNetwork(tuple(stations), arcs, tuple(ods), {t.id: t for t in trains})


def build_from_inputs(inputs: ModelInputs) -> ServiceNetwork:
    return build_service_network(inputs.stations, inputs.links, inputs.trains, inputs.od_pairs)


# ---------------------------------------------------------------- regimes and demand


@dataclass(frozen=True)
class CapacityRegime:
    """Seat setting applied to every train.

    ``kind`` is one of ``normal`` (1000 seats), ``covid`` (200 seats),
    ``scale`` (multiply current seats, rounded half up) or ``seats`` (fixed
    count).
    """

    kind: str
    value: float | None = None

    @classmethod
    def parse(cls, text: str) -> "CapacityRegime":
        text = text.strip()
        if text in ("normal", "covid"):
            return cls(text)
        key, sep, val = text.partition("=")
        if sep and key in ("scale", "seats"):
            try:
                number = float(val)
            except ValueError:
                raise ValueError(f"bad regime value in {text!r}") from None
            if key == "seats" and number != int(number):
                raise ValueError(f"seats regime needs an integer, got {val!r}")
            return cls(key, number)
        raise ValueError(f"unknown capacity regime {text!r}")

    @property
    def label(self) -> str:
        if self.kind in ("normal", "covid"):
            return self.kind
        return f"{self.kind}={self.value:g}"

    def seats_for(self, train: Train) -> int:
        if self.kind == "normal":
            return NORMAL_SEATS
        if self.kind == "covid":
            return COVID_SEATS
        if self.kind == "scale":
            seats = math.floor(train.seats * self.value + 0.5)
        elif self.kind == "seats":
            seats = int(self.value)
        else:
            raise ValueError(f"unknown capacity regime {self.kind!r}")
        if seats < 0:
            raise NegativeCapacity(f"regime {self.label} gives train {train.id} {seats} seats")
        return seats


def apply_capacity_regime(trains: Iterable[Train], regime: CapacityRegime | str) -> tuple[Train, ...]:
    if isinstance(regime, str):
        regime = CapacityRegime.parse(regime)
    return tuple(replace(t, seats=regime.seats_for(t)) for t in trains)


def filter_demand(od_pairs: Iterable[ODPair], threshold: float = 100.0) -> tuple[ODPair, ...]:
    """Keep OD pairs whose demand is strictly above ``threshold``."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    return tuple(od for od in od_pairs if od.demand > threshold)


def scale_demand(od_pairs: Iterable[ODPair], share: float) -> tuple[ODPair, ...]:
    if not 0 <= share <= 1:
        raise ValueError(f"demand share {share} outside [0, 1]")
    return tuple(replace(od, demand=od.demand * share) for od in od_pairs)
