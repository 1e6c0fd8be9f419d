"""Exception hierarchy shared across railcap."""


class RailcapError(Exception):
    """Base class for every error raised by railcap."""

    kind = "error"


class DataError(RailcapError):
    """Input data cannot be turned into a valid model."""

    kind = "data"


class UnknownStation(DataError):
    pass


class UnknownLink(DataError):
    pass


class EmptyTimetable(DataError):
    pass


class TimetableViolation(DataError):
    """Raised when a service network is requested for an inadmissible timetable."""

    def __init__(self, violations):
        self.violations = list(violations)
        first = self.violations[0] if self.violations else None
        super().__init__(f"{len(self.violations)} timetable violation(s), first: {first}")


class NegativeCapacity(DataError):
    pass


class ParseError(DataError):
    def __init__(self, path, line, message, column=None):
        self.path = str(path)
        self.line = line
        self.column = column
        where = f"{self.path}:{line}" + (f":{column}" if column else "")
        super().__init__(f"{where}: {message}")


class DanglingReference(ParseError):
    """A row refers to an id that is not defined anywhere."""


class DuplicateId(ParseError):
    pass


class NonMonotoneStopTimes(ParseError):
    pass


class NoPath(RailcapError):
    def __init__(self, origin, destination):
        self.origin = origin
        self.destination = destination
        super().__init__(f"no path from {origin!r} to {destination!r}")


class SolverError(RailcapError):
    kind = "solver"


class NumericalFailure(SolverError):
    pass


class InstanceTooLarge(SolverError):
    pass


class UnknownPolicy(RailcapError):
    kind = "config"


class ScenarioError(RailcapError):
    """Wraps a failure inside one scenario so the label travels with it."""

    def __init__(self, label, cause):
        self.label = label
        self.cause = cause
        self.kind = getattr(cause, "kind", "error")
        super().__init__(f"scenario {label!r}: {cause}")
