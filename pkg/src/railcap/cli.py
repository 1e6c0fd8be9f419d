"""railcap command line: validate, solve, sweep, report.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 solver failure.
Failures print exactly one line to stderr:
``railcap: error[<kind>] <ExceptionType>: <message>``.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from railcap.assess import DEFAULT_REGIMES, DEFAULT_SHARES, Scenario, run_sweep
from railcap.config import AssessConfig, SolverConfig
from railcap.errors import RailcapError
from railcap.io import read_demand, read_gtfs_lite, read_native
from railcap.network import CapacityRegime, ModelInputs, validate_timetable
from railcap.report import render, summarize_dir, write_results

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3
_EXIT_BY_KIND = {"config": EXIT_USAGE, "data": EXIT_DATA, "solver": EXIT_SOLVER}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    input_dir: Path | None = None
    gtfs_dir: Path | None = None
    demand_file: Path | None = None
    window: str | None = None
    regimes: list[CapacityRegime] = field(default_factory=lambda: [CapacityRegime.parse(r) for r in DEFAULT_REGIMES])
    shares: list[float] = field(default_factory=lambda: list(DEFAULT_SHARES))
    threshold: float = 100.0
    detour_factor: float = 3.0
    allocation: str = "proportional"
    max_rounds: int = 50
    out_dir: Path | None = None
    out_format: str = "csv"
    jobs: int = 1

    def __post_init__(self):
        if (self.input_dir is None) == (self.gtfs_dir is None):
            raise UsageError("give exactly one of --input or --gtfs")
        if self.gtfs_dir is not None and (self.window is None or self.demand_file is None):
            raise UsageError("--gtfs needs --window and --demand")
        if not self.shares or any(not 0 <= s <= 1 for s in self.shares):
            raise UsageError("demand shares must lie in [0, 1]")
        if self.threshold < 0:
            raise UsageError("--threshold must be non-negative")
        if self.allocation not in ("proportional", "equal"):
            raise UsageError(f"unknown allocation {self.allocation!r}")
        if self.out_format not in ("csv", "json"):
            raise UsageError(f"unknown format {self.out_format!r}")

    def assess_config(self) -> AssessConfig:
        try:
            solver = SolverConfig(detour_factor=self.detour_factor, max_rounds=self.max_rounds)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return AssessConfig(self.threshold, self.allocation, solver)

    def load(self) -> ModelInputs:
        if self.input_dir is not None:
            inputs = read_native(self.input_dir)
            if self.demand_file is not None:
                inputs = replace(inputs, od_pairs=read_demand(self.demand_file, [s.id for s in inputs.stations]))
            return inputs
        try:
            return read_gtfs_lite(self.gtfs_dir, self.window, demand=self.demand_file)
        except ValueError as exc:
            raise UsageError(str(exc)) from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _regime_list(text: str) -> list[CapacityRegime]:
    try:
        return [CapacityRegime.parse(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="railcap", description="Transport capacity assessment for fixed railway timetables.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def inputs(p):
        p.add_argument("--input", type=Path, help="native model directory")
        p.add_argument("--gtfs", type=Path, help="GTFS-lite directory")
        p.add_argument("--demand", type=Path, help="demand CSV (origin,destination,demand)")
        p.add_argument("--window", help="peak window HH:MM-HH:MM for --gtfs")

    def solving(p, sweep):
        p.add_argument(
            "--regime",
            type=_regime_list,
            default=None,
            help="normal | covid | scale=X | seats=N" + (" (comma list)" if sweep else ""),
        )
        p.add_argument("--shares", type=_float_list, default=None, help="demand shares, comma separated")
        p.add_argument("--threshold", type=float, default=100.0, help="keep OD pairs with demand > N")
        p.add_argument("--detour-factor", type=float, default=3.0)
        p.add_argument("--allocation", default="proportional", choices=["proportional", "equal"])
        p.add_argument("--max-rounds", type=int, default=50)
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--format", default="csv", choices=["csv", "json"])
        if sweep:
            p.add_argument("--jobs", type=int, default=1, help="scenarios solved in parallel")

    p = sub.add_parser("validate", help="check the timetable")
    inputs(p)
    p = sub.add_parser("solve", help="solve one scenario")
    inputs(p)
    solving(p, sweep=False)
    p = sub.add_parser("sweep", help="solve the share x regime grid")
    inputs(p)
    solving(p, sweep=True)
    p = sub.add_parser("report", help="rebuild the summary of a sweep directory")
    p.add_argument("--out", type=Path, required=True, help="sweep output directory")
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    return parser


def _config(args, sweep: bool) -> RunConfig:
    kw = dict(input_dir=args.input, gtfs_dir=args.gtfs, demand_file=args.demand, window=args.window)
    if hasattr(args, "shares"):
        regimes = args.regime or (
            [CapacityRegime.parse(r) for r in DEFAULT_REGIMES] if sweep else [CapacityRegime.parse("covid")]
        )
        shares = args.shares or (list(DEFAULT_SHARES) if sweep else [1.0])
        if not sweep and (len(regimes) != 1 or len(shares) != 1):
            raise UsageError("solve takes a single --regime and a single --shares value")
        kw.update(
            regimes=regimes,
            shares=shares,
            threshold=args.threshold,
            detour_factor=args.detour_factor,
            allocation=args.allocation,
            max_rounds=args.max_rounds,
            out_dir=args.out,
            out_format=args.format,
            jobs=getattr(args, "jobs", 1),
        )
    return RunConfig(**kw)


def cmd_validate(cfg: RunConfig) -> int:
    inputs = cfg.load()
    report = validate_timetable(inputs.stations, inputs.links, inputs.trains)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.ok else EXIT_DATA


def _solve(cfg: RunConfig) -> int:
    inputs = cfg.load()
    scenarios = [Scenario(s, r) for r in cfg.regimes for s in cfg.shares]
    results = run_sweep(inputs, scenarios, cfg.assess_config(), jobs=cfg.jobs)
    for r in results:
        for w in r.warnings:
            logging.getLogger("railcap").warning("%s: %s", r.label, w)
    if cfg.out_dir is not None:
        _, text = write_results(results, cfg.out_dir, cfg.out_format)
    else:
        import tempfile

        with tempfile.TemporaryDirectory() as tmp:
            _, text = write_results(results, tmp, cfg.out_format)
    sys.stdout.write(text)
    return EXIT_OK


cmd_solve = _solve
cmd_sweep = _solve


def cmd_report(out_dir: Path, fmt_name: str = "csv") -> int:
    if not (Path(out_dir) / "scenarios.csv").exists():
        raise UsageError(f"{out_dir} holds no sweep output (scenarios.csv missing)")
    sys.stdout.write(render(summarize_dir(out_dir), fmt_name))
    return EXIT_OK


def _one_line(exc: BaseException) -> str:
    return " ".join(str(exc).split())


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("RAILCAP_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        args = build_parser().parse_args(argv)
        if args.command == "report":
            return cmd_report(args.out, args.format)
        cfg = _config(args, sweep=args.command == "sweep")
        if args.command == "validate":
            return cmd_validate(cfg)
        return _solve(cfg)
    except UsageError as exc:
        print(f"railcap: error[usage] UsageError: {_one_line(exc)}", file=sys.stderr)
        return EXIT_USAGE
    except RailcapError as exc:
        kind = getattr(exc, "kind", "error")
        cause = getattr(exc, "cause", exc)
        print(f"railcap: error[{kind}] {type(cause).__name__}: {_one_line(exc)}", file=sys.stderr)
        return _EXIT_BY_KIND.get(kind, EXIT_DATA)
    except OSError as exc:
        print(f"railcap: error[data] {type(exc).__name__}: {_one_line(exc)}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
