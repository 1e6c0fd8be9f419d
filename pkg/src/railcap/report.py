"""CSV/JSON emission for scenario results.

Each sweep directory holds ``scenarios.csv`` plus one arc and one train
detail file per scenario.  The summary table is always rebuilt from those
files (rounded to 6 decimals), so ``railcap report`` reproduces it byte for
byte without solving anything.
"""
from __future__ import annotations

import csv
import io
import json
import math
import re
from pathlib import Path
from typing import Sequence

from railcap.assess import ScenarioResult, Stats, link_stats

RESULT_COLUMNS = [
    "label",
    "regime",
    "demand_share",
    "offered",
    "transported",
    "unserved_fraction",
    "objective",
    "link_util_mean",
    "link_util_median",
    "link_util_std",
    "frac_links_full",
    "frac_links_ge_090",
    "train_avg_util_mean",
    "train_avg_util_median",
    "train_max_util_mean",
    "train_max_util_median",
    "frac_trains_max_ge_090",
]
SCENARIO_COLUMNS = ["label", "regime", "demand_share", "offered", "transported", "objective", "arc_file", "train_file"]


def fmt(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", label)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_details(results: Sequence[ScenarioResult], out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = []
    for r in results:
        arc_file = f"arcs_{slug(r.label)}.csv"
        train_file = f"trains_{slug(r.label)}.csv"
        net, sol = r.network, r.solution
        _write_csv(
            out / arc_file,
            ["from", "to", "seat_capacity", "load", "utilization"],
            (
                [a, b, net.arcs[(a, b)].seat_capacity, fmt(sol.arc_loads.get((a, b), 0.0)), fmt(r.arc_utilization[(a, b)])]
                for a, b in sorted(net.arcs)
            ),
        )
        rows = []
        for tid in sorted(net.trains):
            seats = net.trains[tid].seats
            if tid in r.train_utilization:
                avg, mx = r.train_utilization[tid]
                rows.append([tid, seats, fmt(avg), fmt(mx)])
            else:
                rows.append([tid, seats, "", ""])
        _write_csv(out / train_file, ["train_id", "seats", "avg_util", "max_util"], rows)
        meta.append(
            [r.label, r.regime, fmt(r.demand_share), fmt(r.offered), fmt(r.transported), fmt(r.objective), arc_file, train_file]
        )
    _write_csv(out / "scenarios.csv", SCENARIO_COLUMNS, meta)
    return out


def _read(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def summarize_dir(out_dir: str | Path) -> list[dict[str, str]]:
    """Summary rows recomputed from a sweep directory's detail files."""
    out = Path(out_dir)
    rows = []
    for sc in _read(out / "scenarios.csv"):
        util = [float(r["utilization"]) for r in _read(out / sc["arc_file"])]
        trains = [r for r in _read(out / sc["train_file"]) if r["avg_util"] != ""]
        avg = Stats.of([float(r["avg_util"]) for r in trains])
        mx_values = [float(r["max_util"]) for r in trains]
        mx = Stats.of(mx_values)
        ls = link_stats(util)
        offered, transported = float(sc["offered"]), float(sc["transported"])
        unserved = max(0.0, 1.0 - transported / offered) if offered > 0 else 0.0
        high = sum(1 for v in mx_values if v >= 0.9 - 1e-9)
        rows.append(
            {
                "label": sc["label"],
                "regime": sc["regime"],
                "demand_share": sc["demand_share"],
                "offered": sc["offered"],
                "transported": sc["transported"],
                "unserved_fraction": fmt(unserved),
                "objective": sc["objective"],
                "link_util_mean": fmt(ls.mean),
                "link_util_median": fmt(ls.median),
                "link_util_std": fmt(ls.std),
                "frac_links_full": fmt(ls.frac_full),
                "frac_links_ge_090": fmt(ls.frac_ge_090),
                "train_avg_util_mean": fmt(avg.mean),
                "train_avg_util_median": fmt(avg.median),
                "train_max_util_mean": fmt(mx.mean),
                "train_max_util_median": fmt(mx.median),
                "frac_trains_max_ge_090": fmt(high / len(mx_values) if mx_values else 0.0),
            }
        )
    return rows


def render(rows: Sequence[dict[str, str]], fmt_name: str = "csv") -> str:
    if fmt_name == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, RESULT_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()
    if fmt_name == "json":
        def value(k, v):
            if k in ("label", "regime"):
                return v
            return None if v == "nan" else float(v)

        records = [{k: value(k, r[k]) for k in RESULT_COLUMNS} for r in rows]
        return json.dumps(records, indent=2) + "\n"
    raise ValueError(f"unknown output format {fmt_name!r}")


def write_results(results: Sequence[ScenarioResult], out_dir: str | Path, fmt_name: str = "csv") -> tuple[Path, str]:
    """Write details and the summary table; return (summary path, summary text)."""
    out = write_details(results, out_dir)
    text = render(summarize_dir(out), fmt_name)
    path = out / f"results.{fmt_name}"
    path.write_text(text)
    return path, text
