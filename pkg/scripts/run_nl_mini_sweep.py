"""Run the share x regime grid on NL-mini and print the headline columns.

    python3 scripts/run_nl_mini_sweep.py [OUT_DIR] [--jobs N]

Detail files land in OUT_DIR (default: runs/nl_mini); `railcap report --out
OUT_DIR` rebuilds the summary from them.
"""
import argparse
from pathlib import Path

from railcap.assess import run_sweep, scenario_grid
from railcap.fixtures import nl_mini
from railcap.report import write_results

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", nargs="?", type=Path, default=ROOT / "runs" / "nl_mini")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    results = run_sweep(nl_mini(), scenario_grid(), jobs=args.jobs)
    path, _ = write_results(results, args.out)
    print(f"{'scenario':<14}{'offered':>9}{'transp.':>9}{'unserved':>10}{'links full':>12}{'trains>=0.9':>13}")
    for r in results:
        print(
            f"{r.label:<14}{r.offered:>9.0f}{r.transported:>9.0f}{r.unserved_fraction:>10.3f}"
            f"{r.link_stats.frac_full:>12.3f}{r.train_stats.frac_max_ge_090:>13.3f}"
        )
    print(f"summary: {path}")


if __name__ == "__main__":
    main()
