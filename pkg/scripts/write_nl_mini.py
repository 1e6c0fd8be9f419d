"""Export the synthetic NL-mini fixture as a native model directory.

    python3 scripts/write_nl_mini.py [OUT_DIR]     (default: data/nl_mini)
"""
import sys
from pathlib import Path

from railcap.fixtures import nl_mini
from railcap.io import write_native


def main(argv):
    out = Path(argv[1]) if len(argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "nl_mini"
    write_native(nl_mini(), out)
    print(f"wrote {out}")


if __name__ == "__main__":
    main(sys.argv)
