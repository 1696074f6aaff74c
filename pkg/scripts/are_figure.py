"""Tabulate the asymptotic relative efficiency of the omnibus test against
the optimal test over delta in [0, 1] (plot-ready CSV, no rendering).

    python scripts/are_figure.py --out results/are_curve.csv
"""

import argparse
import sys
from pathlib import Path

from gpptest.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="results/are_curve.csv")
    ap.add_argument("--steps", type=int, default=201)
    args = ap.parse_args()
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    code = cli_main(["are-curve", "--delta-min", "0", "--delta-max", "1", "--steps", str(args.steps),
                     "--out", args.out])
    if code == 0:
        print(f"wrote {args.out}")
    sys.exit(code)


if __name__ == "__main__":
    main()
