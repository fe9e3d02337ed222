#!/usr/bin/env python3
"""Reproduce the accuracy grid of the 16-bit pipeline.

Sweeps all 65,536 input codes for every combination of Newton-Raphson stage
count (0 = reference divider, 2, 3) and subtractor mode, printing the
maximum absolute error of each cell.
"""

import argparse
import time

from fxtanh.analysis import render_table2, table2
from fxtanh.datapath import reference_config


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--csv", metavar="PATH", help="also write the grid as CSV")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes")
    args = ap.parse_args()

    cfg = reference_config()
    print(f"configuration: {cfg.describe()}")
    t0 = time.perf_counter()
    rows = table2(cfg, jobs=args.jobs)
    elapsed = time.perf_counter() - t0
    print(render_table2(rows, "text"), end="")
    print(f"({6 * (1 << cfg.input_fmt.width)} evaluations in {elapsed:.2f} s)")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(render_table2(rows, "csv"))
        print(f"wrote {args.csv}")


if __name__ == "__main__":
    main()
