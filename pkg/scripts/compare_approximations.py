#!/usr/bin/env python3
"""Compare both pipeline variants against PWL and Taylor baselines.

All methods are evaluated on the same quantized input grid; the baselines
run in real arithmetic and are quantized only at the output.
"""

import argparse

from fxtanh.analysis import clamp_threshold, compare_methods, render_comparison
from fxtanh.baselines import uniform_pwl_table
from fxtanh.datapath import reference_config


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pwl-spacing", type=float, default=0.25)
    ap.add_argument("--taylor-terms", type=int, default=3)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    cfg = reference_config()
    print(f"configuration: {cfg.describe()}")
    pwl = uniform_pwl_table(args.pwl_spacing, clamp_threshold(cfg.output_fmt.frac_bits))
    rows = compare_methods(cfg, pwl, args.taylor_terms, jobs=args.jobs)
    print(render_comparison(rows, "text"), end="")


if __name__ == "__main__":
    main()
