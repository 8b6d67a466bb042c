#!/usr/bin/env python3
"""Phase-transition sweep: BP success rate as sparsity grows.

Example:
    python scripts/phase_transition.py --family dg --s 1 --k-max 12 \
        --trials 50 --csv transition.csv
"""

import argparse
import sys

from stripkit.experiments import ExperimentConfig, sweep, sweep_csv


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", default="dg", choices=["dg", "gaussian"])
    ap.add_argument("--s", type=int, default=1)
    ap.add_argument("--m", type=int, default=32)
    ap.add_argument("--N", type=int, default=128)
    ap.add_argument("--k-max", type=int, default=10)
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--csv", required=True)
    args = ap.parse_args()

    family_args = ({"s": args.s} if args.family == "dg"
                   else {"m": args.m, "N": args.N, "seed": args.seed})
    config = ExperimentConfig(family=args.family, family_args=family_args,
                              k_range=list(range(0, args.k_max + 1)),
                              eps=args.eps, trials=args.trials, seed=args.seed,
                              jobs=args.jobs)
    reports = sweep(config)
    sweep_csv(reports, args.csv)
    for rep in reports:
        print(f"k={rep.config['k']:3d}  both={rep.aggregate['frac_both']:.3f}  "
              f"support={rep.aggregate['support_rate']:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
