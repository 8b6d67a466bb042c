#!/usr/bin/env python3
"""Build a dictionary, print its coherence profile, and certify StRIP/SINC.

Example:
    python scripts/certify_family.py --family dg --s 1 --k 3 --delta 0.6 \
        --trials 5000
"""

import argparse
import json
import math
import sys

import stripkit as sk


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", default="dg",
                    choices=["dg", "chirp", "gaussian", "harmonic", "etf"])
    ap.add_argument("--s", type=int, default=1)
    ap.add_argument("--m", type=int, default=8)
    ap.add_argument("--N", type=int, default=32)
    ap.add_argument("--q", type=int, default=13)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--delta", type=float, default=0.5)
    ap.add_argument("--alpha", type=float,
                    help="SINC threshold; defaults to k mu^2 / 2")
    ap.add_argument("--trials", type=int, default=10_000)
    args = ap.parse_args()

    params = {
        "dg": {"s": args.s},
        "chirp": {"m": args.m},
        "gaussian": {"m": args.m, "N": args.N, "seed": args.seed},
        "harmonic": {"m": args.m, "N": args.N, "seed": args.seed},
        "etf": {"q": args.q},
    }[args.family]
    d = sk.build_family(args.family, **params)
    if d.field == "complex":
        d = sk.realify(d)
    profile = sk.coherence_profile(d)
    print(json.dumps({"dictionary": d.name, "m": d.m, "N": d.N,
                      "profile": profile.as_dict()}, indent=2, sort_keys=True))

    exhaustive_ok = math.comb(d.N, args.k) <= 10 ** 6
    method = "exhaustive" if exhaustive_ok else "monte_carlo"
    strip = sk.strip_estimate(d, args.k, args.delta, method,
                              trials=args.trials, seed=args.seed)
    alpha = args.alpha if args.alpha is not None else args.k * profile.mu ** 2 / 2
    sinc = sk.sinc_estimate(d, args.k, alpha, method,
                            trials=args.trials, seed=args.seed)
    for rep in (strip, sinc):
        print(json.dumps(rep.as_dict(), indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
