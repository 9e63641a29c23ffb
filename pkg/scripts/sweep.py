#!/usr/bin/env python3
"""Classify every G_n(m,k) with n in a range and cross-check each verdict.

    python scripts/sweep.py --n-max 12 [--obstructions] [--max-cosets N]
"""

import argparse
import time
from collections import Counter

from fibtype.classify import CrossCheckMismatch, classify, cross_check
from fibtype.coset import EnumerationLimits, EnumerationOverflow


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-max", type=int, default=12)
    ap.add_argument("--obstructions", action="store_true")
    ap.add_argument("--max-cosets", type=int, default=10**6)
    args = ap.parse_args()

    t0 = time.perf_counter()
    tally: Counter = Counter()
    bad = []
    for n in range(1, args.n_max + 1):
        for m in range(n):
            for k in range(n):
                v = classify((n, m, k))
                tally[(v.group.status, v.spine.status)] += 1
                try:
                    cross_check(v, EnumerationLimits(args.max_cosets), obstructions=args.obstructions)
                except CrossCheckMismatch as exc:
                    bad.append(((n, m, k), exc.report.to_json()))
                except EnumerationOverflow:
                    tally["overflow"] += 1
    for key, count in sorted(tally.items(), key=str):
        print(key, count)
    print(f"{sum(v for k, v in tally.items() if k != 'overflow')} triples, {len(bad)} mismatches, {time.perf_counter() - t0:.1f}s")
    for t, rep in bad:
        print("mismatch", t, rep)


if __name__ == "__main__":
    main()
