#!/usr/bin/env python3
"""Second derived subgroup of H(7,3): abelianization of H'' via two Reidemeister-Schreier rounds.

Slow (the final Smith form is about 1800 x 1500); run by hand, not from the test suite.
"""

import time

from fibtype.abelian import abelianization_general
from fibtype.coset import derived_subgroup_table, reidemeister_schreier
from fibtype.presentations import FibTypeParams, make_fib_presentation


def main() -> None:
    t0 = time.perf_counter()
    h = make_fib_presentation(FibTypeParams(7, 3, 1)).to_general()
    print("H^ab   =", abelianization_general(h))
    h1 = reidemeister_schreier(h, derived_subgroup_table(h))
    print("H'^ab  =", abelianization_general(h1), f"({h1.generator_count} generators)")
    h2 = reidemeister_schreier(h1, derived_subgroup_table(h1))
    print(f"H'' has {h2.generator_count} generators, {len(h2.relators)} relators")
    print("H''^ab =", abelianization_general(h2), f"{time.perf_counter() - t0:.0f}s")


if __name__ == "__main__":
    main()
