#!/usr/bin/env python3
"""Order of H(9,3) modulo the normal closure of g = x0 x4 x8 x3 x7 x2 x6 x1 x5, by both strategies."""

from fibtype.coset import EnumerationLimits, enumerate_cosets
from fibtype.presentations import FibTypeParams, make_fib_presentation, parse_word

G = "x0 x4 x8 x3 x7 x2 x6 x1 x5"


def main() -> None:
    p = make_fib_presentation(FibTypeParams(9, 3, 1)).to_general().with_relators([parse_word(G, 9)])
    for strategy in ("hlt", "felsch"):
        t = enumerate_cosets(p, strategy=strategy, limits=EnumerationLimits(max_cosets=10**6))
        print(strategy, t.to_json(), f"{t.elapsed:.1f}s")
    assert t.index == 2**15 * 7


if __name__ == "__main__":
    main()
