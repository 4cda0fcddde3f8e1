#!/usr/bin/env python3
"""Demonstrate the characteristic-2 formality obstruction for x^2 - x^3 + x^4 - x^5"""

from src.algebra.diffeo import series_compose
from src.algebra.scalars import parse_ring
from src.algebra.series import TruncatedSeries, format_series, laurent_expand
from src.lmf.equivalence import potential_equivalence_search

ORDER = 5


def demonstrate_formality_obstruction():
    """Compare z + 1/z - 2 near z = 1 with x^2 over Q, F_3 and F_2"""
    print("FORMALITY OF THE DISC POTENTIAL z + 1/z - 2 AT z = 1")
    print("=" * 56)

    for spec in ("Q", "Fp:3", "Fp:2"):
        ring = parse_ring(spec)
        P1 = laurent_expand({(1,): 1, (-1,): 1, (0,): -2}, [1], ORDER, ring)
        P2 = TruncatedSeries.monomial(ring, 1, (2,), 1, ORDER)
        result = potential_equivalence_search(P1, P2, d=1, order=ORDER)

        print(f"\nRing {ring}:")
        print(f"   P1 = {format_series(P1)}")
        print(f"   P2 = {format_series(P2)}")
        print(f"   verdict: {result.verdict} ({result.nodes} search nodes)")
        if result.found:
            f = result.diffeo.components[0]
            print(f"   x -> {format_series(f)}")
            print(f"   check: P2 o f = {format_series(series_compose(P2, result.diffeo))}")

    print("\nOver F_2 the x^3 term of P1 cannot be absorbed: (x + a x^2)^2 = x^2 + a^2 x^4,")
    print("so no change of variables tangent to the identity removes it.")


if __name__ == "__main__":
    demonstrate_formality_obstruction()
