#!/usr/bin/env python3
"""Sweep sieved Gauss sums for a polynomial and plot-ready CSV output.

Shows the square-root cancellation numerically: |sum| against sqrt(q) and
the fitted constant against q^0.6.

Usage: python scripts/gauss_cancellation.py [q_max] [coeffs]
"""

import sys

from polysieve.harmonic import gauss_sum_sweep
from polysieve.intersective import AuxiliaryBuilder
from polysieve.polycore import IntPoly, normalize_positive


def main() -> int:
    q_max = int(sys.argv[1]) if len(sys.argv) > 1 else 200
    coeffs = [int(c) for c in sys.argv[2].split(",")] if len(sys.argv) > 2 else [0, 0, 1]
    h, _ = normalize_positive(IntPoly.of(coeffs))
    ctx = AuxiliaryBuilder(h).context(1)
    rows = gauss_sum_sweep(ctx, q_max, float(q_max), all_a=True)
    print("q,a,magnitude,sqrt_q,ratio_to_q06")
    worst = 0.0
    for q, a, mag in rows:
        ratio = mag / q**0.6 if q > 1 else mag
        worst = max(worst, ratio)
        print(f"{q},{a},{mag:.17g},{q ** 0.5:.17g},{ratio:.17g}")
    print(f"# fitted C against q^0.6: {worst:.6f}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
