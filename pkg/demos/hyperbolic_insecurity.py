"""On a genus-2 surface a handful of points cannot block exponentially many geodesics.

Run:  python3 demos/hyperbolic_insecurity.py
"""
from __future__ import annotations

import math

import numpy as np

from geosecure.core import Configuration, count_curve
from geosecure.hyperbolic import make_genus2, non_blocking_certificate, systole


def main():
    surface = make_genus2()
    print(f"Regular octagon surface: systole {systole(surface):.6f}, "
          f"injectivity radius {surface.injectivity_radius_value():.6f}")

    cfg = Configuration("c1", "c2")
    grid = [2, 4, 6, 8, 10]
    curve = count_curve(surface, cfg, grid)
    print("\n  T   n_T   log(n_T)/T")
    for T, n, _ in curve.rows():
        print(f"{T:>3} {n:>5}   {math.log(n) / T if n else float('nan'):.3f}")

    rng = np.random.default_rng(0)
    blockers = [surface.sample_point(rng) for _ in range(8)]
    print("\nEight random candidate blockers; each can sit on only a few short segments")
    for T in grid:
        c = non_blocking_certificate(surface, cfg, blockers, T)
        print(f"  T={T:>2}: segments {c.lhs:>4} vs coverable {c.rhs:>4} -> {c.verdict}")


if __name__ == "__main__":
    main()
