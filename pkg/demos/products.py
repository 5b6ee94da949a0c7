"""Products of secure spaces: blocking sets built from the factors.

Run:  python3 demos/products.py
"""
from __future__ import annotations

from fractions import Fraction

from geosecure.blocking import verify_blocking_finite
from geosecure.core import Configuration, count_joining
from geosecure.flat_torus import unit_torus
from geosecure.product import product_space


def main():
    circle = unit_torus(1)
    square = product_space(circle, circle)
    loop = Configuration("0|0", "0|0")
    for T in (Fraction(1), Fraction(3, 2), Fraction(2)):
        print(f"circle x circle, loops at the origin, T={T}: {count_joining(square, loop, T)}")

    B = square.product_blocking_set(loop, ["1/2"], ["1/2"])
    print("\nBlocking set from the factor midpoints:", [f"{a}|{b}" for a, b in B])
    rep = verify_blocking_finite(square, loop, B, 4)
    print(f"Blocks all {len(rep.hits)} connecting segments up to T=4: {rep.blocked}")

    rep = verify_blocking_finite(square, loop, B[:1], 4)
    print(f"Without the axis points, unblocked: {rep.unblocked[:3]}")


if __name__ == "__main__":
    main()
