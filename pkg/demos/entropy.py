"""Averaged counts: polynomial growth on a torus, exponential on genus 2.

Run:  python3 demos/entropy.py   (about a minute)
"""
from __future__ import annotations

from geosecure.analysis import berger_bott_check, mane_estimate
from geosecure.flat_torus import unit_torus
from geosecure.hyperbolic import make_genus2


def main():
    torus = unit_torus(2)
    fit = mane_estimate(torus, 200, [20, 24, 28, 32, 36, 40], rng_seed=0)
    print(f"torus: fitted exponential rate {fit.parameter:.4f} (polynomial growth gives ~0)")
    bb = berger_bott_check(torus, "0,0", 20, sample_count=200)
    print(f"torus: average count x area {bb.extra['estimate']:.1f} "
          f"vs ball area {bb.extra['volume']:.1f}")

    surface = make_genus2()
    fit = mane_estimate(surface, 100, [6, 7, 8, 9, 10], rng_seed=0)
    print(f"\ngenus 2: fitted rate {fit.parameter:.3f} (curvature -1 gives 1)")
    bb = berger_bott_check(surface, "c0", 8, sample_count=100)
    print(f"genus 2: estimate {bb.extra['estimate']:.1f} vs ball area {bb.extra['volume']:.1f}"
          f" -> {'ok' if bb.satisfied else 'violated'}")


if __name__ == "__main__":
    main()
