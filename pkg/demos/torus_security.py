"""Flat tori are secure: four midpoints block every geodesic between two points.

Run:  python3 demos/torus_security.py
"""
from __future__ import annotations

from geosecure.blocking import search_min_blocking, uniform_grid, verify_blocking_finite
from geosecure.core import Configuration, count_connecting, count_joining
from geosecure.flat_torus import unit_torus


def main():
    torus = unit_torus(2)
    cfg = Configuration("0,0", "1/2,0")

    print("Segments from (0,0) to (1/2,0) on the unit square torus")
    for T in (1, 2, 5, 10):
        print(f"  T={T:>2}: joining {count_joining(torus, cfg, T):>4}, "
              f"connecting {count_connecting(torus, cfg, T):>4}")

    mids = torus.midpoint_blocking_set(cfg)
    print("\nMidpoint set:", ", ".join(map(str, mids)))
    cert = torus.certify_blocking_all(cfg, mids)
    print(f"Certificate scope: {cert.scope}, blocked: {cert.blocked}")
    t, k = torus.blocking_witness(cfg, (3, 2), mids)
    print(f"The segment with lattice shift (3,2) meets blocker {mids[k]} at parameter {t}")

    rep = verify_blocking_finite(torus, cfg, mids[:3], 3)
    print(f"\nDropping one midpoint leaves {len(rep.unblocked)} unblocked segments up to T=3,"
          f" e.g. displacement {rep.first_unblocked()}")

    cands = uniform_grid(torus, 4, exclude=[cfg.x, cfg.y])
    bound = search_min_blocking(torus, cfg, 3, cands, 4)
    print(f"Exhaustive search over the quarter grid: smallest blocking set has size {bound.lower}")


if __name__ == "__main__":
    main()
