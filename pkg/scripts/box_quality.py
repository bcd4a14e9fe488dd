"""Compare min_volume_box against the Euler-angle grid search.

    python3 scripts/box_quality.py --count 20 --max-n 50
"""
import argparse
import time
from dataclasses import dataclass

import numpy as np

from spherecarve.boxing import min_volume_box
from spherecarve.instances import random_hull
from spherecarve.oracle import grid_min_box, grid_slack


@dataclass
class BoxConfig:
    count: int = 20
    max_n: int = 50
    seed: int = 700
    resolution: float = 2.0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--max-n", type=int, default=50)
    ap.add_argument("--seed", type=int, default=700)
    ap.add_argument("--resolution", type=float, default=2.0)
    a = ap.parse_args()
    cfg = BoxConfig(a.count, a.max_n, a.seed, a.resolution)
    rng = np.random.default_rng(cfg.seed)
    print(f"{'n':>4} {'ours':>12} {'grid':>12} {'ours/grid':>10} {'slack':>10} {'ms':>8}")
    worst = 0.0
    for i in range(cfg.count):
        n = int(rng.integers(6, cfg.max_n + 1))
        poly = random_hull(n, cfg.seed + i)
        t0 = time.perf_counter()
        ours = min_volume_box(poly).volume
        ms = 1e3 * (time.perf_counter() - t0)
        g = grid_min_box(poly, cfg.resolution)
        worst = max(worst, ours / g.volume)
        print(f"{n:4d} {ours:12.6f} {g.volume:12.6f} {ours / g.volume:10.6f} "
              f"{grid_slack(g, cfg.resolution):10.6f} {ms:8.1f}")
    print(f"worst ours/grid {worst:.6f}")


if __name__ == "__main__":
    main()
