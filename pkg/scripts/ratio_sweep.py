"""Cost ratio sweep over random hulls, with per-n means of ratio_normalized.

    python3 scripts/ratio_sweep.py --sizes 8,16,32,64,128,256,512,1024 --seeds 5 --out sweep.csv
"""
import argparse
import csv
import multiprocessing as mp
import statistics
from dataclasses import dataclass

from spherecarve.cli import BenchJob, _bench_one


@dataclass
class SweepConfig:
    sizes: tuple = (8, 16, 32, 64, 128, 256, 512, 1024)
    seeds: int = 5
    generator: str = "random_hull"
    workers: int = 1
    out: str = "sweep.csv"


def run(cfg: SweepConfig) -> list[dict]:
    jobs = [BenchJob(cfg.generator, n, s, None, None, None, False)
            for n in cfg.sizes for s in range(cfg.seeds)]
    if cfg.workers > 1:
        with mp.get_context("spawn").Pool(cfg.workers) as pool:
            return pool.map(_bench_one, jobs, chunksize=1)
    return [_bench_one(j) for j in jobs]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="8,16,32,64,128,256,512,1024")
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--generator", default="random_hull")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="sweep.csv")
    a = ap.parse_args()
    cfg = SweepConfig(tuple(int(x) for x in a.sizes.split(",")), a.seeds, a.generator,
                      a.workers, a.out)
    rows = run(cfg)
    with open(cfg.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    means = {n: statistics.fmean(float(r["ratio_normalized"]) for r in rows if r["n"] == n)
             for n in cfg.sizes}
    for n, m in means.items():
        wall = max(float(r["wall_ms"]) for r in rows if r["n"] == n)
        print(f"n={n:5d}  mean ratio_normalized {m:.4f}  max wall {wall:8.1f} ms")
    med = statistics.median(means.values())
    print(f"max/median {max(means.values()) / med:.3f}  "
          f"min raw ratio {min(float(r['ratio']) for r in rows):.3f}")


if __name__ == "__main__":
    main()
