"""Command-line interface: ``plan``, ``replay``, ``bench`` and ``gen``."""
from __future__ import annotations

import argparse
import csv
import logging
import multiprocessing as mp
import os
import sys
import time
from dataclasses import dataclass

from .errors import CarveError
from .geometry import TolerancePolicy
from .instances import GENERATORS, InstanceSpec
from .offio import write_off
from .plan import build_plan, replay
from .planio import IoError, export_plan, export_snapshots, import_plan
from .separation import Placement

EXIT_OK, EXIT_CERT, EXIT_INPUT = 0, 1, 2
BENCH_COLUMNS = ("n", "seed", "cornered", "LB", "cost", "ratio", "ratio_normalized", "wall_ms")

class InputError(Exception):
    pass


def _center(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--center takes x,y,z")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --center {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _tolerance(args) -> TolerancePolicy:
    return TolerancePolicy() if args.tolerance is None else TolerancePolicy(abs_eps=args.tolerance)


def _spec(args) -> InstanceSpec:
    if args.input:
        return InstanceSpec("file", path=args.input, seed=args.seed,
                            center=args.center, radius=args.radius)
    if not args.generator:
        raise InputError("give --input FILE or --generator NAME")
    n = args.n[0] if isinstance(args.n, list) else args.n
    if args.generator.startswith("random") and n is None:
        raise InputError(f"--generator {args.generator} needs --n")
    return InstanceSpec(args.generator, n=n, seed=args.seed, center=args.center,
                        radius=args.radius)


def _resolve(spec: InstanceSpec):
    try:
        return spec.resolve()
    except (CarveError, OSError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def cmd_plan(args) -> int:
    tol = _tolerance(args)
    poly, ball = _resolve(_spec(args))
    try:
        plan = build_plan(poly, ball, seed=args.seed, tol=tol)
    except CarveError as exc:
        raise InputError(str(exc)) from exc
    report = replay(plan, poly, ball, tol)
    print(report.summary(), file=sys.stderr)
    print(f"cuts={len(plan.cuts)} cost={plan.total_cost:.12g} LB={plan.bounds.combined:.12g} "
          f"ratio={plan.ratio:.6g} ratio_normalized={plan.ratio_normalized:.6g}", file=sys.stderr)
    if not report.ok:
        return EXIT_CERT
    out = args.output or "plan.json"
    export_plan(plan, poly, out)
    if args.snapshots_every:
        snap_dir = os.path.splitext(out)[0] + "_snapshots"
        paths = export_snapshots(plan, poly, ball, args.snapshots_every, snap_dir, tol)
        print(f"{len(paths)} snapshots in {snap_dir}", file=sys.stderr)
    return EXIT_OK


def cmd_replay(args) -> int:
    if not args.input:
        raise InputError("replay needs --input PLAN.json")
    try:
        plan, poly, ball = import_plan(args.input)
    except (IoError, CarveError) as exc:
        raise InputError(str(exc)) from exc
    report = replay(plan, poly, ball, _tolerance(args))
    print(report.summary())
    return EXIT_OK if report.ok else EXIT_CERT


@dataclass(frozen=True)
class BenchJob:
    generator: str
    n: int
    seed: int
    center: tuple | None
    radius: float | None
    abs_eps: float | None
    verify: bool


def _bench_one(job: BenchJob) -> dict:
    tol = TolerancePolicy() if job.abs_eps is None else TolerancePolicy(abs_eps=job.abs_eps)
    poly, ball = InstanceSpec(job.generator, n=job.n, seed=job.seed, center=job.center,
                              radius=job.radius).resolve()
    t0 = time.perf_counter()
    plan = build_plan(poly, ball, seed=job.seed, tol=tol)
    wall_ms = 1e3 * (time.perf_counter() - t0)
    row = {"n": job.n, "seed": job.seed,
           "cornered": int(plan.placement is Placement.CORNERED),
           "LB": f"{plan.bounds.combined:.12g}", "cost": f"{plan.total_cost:.12g}",
           "ratio": f"{plan.ratio:.9g}", "ratio_normalized": f"{plan.ratio_normalized:.9g}",
           "wall_ms": f"{wall_ms:.1f}"}
    if job.verify:
        from .oracle import mc_region_volume
        report = replay(plan, poly, ball, tol)
        est = mc_region_volume(report.final_region, samples=200_000, seed=job.seed)
        row["certified"] = int(report.ok)
        row["volume_ok"] = int(est.agrees(poly.volume(), k=3.0, floor=1e-3 * poly.volume()))
    return row


def cmd_bench(args) -> int:
    generator = args.generator or "random_hull"
    sizes = args.n or [8, 16, 32, 64, 128, 256, 512, 1024]
    seeds = range(args.seed, args.seed + args.seeds)
    jobs = [BenchJob(generator, n, s, args.center, args.radius, args.tolerance, args.verify)
            for n in sizes for s in seeds]
    workers = args.workers or max(1, min(os.cpu_count() or 1, len(jobs)))
    try:
        if workers > 1:
            with mp.get_context("spawn").Pool(workers) as pool:
                rows = pool.map(_bench_one, jobs, chunksize=1)
        else:
            rows = [_bench_one(j) for j in jobs]
    except CarveError as exc:
        raise InputError(str(exc)) from exc
    columns = list(BENCH_COLUMNS) + (["certified", "volume_ok"] if args.verify else [])
    fh = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()
    if args.verify and not all(r["certified"] and r["volume_ok"] for r in rows):
        return EXIT_CERT
    return EXIT_OK


def cmd_gen(args) -> int:
    poly, ball = _resolve(_spec(args))
    c = ", ".join(f"{x:.17g}" for x in ball.center)
    comment = f"{args.generator} n={args.n} seed={args.seed}\nball center {c} radius {ball.radius:.17g}"
    if args.output:
        write_off(args.output, poly, comment=comment)
    else:
        from .offio import dump_off
        sys.stdout.write(dump_off(poly.vertices, poly.faces, comment))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spherecarve", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, multi_n=False):
        sp.add_argument("--input", help="OFF mesh (plan, gen) or plan document (replay)")
        sp.add_argument("--generator", choices=GENERATORS)
        if multi_n:
            sp.add_argument("--n", type=_int_list, help="comma-separated vertex counts")
        else:
            sp.add_argument("--n", type=int)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--radius", type=float, help="ball radius (default by generator)")
        sp.add_argument("--center", type=_center, help="ball center x,y,z")
        sp.add_argument("--output")
        sp.add_argument("--tolerance", type=float, help="absolute length tolerance")

    sp = sub.add_parser("plan", help="build, certify and export a cutting plan")
    common(sp)
    sp.add_argument("--snapshots-every", type=int, default=0, metavar="K")
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("replay", help="import and certify a plan document")
    common(sp)
    sp.set_defaults(func=cmd_replay)

    sp = sub.add_parser("bench", help="ratio table over an instance family, as CSV")
    common(sp, multi_n=True)
    sp.add_argument("--seeds", type=int, default=5, help="seeds per size")
    sp.add_argument("--workers", type=int, default=0)
    sp.add_argument("--verify", action="store_true", help="replay and Monte Carlo volume check")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("gen", help="write a generated instance as OFF")
    common(sp)
    sp.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, IoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
