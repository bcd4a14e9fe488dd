"""Acceptance criteria 1-11, one test each, with one PASS/FAIL line per criterion."""
import csv
import io
import math
import time

import numpy as np
from scipy.spatial import ConvexHull

from conftest import record_criterion, record_table
from spherecarve.cli import BenchJob, _bench_one
from spherecarve.boxing import min_volume_box
from spherecarve.carving import face_round_splits
from spherecarve.cuts import CutKind
from spherecarve.geometry import Plane, support_margin
from spherecarve.instances import expected_round_bound, random_cornered, random_hull
from spherecarve.oracle import (
    grid_min_box,
    grid_slack,
    mc_outer_surface_area,
    mc_region_volume,
    sample_separating_planes,
    sampled_closest_point,
)
from spherecarve.plan import build_plan
from spherecarve.planio import dumps_plan
from spherecarve.region import Ball, Region, apply_cut, cut_cost, section_area
from spherecarve.separation import Placement, d_separation, d_separation_radius_sq

BENCH_SIZES = (8, 16, 32, 64, 128, 256, 512, 1024)


def test_criterion_01_fresh_ball_cost():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        R = float(rng.uniform(0.01, 100.0))
        d = float(rng.uniform(-0.999, 0.999)) * R
        c = rng.normal(size=3) * R
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        got = cut_cost(Region.fresh(Ball(c, R)), Plane(u, float(u @ c) + d))
        want = math.pi * (R * R - d * d)
        worst = max(worst, abs(got - want) / want)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 1.0
    record_criterion(1, ok, f"max rel err {worst:.2e} over 1000 cuts, {dt:.2f} s")
    assert ok


def test_criterion_02_d_separation():
    t0 = time.perf_counter()
    worst_angle = worst_offset = 0.0
    lemma_failures = 0
    for i in range(100):
        n = 5 + (7 * i) % 46
        poly, ball = random_cornered(n, 500 + i)
        plane = d_separation(poly, ball)
        x = sampled_closest_point(poly, ball.center, refine=True)
        u = (x - ball.center) / np.linalg.norm(x - ball.center)
        ref = Plane(u, float(u @ x))
        cos = float(np.clip(plane.normal @ ref.normal, -1.0, 1.0))
        worst_angle = max(worst_angle, math.acos(cos))
        worst_offset = max(worst_offset, abs(plane.offset - ref.offset))
        best = math.pi * d_separation_radius_sq(poly, ball)
        for pl in sample_separating_planes(poly, ball.center, count=1000, seed=i):
            s = pl.normal @ ball.center - pl.offset
            fresh = math.pi * max(ball.radius ** 2 - s * s, 0.0)
            if fresh < best * (1 - 1e-12):
                lemma_failures += 1
                break
    dt = time.perf_counter() - t0
    ok = worst_angle <= 1e-6 and worst_offset <= 1e-6 and lemma_failures == 0 and dt < 30.0
    record_criterion(2, ok, f"max angle {worst_angle:.1e} rad, max offset {worst_offset:.1e}, "
                            f"cheaper sampled planes on {lemma_failures}/100, {dt:.1f} s")
    assert ok


def test_criterion_03_face_round_balance():
    t0 = time.perf_counter()
    bad_splits = bad_rounds = 0
    max_faces = 0
    for i, n in enumerate(np.linspace(8, 1000, 50).astype(int)):
        poly = random_hull(int(n), 300 + i)
        max_faces = max(max_faces, poly.n_faces)
        depth = 0
        for fs, _u, _chains, (a, b) in face_round_splits(poly, seed=i):
            if min(len(a), len(b)) < len(fs) // 2:
                bad_splits += 1
            depth = max(depth, fs.depth)
        if depth + 1 > expected_round_bound(poly.n_faces):
            bad_rounds += 1
    dt = time.perf_counter() - t0
    ok = bad_splits == 0 and bad_rounds == 0 and dt < 60.0
    record_criterion(3, ok, f"{bad_splits} unbalanced splits, {bad_rounds} round-count overruns, "
                            f"up to {max_faces} faces, {dt:.1f} s")
    assert ok


def test_criterion_04_edge_coverage_and_safety(pool):
    bad_cover, worst = [], math.inf
    for c in pool:
        hits = np.zeros(c.poly.n_edges, dtype=int)
        for cut in c.plan.cuts:
            if cut.kind is CutKind.EDGE:
                hits[cut.source_feature[1]] += 1
            worst = min(worst, support_margin(cut.plane, c.poly) / c.poly.scale)
        if not np.all(hits == 1):
            bad_cover.append(c.name)
    ok = not bad_cover and worst >= -1e-9
    record_criterion(4, ok, f"{len(pool)} plans, coverage failures {bad_cover}, "
                            f"min margin/scale {worst:.1e}")
    assert ok


def _flush(plan, k, plane):
    """True when an earlier cut already lies in ``plane``."""
    for c in plan.cuts[:k]:
        if (np.abs(c.plane.normal - plane.normal).max() <= 1e-9
                and abs(c.plane.offset - plane.offset) <= 1e-9 * max(1.0, abs(plane.offset))):
            return True
    return False


def test_criterion_05_cap_exactness(pool):
    failures, flush, faces = [], 0, 0
    for c in pool:
        region = c.report.final_region
        for k, cut in enumerate(c.plan.cuts):
            if cut.kind is not CutKind.FACE:
                continue
            f = cut.source_feature[1]
            area = c.poly.face_area(f)
            faces += 1
            if abs(cut.realized_cost - area) <= 1e-6 * area:
                continue
            # a face flush with a box or D-separation plane is already exposed
            exposed = abs(section_area(region, c.poly.face_plane(f)) - area) <= 1e-6 * area
            if cut.realized_cost == 0.0 and exposed and _flush(c.plan, k, cut.plane):
                flush += 1
                continue
            failures.append((c.name, f, cut.realized_cost, area))
    ok = not failures
    record_criterion(5, ok, f"{faces} face cuts, {flush} flush with an earlier cut, "
                            f"failures {failures[:3]}")
    assert ok


def test_criterion_06_surface_majorization(pool):
    failures = []
    for i, c in enumerate(pool):
        six = c.plan.six_cut_cost
        entering = Region.fresh(c.ball)
        if c.plan.placement is Placement.CORNERED:
            entering, _ = apply_cut(entering, c.plan.cuts[0].plane, c.poly.centroid)
            cap = 3.0 * c.plan.bounds.cornered_bound
        else:
            cap = 4.0 * math.pi * c.ball.radius ** 2
        mc = mc_outer_surface_area(entering, 200_000, seed=i)
        exact = c.plan.surface_in
        if not (six <= exact * (1 + 1e-9) and six <= 1.02 * mc.value and six <= cap * (1 + 1e-9)):
            failures.append((c.name, six, exact, mc.value, cap))
    ok = not failures
    record_criterion(6, ok, f"{len(pool)} instances, failures {failures[:3]}")
    assert ok


def test_criterion_07_end_to_end(pool):
    failures = []
    worst_hull = 0.0
    for i, c in enumerate(pool):
        region = c.report.final_region
        V = c.poly.volume()
        box = (region.cell.vertices.min(axis=0), region.cell.vertices.max(axis=0))
        est = mc_region_volume(region, 200_000, seed=i, box=box)
        vol_ok = abs(est.value - V) <= max(1e-3 * V, 3.0 * est.std_error)
        worst_hull = max(worst_hull, abs(ConvexHull(region.cell.vertices).volume - V) / V)
        if not vol_ok or c.report.unexposed_faces:
            failures.append((c.name, est.value, V, len(c.report.unexposed_faces)))
    ok = not failures and max(c.plan.n_vertices for c in pool) <= 500
    record_criterion(7, ok, f"{len(pool)} instances, n up to 500, failures {failures[:3]}, "
                            f"exact cell volume rel err {worst_hull:.1e}")
    assert ok


def test_criterion_08_ratio_boundedness(tmp_path):
    t0 = time.perf_counter()
    rows = [_bench_one(BenchJob("random_hull", n, s, None, None, None, False))
            for n in BENCH_SIZES for s in range(5)]
    dt = time.perf_counter() - t0
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    (tmp_path / "ratio.csv").write_text(buf.getvalue())
    means = {n: float(np.mean([float(r["ratio_normalized"]) for r in rows if r["n"] == n]))
             for n in BENCH_SIZES}
    summary = "\n".join(f"n={n:5d}  mean ratio_normalized {m:.4f}" for n, m in means.items())
    record_table(buf.getvalue() + summary + "\n")
    med = float(np.median(list(means.values())))
    spread = max(means.values()) / med
    min_ratio = min(float(r["ratio"]) for r in rows)
    ok = spread <= 2.0 and min_ratio >= 1.0 and dt < 600.0
    record_criterion(8, ok, f"max/median of per-n means {spread:.3f}, min raw ratio "
                            f"{min_ratio:.3f}, {dt:.0f} s")
    assert ok


def test_criterion_09_box_quality():
    failures = []
    for i in range(20):
        poly = random_hull(6 + 2 * i, 700 + i)
        ours = min_volume_box(poly).volume
        g = grid_min_box(poly)
        if ours > g.volume * (1 + 1e-6) + grid_slack(g):
            failures.append((poly.n_vertices, ours, g.volume))
    ok = not failures
    record_criterion(9, ok, f"20 hulls n <= 44, failures {failures[:3]}")
    assert ok


def test_criterion_10_determinism_and_scaling():
    cases = [(random_hull(120, 9), Ball(np.zeros(3), 1.0)), random_cornered(50, 10)]
    identical = all(dumps_plan(build_plan(p, b, seed=3), p) == dumps_plan(build_plan(p, b, seed=3), p)
                    for p, b in cases)
    worst = 0.0
    for p, b in cases:
        base = build_plan(p, b, seed=3).total_cost
        for s in (0.1, 7.0):
            scaled = build_plan(p.transformed(scale=s), Ball(b.center * s, b.radius * s), seed=3)
            worst = max(worst, abs(scaled.total_cost / (s * s * base) - 1.0))
    ok = identical and worst <= 1e-9
    record_criterion(10, ok, f"byte-identical {identical}, max s^2 scaling rel err {worst:.1e}")
    assert ok


def test_criterion_11_performance():
    poly = random_hull(1000, 11)
    t0 = time.perf_counter()
    plan = build_plan(poly, Ball(np.zeros(3), 1.0), seed=0)
    dt = time.perf_counter() - t0
    ok = dt < 10.0
    record_criterion(11, ok, f"n=1000 ({poly.n_faces} faces, {len(plan.cuts)} cuts) in {dt:.2f} s")
    assert ok

