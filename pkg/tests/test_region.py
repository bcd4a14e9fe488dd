import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spherecarve.errors import KeepPointOnPlane
from spherecarve.geometry import Plane
from spherecarve.oracle import mc_plane_region_area
from spherecarve.region import (
    Ball,
    Region,
    apply_cut,
    clipped_section,
    contains,
    cut_cost,
    disk_polygon_area,
    outer_surface_area,
    section_area,
    spherical_area,
)

UNIT = Ball(np.zeros(3), 1.0)
EX, EY, EZ = np.eye(3)
CLIPPED_DISK = math.pi * 0.75 - (0.75 * math.acos(0.5 / math.sqrt(0.75)) - 0.5 * math.sqrt(0.5))


def random_region(rng, k=None):
    """Seeded ball cut by ``k`` planes that all keep the center."""
    ball = Ball(rng.normal(size=3), rng.uniform(0.5, 3.0))
    region = Region.fresh(ball)
    k = rng.integers(0, 7) if k is None else k
    for _ in range(k):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        t = rng.uniform(0.05, 0.9) * ball.radius
        region, _ = apply_cut(region, Plane(u, float(u @ ball.center) + t), ball.center)
    return region


def random_plane(rng, ball):
    u = rng.normal(size=3)
    u /= np.linalg.norm(u)
    s = rng.uniform(-0.95, 0.95) * ball.radius
    return Plane(u, float(u @ ball.center) + s)


def test_fresh_ball_cut_costs():
    assert cut_cost(Region.fresh(UNIT), Plane(EZ, 0.5)) == pytest.approx(0.75 * math.pi, rel=1e-12)
    assert cut_cost(Region.fresh(Ball(np.zeros(3), 2.0)), Plane(EZ, 1.0)) == pytest.approx(3 * math.pi)


def test_clipped_disk_example():
    region, _ = apply_cut(Region.fresh(UNIT), Plane(EX, 0.5), np.zeros(3))
    got = cut_cost(region, Plane(EY, 0.5))
    assert got == pytest.approx(CLIPPED_DISK, rel=1e-12)
    assert got == pytest.approx(1.99325, abs=5e-5)  # quoted value is truncated


def test_apply_cut_examples():
    region, cost = apply_cut(Region.fresh(UNIT), Plane(EZ, 0.5), np.zeros(3))
    assert cost == pytest.approx(0.75 * math.pi)
    assert len(region) == 1
    again, cost2 = apply_cut(region, Plane(EZ, 0.5), np.zeros(3))
    assert cost2 == 0.0
    outside, cost3 = apply_cut(Region.fresh(UNIT), Plane(EZ, 2.0), np.zeros(3))
    assert cost3 == 0.0
    assert contains(outside, [0, 0, 0.99])


def test_apply_cut_orients_toward_keep_point():
    region, cost = apply_cut(Region.fresh(UNIT), Plane(EZ, 0.5), np.array([0, 0, 0.9]))
    assert cost == pytest.approx(0.75 * math.pi)
    assert np.allclose(region.normals[0], -EZ)
    assert not contains(region, np.zeros(3))


def test_keep_point_on_plane_raises():
    with pytest.raises(KeepPointOnPlane):
        apply_cut(Region.fresh(UNIT), Plane(EZ, 0.0), np.zeros(3))


def test_outer_surface_examples():
    keep = np.array([0, 0, -0.5])
    assert outer_surface_area(Region.fresh(UNIT)) == pytest.approx(4 * math.pi)
    half, _ = apply_cut(Region.fresh(UNIT), Plane(EZ, 0.0), keep)
    assert outer_surface_area(half) == pytest.approx(3 * math.pi)
    zone, _ = apply_cut(Region.fresh(UNIT), Plane(EZ, 0.5), keep)
    assert outer_surface_area(zone) == pytest.approx(3.75 * math.pi)


def test_spherical_area_two_disjoint_caps():
    region = Region.fresh(UNIT)
    region, _ = apply_cut(region, Plane(EZ, 0.5), np.zeros(3))
    region, _ = apply_cut(region, Plane(-EZ, 0.5), np.zeros(3))
    # band between z = -0.5 and z = 0.5
    assert spherical_area(region) == pytest.approx(2 * math.pi * 1.0, rel=1e-12)


def test_contains_examples():
    assert contains(Region.fresh(UNIT), np.zeros(3))
    cut, _ = apply_cut(Region.fresh(UNIT), Plane(EZ, 0.5), np.zeros(3))
    assert not contains(cut, [0, 0, 0.9])


def test_disk_polygon_area_limits():
    square = [(-2, -2), (2, -2), (2, 2), (-2, 2)]
    assert disk_polygon_area(square, 1.0) == pytest.approx(math.pi)
    small = [(-0.1, -0.1), (0.1, -0.1), (0.1, 0.1), (-0.1, 0.1)]
    assert disk_polygon_area(small, 1.0) == pytest.approx(0.04)
    half = [(0, -2), (2, -2), (2, 2), (0, 2)]
    assert disk_polygon_area(half, 1.0) == pytest.approx(0.5 * math.pi)


@pytest.mark.parametrize("seed", range(100))
def test_cut_cost_matches_monte_carlo(seed):
    rng = np.random.default_rng(seed)
    region = random_region(rng)
    plane = random_plane(rng, region.ball)
    exact = section_area(region, plane)
    est = mc_plane_region_area(region, plane, samples=1_000_000, seed=seed)
    assert est.agrees(exact, k=3.0, floor=1e-12)


@given(seed=st.integers(0, 2**32 - 1))
def test_cell_section_matches_clipping_reference(seed):
    rng = np.random.default_rng(seed)
    region = random_region(rng)
    plane = random_plane(rng, region.ball)
    ref = clipped_section(region, plane)
    want = 0.0 if ref is None else disk_polygon_area(ref[1], ref[0])
    assert section_area(region, plane) == pytest.approx(want, rel=1e-9, abs=1e-12)


@given(seed=st.integers(0, 2**32 - 1))
def test_cut_then_same_plane_costs_zero(seed):
    rng = np.random.default_rng(seed)
    region = random_region(rng)
    plane = random_plane(rng, region.ball)
    keep = region.ball.center + 0.0
    if abs(plane.normal @ keep - plane.offset) < 1e-6:
        return
    after, _ = apply_cut(region, plane, keep)
    assert cut_cost(after, after.plane(-1)) == 0.0


@given(seed=st.integers(0, 2**32 - 1))
def test_containment_and_surface_are_monotone(seed):
    rng = np.random.default_rng(seed)
    region = random_region(rng, k=0)
    keep = region.ball.center
    pts = keep + region.ball.radius * rng.uniform(-1, 1, size=(200, 3))
    before_in = np.array([contains(region, p) for p in pts])
    surface = outer_surface_area(region)
    for _ in range(5):
        prev = region
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        t = rng.uniform(0.05, 0.9) * region.ball.radius
        region, cost = apply_cut(region, Plane(u, float(u @ keep) + t), keep)
        now_in = np.array([contains(region, p) for p in pts])
        assert not np.any(now_in & ~before_in)
        before_in = now_in
        # the new face is no larger than the boundary it replaces
        s = outer_surface_area(region)
        assert s <= surface * (1 + 1e-9) + 1e-12
        assert cost <= outer_surface_area(prev) - (s - cost) + 1e-9
        surface = s
