import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from spherecarve.boxing import (
    LowerBounds,
    OrientedBox,
    box_cut_phase,
    lower_bounds,
    min_area_rectangle,
    min_volume_box,
)
from spherecarve.cuts import CutKind
from spherecarve.errors import DegenerateGeometry
from spherecarve.geometry import ConvexPolyhedron, signed_distance
from spherecarve.instances import random_hull, random_rotation
from spherecarve.oracle import grid_min_box, grid_slack, mc_region_volume
from spherecarve.region import Ball, Region, apply_cut, outer_surface_area
from spherecarve.separation import d_separation, d_separation_radius_sq


def box(lo, hi):
    pts = [[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])]
    return ConvexPolyhedron.from_points(pts)


PARITY_TET = ConvexPolyhedron.from_points(
    0.5 * np.array([[1, 1, 1], [-1, -1, 1], [-1, 1, -1], [1, -1, -1]], dtype=float))


def assert_frame(b: OrientedBox):
    assert np.allclose(b.axes @ b.axes.T, np.eye(3), atol=1e-9)


def test_min_area_rectangle_square():
    pts = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5]], dtype=float)
    area, angle = min_area_rectangle(pts)
    assert area == pytest.approx(1.0)


def test_box_of_axis_aligned_cube():
    b = min_volume_box(box([-1] * 3, [1] * 3))
    assert b.volume == pytest.approx(8.0, rel=1e-12)
    assert_frame(b)
    assert np.allclose(np.abs(b.axes), np.eye(3)[np.argmax(np.abs(b.axes), axis=1)], atol=1e-9)


def test_box_of_parity_tetrahedron():
    b = min_volume_box(PARITY_TET)
    grid = grid_min_box(PARITY_TET)
    assert b.volume == pytest.approx(1.0, rel=1e-6)
    assert grid.volume == pytest.approx(1.0, rel=1e-9)


def test_box_of_rotated_cube():
    rot = random_rotation(11)
    b = min_volume_box(box([-1] * 3, [1] * 3).transformed(rot))
    assert b.volume == pytest.approx(8.0, rel=1e-6)
    # each box axis is one of the rotated coordinate axes
    align = np.abs(b.axes @ rot)
    assert np.allclose(np.sort(align, axis=1)[:, -1], 1.0, atol=1e-6)


def test_flat_input_rejected():
    flat = ConvexPolyhedron._assemble(
        np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 1e-14]], dtype=float),
        [[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]])
    with pytest.raises(DegenerateGeometry):
        min_volume_box(flat)


def test_box_surface_and_bounds_arithmetic():
    b = min_volume_box(box([-1] * 3, [1] * 3))
    assert b.surface_area == pytest.approx(24.0)
    lb = lower_bounds(box([-1] * 3, [1] * 3), Ball(np.zeros(3), 2.0), b)
    assert lb.box_bound == pytest.approx(4.0)
    assert LowerBounds(None, math.pi, 0.54 / 6).combined == pytest.approx(math.pi)
    assert LowerBounds(3 * math.pi, None, 22 / 6).combined == pytest.approx(3 * math.pi)


def test_face_planes_largest_first():
    b = OrientedBox(np.zeros(3), np.eye(3), np.array([1.0, 3.0, 2.0]))
    order = [(k, s) for k, s, _ in b.face_planes()]
    assert order == [(0, 1), (0, -1), (2, 1), (2, -1), (1, 1), (1, -1)]


def test_box_phase_centered_tiny_cube():
    cube = box([-0.1] * 3, [0.1] * 3)
    ball = Ball(np.zeros(3), 1.0)
    region, cuts = box_cut_phase(Region.fresh(ball), cube, min_volume_box(cube))
    assert len(cuts) == 6 and all(c.kind is CutKind.BOX for c in cuts)
    assert sum(c.realized_cost for c in cuts) <= 4 * math.pi


def test_box_phase_cornered_slab():
    # the slab's far corners sit at distance √6, so the ball needs R > √6
    slab = box([1, -1, -1], [2, 1, 1])
    ball = Ball(np.zeros(3), 2.5)
    region, dcost = apply_cut(Region.fresh(ball), d_separation(slab, ball), slab.centroid)
    r_sq = d_separation_radius_sq(slab, ball)
    assert dcost == pytest.approx(math.pi * r_sq)
    assert signed_distance(region.plane(0), ball.center) > 0  # o left behind
    surface = outer_surface_area(region)
    assert surface <= 3 * math.pi * r_sq
    region, cuts = box_cut_phase(region, slab, min_volume_box(slab))
    six = sum(c.realized_cost for c in cuts)
    assert six <= surface <= 3 * math.pi * r_sq


def test_box_phase_of_a_box_leaves_the_box():
    p = box([-0.3, -0.2, -0.1], [0.3, 0.2, 0.1])
    region, _ = box_cut_phase(Region.fresh(Ball(np.zeros(3), 1.0)), p, min_volume_box(p))
    est = mc_region_volume(region, samples=400_000, seed=1)
    assert est.agrees(p.volume(), k=3.0)


@given(seed=st.integers(0, 10_000), n=st.integers(4, 80))
def test_box_contains_hull_and_is_orthonormal(seed, n):
    poly = random_hull(n, seed)
    b = min_volume_box(poly)
    assert_frame(b)
    assert all(b.contains(v, eps=1e-9) for v in poly.vertices)
    assert b.volume <= 1.0 + 1e-9  # no worse than the AABB of the radius-0.5 sphere


@given(seed=st.integers(0, 10_000), n=st.integers(4, 50))
def test_box_shadow_bound(seed, n):
    """P's shadow along the axis normal to B's largest face covers half that face."""
    poly = random_hull(n, seed)
    b = min_volume_box(poly)
    e = b.half_extents
    big = [4 * e[(k + 1) % 3] * e[(k + 2) % 3] for k in range(3)]
    k = int(np.argmax(big))
    u, v = b.axes[(k + 1) % 3], b.axes[(k + 2) % 3]
    shadow = ConvexHull(np.stack([poly.vertices @ u, poly.vertices @ v], axis=1)).volume
    assert shadow >= 0.5 * big[k] * (1 - 1e-9)


@pytest.mark.parametrize("seed", range(4))
def test_box_matches_grid_oracle(seed):
    poly = random_hull(12 + 9 * seed, seed)
    b = min_volume_box(poly)
    g = grid_min_box(poly)
    assert b.volume <= g.volume * (1 + 1e-6) + grid_slack(g)
    assert b.volume <= 1.10 * g.volume
