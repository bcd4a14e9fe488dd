"""Minimum-volume bounding box, the box-cutting phase, and lower bounds.

The box search enumerates candidate axes (face normals, cross products of
edge-direction pairs, principal axes), fits the minimum-area rectangle of the
projection onto the orthogonal plane for each, then polishes the best box by
local rotations and per-face rectangle refits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateGeometry
from .geometry import DEFAULT_TOL, ConvexPolyhedron, Plane, TolerancePolicy, rotate
from .cuts import Cut, CutKind
from .region import Ball, Region, apply_cut

EDGE_PAIR_BUDGET = 6000
SCREEN_ANGLES = 12
SCREEN_KEEP = 64


@dataclass(frozen=True, eq=False)
class OrientedBox:
    center: np.ndarray
    axes: np.ndarray          # rows are orthonormal axes
    half_extents: np.ndarray

    @property
    def volume(self) -> float:
        return float(8.0 * np.prod(self.half_extents))

    @property
    def surface_area(self) -> float:
        a, b, c = self.half_extents
        return float(8.0 * (a * b + b * c + c * a))

    def face_planes(self) -> list[tuple[int, int, Plane]]:
        """``(axis, sign, plane)`` for the six faces, largest face first.

        Ties are broken by axis index, then + before -.
        """
        e = self.half_extents
        face_area = [4.0 * e[(k + 1) % 3] * e[(k + 2) % 3] for k in range(3)]
        order = sorted(range(3), key=lambda k: (-face_area[k], k))
        out = []
        for k in order:
            for sign in (1, -1):
                n = sign * self.axes[k]
                out.append((k, sign, Plane(n, float(np.dot(n, self.center) + e[k]))))
        return out

    def contains(self, p, eps=1e-9) -> bool:
        local = self.axes @ (np.asarray(p, dtype=float) - self.center)
        return bool(np.all(np.abs(local) <= self.half_extents + eps))


def _box_from_frame(points: np.ndarray, axes: np.ndarray) -> OrientedBox:
    proj = points @ axes.T
    lo, hi = proj.min(axis=0), proj.max(axis=0)
    center = axes.T @ (0.5 * (lo + hi))
    return OrientedBox(center, axes.copy(), 0.5 * (hi - lo))


def min_area_rectangle(pts2d: np.ndarray) -> tuple[float, float]:
    """Minimum-area enclosing rectangle of 2D points; returns (area, angle).

    The optimal rectangle has a side flush with a hull edge, so every hull
    edge direction is tried (rotating-calipers candidate set).
    """
    try:
        hull = ConvexHull(pts2d)
        H = pts2d[hull.vertices]
    except (QhullError, ValueError):
        H = pts2d
    if len(H) < 3:
        return 0.0, 0.0
    E = np.roll(H, -1, axis=0) - H
    ang = np.arctan2(E[:, 1], E[:, 0])
    c, s = np.cos(ang), np.sin(ang)
    x = H[:, 0][None, :] * c[:, None] + H[:, 1][None, :] * s[:, None]
    y = -H[:, 0][None, :] * s[:, None] + H[:, 1][None, :] * c[:, None]
    areas = (x.max(axis=1) - x.min(axis=1)) * (y.max(axis=1) - y.min(axis=1))
    k = int(np.argmin(areas))
    return float(areas[k]), float(ang[k])


def _frame_for_axis(points: np.ndarray, normal: np.ndarray) -> np.ndarray:
    n = normal / np.linalg.norm(normal)
    helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(n, helper)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    pts = np.stack([points @ u, points @ v], axis=1)
    _, ang = min_area_rectangle(pts)
    a1 = math.cos(ang) * u + math.sin(ang) * v
    a2 = np.cross(n, a1)
    return np.stack([a1, a2, n])


def _candidate_axes(poly: ConvexPolyhedron) -> np.ndarray:
    cands = [poly.normals]
    D = poly.vertices[poly.edges[:, 1]] - poly.vertices[poly.edges[:, 0]]
    D = D / np.linalg.norm(D, axis=1)[:, None]
    E = len(D)
    n_pairs = E * (E - 1) // 2
    if n_pairs:
        if n_pairs <= EDGE_PAIR_BUDGET:
            i, j = np.triu_indices(E, 1)
        else:
            # deterministic stride through the pair list
            flat = np.linspace(0, n_pairs - 1, EDGE_PAIR_BUDGET).astype(np.int64)
            i, j = _unrank_pairs(flat, E)
        X = np.cross(D[i], D[j])
        nrm = np.linalg.norm(X, axis=1)
        ok = nrm > 1e-6
        cands.append(X[ok] / nrm[ok][:, None])
    c = poly.vertices - poly.vertices.mean(axis=0)
    _, _, vt = np.linalg.svd(c, full_matrices=False)
    cands.append(vt)
    return np.vstack(cands)


def _unrank_pairs(r: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Map ranks in the row-major list of pairs (i < j) back to (i, j)."""
    # number of pairs before row i: i*n - i*(i+1)/2
    i = np.floor(n - 0.5 - np.sqrt((n - 0.5) ** 2 - 2.0 * r)).astype(np.int64)
    i = np.clip(i, 0, n - 2)
    before = i * n - i * (i + 1) // 2
    j = r - before + i + 1
    fix = j >= n
    while np.any(fix):
        i[fix] += 1
        before = i * n - i * (i + 1) // 2
        j = r - before + i + 1
        fix = j >= n
    return i, j


def _screen_volumes(points: np.ndarray, axes: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Cheap upper estimate of the best box volume around each candidate axis.

    The cross-section rectangle is only tried at ``SCREEN_ANGLES`` fixed
    orientations, so the estimate overshoots the exact fit by at most a
    factor ``1 / cos(pi / (2 * SCREEN_ANGLES))**2``.
    """
    helper = np.where(np.abs(axes[:, :1]) < 0.9, [[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
    U = np.cross(axes, helper)
    U /= np.linalg.norm(U, axis=1)[:, None]
    W = np.cross(axes, U)
    A = SCREEN_ANGLES
    ang = np.arange(2 * A) * (0.5 * math.pi / A)   # [0, π): widths at θ and θ + π/2
    c, s = np.cos(ang), np.sin(ang)
    out = np.empty(len(axes))
    for lo in range(0, len(axes), chunk):
        sl = slice(lo, lo + chunk)
        dirs = U[sl, None, :] * c[None, :, None] + W[sl, None, :] * s[None, :, None]
        proj = points @ dirs.reshape(-1, 3).T
        w = (proj.max(axis=0) - proj.min(axis=0)).reshape(-1, 2 * A)
        h = np.ptp(points @ axes[sl].T, axis=0)
        out[sl] = h * (w[:, :A] * w[:, A:]).min(axis=1)
    return out


def _polish(points: np.ndarray, box: OrientedBox) -> OrientedBox:
    best = box
    step = math.radians(2.0)
    while step > 1e-7:
        improved = False
        for k in range(3):
            for sgn in (1.0, -1.0):
                axes = np.stack([rotate(a, best.axes[k], sgn * step) for a in best.axes])
                cand = _box_from_frame(points, axes)
                if cand.volume < best.volume * (1.0 - 1e-13):
                    best, improved = cand, True
        for k in range(3):
            axes = _frame_for_axis(points, best.axes[k])
            cand = _box_from_frame(points, axes)
            if cand.volume < best.volume * (1.0 - 1e-13):
                best, improved = cand, True
        if not improved:
            step *= 0.5
    return best


def min_volume_box(poly: ConvexPolyhedron, tol: TolerancePolicy = DEFAULT_TOL) -> OrientedBox:
    """Approximate minimum-volume bounding box of P (see module docstring)."""
    pts = poly.vertices
    c = pts - pts.mean(axis=0)
    sv = np.linalg.svd(c, compute_uv=False)
    if sv[-1] <= tol.eps(poly.scale) * max(1.0, math.sqrt(len(pts))):
        raise DegenerateGeometry("polyhedron is flat")
    cands = _candidate_axes(poly)
    if len(cands) > SCREEN_KEEP:
        est = _screen_volumes(pts, cands)
        cands = cands[np.argsort(est, kind="stable")[:SCREEN_KEEP]]
    best = None
    for n in cands:
        box = _box_from_frame(pts, _frame_for_axis(pts, n))
        if best is None or box.volume < best.volume:
            best = box
    best = _polish(pts, best)
    # canonical axis signs so plans do not depend on candidate order
    axes = np.array(best.axes)
    for k in range(3):
        j = int(np.argmax(np.abs(axes[k])))
        if axes[k, j] < 0:
            axes[k] = -axes[k]
    if np.linalg.det(axes) < 0:
        axes[2] = -axes[2]
    return _box_from_frame(pts, axes)


@dataclass(frozen=True)
class LowerBounds:
    cornered_bound: float | None
    centered_bound: float | None
    box_bound: float

    @property
    def combined(self) -> float:
        return max(b for b in (self.cornered_bound, self.centered_bound, self.box_bound)
                   if b is not None)


def lower_bounds(poly: ConvexPolyhedron, ball: Ball, box: OrientedBox,
                 cornered_r_sq: float | None = None) -> LowerBounds:
    """Certified lower bounds on the optimal cost.

    ``cornered_r_sq`` is r² of the D-separation for cornered inputs, ``None``
    for centered ones.
    """
    box_bound = box.surface_area / 6.0
    if cornered_r_sq is not None:
        return LowerBounds(math.pi * cornered_r_sq, None, box_bound)
    return LowerBounds(None, math.pi * ball.radius ** 2, box_bound)


def box_cut_phase(region: Region, poly: ConvexPolyhedron, box: OrientedBox,
                  tol: TolerancePolicy = DEFAULT_TOL):
    """Apply the six box-face cuts (largest face first).

    ``region`` should already have the D-separation applied when P is cornered;
    :func:`spherecarve.plan.build_plan` does that and records it as the first cut.
    Returns ``(region, cuts)``.
    """
    keep = poly.centroid
    cuts = []
    for axis, sign, plane in box.face_planes():
        region, cost = apply_cut(region, plane, keep, tol)
        cuts.append(Cut(region.plane(-1), CutKind.BOX, None, None,
                        ("box", 2 * axis + (0 if sign > 0 else 1)), cost))
    return region, cuts
