"""Brute-force validators for the exact kernels.

Nothing here is used by the planner itself; tests and ``bench --verify``
call these to cross-check the exact computations by sampling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .boxing import OrientedBox
from .geometry import DEFAULT_TOL, ConvexPolyhedron, Plane, orthonormal_basis
from .region import Region, _distinct_planes

MIN_SAMPLES = 10_000
_CHUNK = 200_000


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    samples: int

    def __post_init__(self):
        if self.std_error < 0 or self.samples < MIN_SAMPLES:
            raise ValueError("need std_error >= 0 and at least 1e4 samples")

    def agrees(self, exact: float, k: float = 3.0, floor: float = 0.0) -> bool:
        """``|value - exact| <= k * std_error`` (plus an absolute ``floor``)."""
        return abs(self.value - exact) <= k * self.std_error + floor


def _bernoulli(hits: int, n: int, measure: float) -> McEstimate:
    p = hits / n
    return McEstimate(measure * p, measure * math.sqrt(p * (1.0 - p) / n), n)


def _chunks(samples: int):
    left = samples
    while left > 0:
        m = min(left, _CHUNK)
        yield m
        left -= m


def _inside_halfspaces(region: Region, X: np.ndarray, tol: float = 0.0) -> np.ndarray:
    if len(region) == 0:
        return np.ones(len(X), dtype=bool)
    # keep the sample-by-plane matrix near 32 MB
    step = max(1, 4_000_000 // len(region))
    return np.concatenate([np.all(X[i:i + step] @ region.normals.T - region.offsets <= tol, axis=1)
                           for i in range(0, len(X), step)])


def mc_plane_region_area(region: Region, plane: Plane, samples: int = 1_000_000,
                         seed: int = 0) -> McEstimate:
    """Uniform samples on the disk plane ∩ ball; hit fraction times disk area."""
    o, R = region.ball.center, region.ball.radius
    n = plane.normal
    s = float(n @ o - plane.offset)
    rho2 = R * R - s * s
    if rho2 <= 0.0:
        return McEstimate(0.0, 0.0, max(samples, MIN_SAMPLES))
    rho = math.sqrt(rho2)
    c = o - s * n
    u, v = orthonormal_basis(n)
    rng = np.random.default_rng(seed)
    hits = 0
    for m in _chunks(samples):
        r = rho * np.sqrt(rng.random(m))
        t = rng.random(m) * (2.0 * math.pi)
        X = c + (r * np.cos(t))[:, None] * u + (r * np.sin(t))[:, None] * v
        hits += int(_inside_halfspaces(region, X).sum())
    return _bernoulli(hits, samples, math.pi * rho2)


def mc_region_volume(region: Region, samples: int = 1_000_000, seed: int = 0,
                     box=None) -> McEstimate:
    """Rejection sampling of the region in the ball's bounding cube.

    ``box = (lo, hi)`` samples an axis-aligned box instead; it must contain
    the region for the estimate to be unbiased.
    """
    o, R = region.ball.center, region.ball.radius
    if box is None:
        lo, hi = o - R, o + R
    else:
        lo, hi = (np.asarray(b, dtype=float) for b in box)
    rng = np.random.default_rng(seed)
    hits = 0
    for m in _chunks(samples):
        X = lo + (hi - lo) * rng.random((m, 3))
        ok = np.einsum("ij,ij->i", X - o, X - o) <= R * R
        ok &= _inside_halfspaces(region, X)
        hits += int(ok.sum())
    return _bernoulli(hits, samples, float(np.prod(hi - lo)))


def mc_poly_volume(poly: ConvexPolyhedron, samples: int = 1_000_000, seed: int = 0) -> McEstimate:
    """Rejection sampling of P in its axis-aligned bounding box."""
    lo, hi = poly.vertices.min(axis=0), poly.vertices.max(axis=0)
    rng = np.random.default_rng(seed)
    hits = 0
    for m in _chunks(samples):
        X = lo + (hi - lo) * rng.random((m, 3))
        hits += int(np.all(X @ poly.normals.T - poly.offsets <= 0.0, axis=1).sum())
    return _bernoulli(hits, samples, float(np.prod(hi - lo)))


def mc_outer_surface_area(region: Region, samples: int = 1_000_000, seed: int = 0) -> McEstimate:
    """Sphere part by uniform sphere sampling plus every distinct planar face.

    ``samples`` are spent on the sphere and again on each plane; the
    standard errors are combined in quadrature.
    """
    o, R = region.ball.center, region.ball.radius
    rng = np.random.default_rng(seed)
    hits = 0
    for m in _chunks(samples):
        X = rng.normal(size=(m, 3))
        X = o + R * X / np.linalg.norm(X, axis=1)[:, None]
        hits += int(_inside_halfspaces(region, X).sum())
    sphere = _bernoulli(hits, samples, 4.0 * math.pi * R * R)
    value, var = sphere.value, sphere.std_error ** 2
    for j, k in enumerate(_distinct_planes(region, DEFAULT_TOL)):
        plane = Plane(region.normals[k], region.offsets[k])
        others = Region(region.ball, np.delete(region.normals, k, axis=0),
                        np.delete(region.offsets, k))
        est = mc_plane_region_area(others, plane, samples, seed + 1 + j)
        value += est.value
        var += est.std_error ** 2
    return McEstimate(value, math.sqrt(var), samples)


# -- closest point ---------------------------------------------------------------

def _boundary_samples(poly: ConvexPolyhedron, density: int) -> np.ndarray:
    """Barycentric grids on a fan triangulation of every face, plus edge points."""
    k = max(int(density), 1)
    i, j = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
    keep = i + j <= k
    a, b = (i[keep] / k)[:, None], (j[keep] / k)[:, None]
    pts = []
    V = poly.vertices
    for f in poly.faces:
        p0 = V[f[0]]
        for t in range(1, len(f) - 1):
            p1, p2 = V[f[t]], V[f[t + 1]]
            pts.append(p0 + a * (p1 - p0) + b * (p2 - p0))
    t = np.linspace(0.0, 1.0, 4 * k + 1)[:, None, None]
    A, B = V[poly.edges[:, 0]], V[poly.edges[:, 1]]
    pts.append((A + t * (B - A)).reshape(-1, 3))
    return np.vstack(pts)


def sampled_closest_point(poly: ConvexPolyhedron, o, density: int = 24,
                          refine: bool = False) -> np.ndarray:
    """Nearest of a dense set of boundary samples to ``o`` (``o`` outside P).

    With ``refine`` the sample seeds an SLSQP solve of
    ``min |p - o|²  s.t.  normals @ p <= offsets``, which recovers the exact
    point to solver precision.
    """
    o = np.asarray(o, dtype=float)
    S = _boundary_samples(poly, density)
    best = S[int(np.argmin(np.einsum("ij,ij->i", S - o, S - o)))]
    if not refine:
        return best
    return refine_closest_point(poly, o, best)


def refine_closest_point(poly: ConvexPolyhedron, o, start) -> np.ndarray:
    o = np.asarray(o, dtype=float)
    A, b = poly.normals, poly.offsets
    scale = max(poly.scale, 1e-300)
    res = minimize(lambda p: float(np.dot(p - o, p - o)) / scale ** 2,
                   np.asarray(start, dtype=float),
                   jac=lambda p: 2.0 * (p - o) / scale ** 2,
                   constraints=[{"type": "ineq", "fun": lambda p: (b - A @ p) / scale,
                                 "jac": lambda p: -A / scale}],
                   method="SLSQP", options={"ftol": 1e-16, "maxiter": 500})
    return res.x


# -- bounding box grid ---------------------------------------------------------

def _euler_zyx(yaw, pitch, roll) -> np.ndarray:
    cy, sy = np.cos(yaw), np.sin(yaw)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cr, sr = np.cos(roll), np.sin(roll)
    R = np.empty(yaw.shape + (3, 3))
    R[..., 0, 0] = cy * cp
    R[..., 0, 1] = cy * sp * sr - sy * cr
    R[..., 0, 2] = cy * sp * cr + sy * sr
    R[..., 1, 0] = sy * cp
    R[..., 1, 1] = sy * sp * sr + cy * cr
    R[..., 1, 2] = sy * sp * cr - cy * sr
    R[..., 2, 0] = -sp
    R[..., 2, 1] = cp * sr
    R[..., 2, 2] = cp * cr
    return R


def grid_min_box(poly: ConvexPolyhedron, angular_resolution: float = 2.0,
                 chunk: int = 4096) -> OrientedBox:
    """Smallest axis-aligned box of ``R @ P`` over a ZYX Euler-angle grid.

    Box volume is invariant under left-multiplying ``R`` by a box symmetry,
    so yaw covers [0°, 90°) (via Rz(90°)) and roll [0°, 180°) (via Rx(180°),
    which maps (yaw, pitch, roll) to (-yaw, -pitch, roll + 180°)); pitch
    covers [-90°, 90°].
    """
    if angular_resolution > 2.0:
        raise ValueError("grid resolution must be at most 2 degrees")
    h = math.radians(angular_resolution)
    yaw = np.arange(0.0, 0.5 * math.pi - 1e-12, h)
    pitch = np.arange(-0.5 * math.pi, 0.5 * math.pi + 1e-12, h)
    roll = np.arange(0.0, math.pi - 1e-12, h)
    Y, P, Rr = (g.ravel() for g in np.meshgrid(yaw, pitch, roll, indexing="ij"))
    V = poly.vertices
    best_vol, best_R = np.inf, np.eye(3)
    for lo in range(0, len(Y), chunk):
        Rs = _euler_zyx(Y[lo:lo + chunk], P[lo:lo + chunk], Rr[lo:lo + chunk])
        proj = Rs @ V.T                                   # (c, 3, n)
        ext = proj.max(axis=2) - proj.min(axis=2)
        vol = np.prod(ext, axis=1)
        k = int(np.argmin(vol))
        if vol[k] < best_vol:
            best_vol, best_R = float(vol[k]), Rs[k]
    proj = V @ best_R.T
    lo_, hi_ = proj.min(axis=0), proj.max(axis=0)
    return OrientedBox(best_R.T @ (0.5 * (lo_ + hi_)), best_R.copy(), 0.5 * (hi_ - lo_))


def grid_slack(box: OrientedBox, angular_resolution: float = 2.0) -> float:
    """Volume the grid minimum may overshoot the true minimum by.

    The optimum lies within rotation angle ``theta = 1.5 * resolution`` of a
    grid node (half a step in each Euler angle); rotating a box with full
    extents ``e`` by ``theta`` grows extent ``i`` by at most
    ``s * (sum(e) - e_i)`` with ``s = sin(theta) + (1 - cos(theta)) / 2``
    bounding the off-diagonal rotation entries.
    """
    theta = 1.5 * math.radians(angular_resolution)
    s = math.sin(theta) + 0.5 * (1.0 - math.cos(theta))
    e = 2.0 * np.asarray(box.half_extents)
    return float(np.prod(e + s * (e.sum() - e)) - np.prod(e))


# -- separating planes -------------------------------------------------------------

def sample_separating_planes(poly: ConvexPolyhedron, o, count: int = 1000, seed: int = 0,
                             max_batches: int = 1000) -> list[Plane]:
    """Seeded random supporting planes of P with ``o`` strictly on the far side.

    Normals are drawn uniformly on the sphere; each gives the supporting
    plane ``u·x = max_v u·v``, kept when ``u·o`` exceeds that offset.
    """
    o = np.asarray(o, dtype=float)
    rng = np.random.default_rng(seed)
    out: list[Plane] = []
    for _ in range(max_batches):
        U = rng.normal(size=(4 * count, 3))
        U /= np.linalg.norm(U, axis=1)[:, None]
        h = (poly.vertices @ U.T).max(axis=0)
        sep = U @ o > h
        for u, d in zip(U[sep], h[sep]):
            out.append(Plane(u, float(d)))
            if len(out) == count:
                return out
    return out

