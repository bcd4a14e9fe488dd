"""Cornered/centered classification and the D-separation plane."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import CenteredInput, OInsideP, PNotInsideBall
from .geometry import DEFAULT_TOL, ConvexPolyhedron, Plane, TolerancePolicy
from .region import Ball


class Placement(enum.Enum):
    CORNERED = "cornered"
    CENTERED = "centered"


@dataclass(frozen=True)
class ClosestPointResult:
    point: np.ndarray
    feature: tuple[str, int]  # ("vertex" | "edge" | "face", index)
    distance: float


def classify(poly: ConvexPolyhedron, ball: Ball, tol: TolerancePolicy = DEFAULT_TOL) -> Placement:
    eps = tol.eps(ball.radius)
    dist = np.linalg.norm(poly.vertices - ball.center, axis=1)
    if np.any(dist >= ball.radius - eps):
        raise PNotInsideBall(f"vertex {int(np.argmax(dist))} at distance {dist.max():.6g} "
                             f">= radius {ball.radius:.6g}")
    return Placement.CENTERED if poly.contains(ball.center, tol) else Placement.CORNERED


def _point_in_face(poly: ConvexPolyhedron, f: int, p: np.ndarray, eps: float) -> bool:
    loop = poly.vertices[list(poly.faces[f])]
    n = poly.normals[f]
    nxt = np.roll(loop, -1, axis=0)
    side = np.einsum("ij,j->i", np.cross(nxt - loop, p - loop), n)
    return bool(np.all(side >= -eps))


def closest_point(poly: ConvexPolyhedron, o, tol: TolerancePolicy = DEFAULT_TOL) -> ClosestPointResult:
    """Nearest boundary point of P to ``o`` by scanning vertices, edges and faces."""
    o = np.asarray(o, dtype=float)
    if poly.contains(o, tol):
        raise OInsideP("query point lies inside the polyhedron")
    eps = tol.eps(poly.scale)
    V = poly.vertices
    dv = np.linalg.norm(V - o, axis=1)
    k = int(np.argmin(dv))
    best = (float(dv[k]), V[k].copy(), ("vertex", k))

    a, b = V[poly.edges[:, 0]], V[poly.edges[:, 1]]
    ab = b - a
    t = np.einsum("ij,ij->i", o - a, ab) / np.einsum("ij,ij->i", ab, ab)
    interior = (t > 0.0) & (t < 1.0)
    if np.any(interior):
        feet = a + np.clip(t, 0.0, 1.0)[:, None] * ab
        de = np.linalg.norm(feet - o, axis=1)
        de[~interior] = np.inf
        e = int(np.argmin(de))
        if de[e] < best[0]:
            best = (float(de[e]), feet[e], ("edge", e))

    sd = poly.normals @ o - poly.offsets
    for f in np.argsort(np.abs(sd)):
        if abs(sd[f]) >= best[0]:
            break
        if sd[f] <= 0:
            continue
        foot = o - sd[f] * poly.normals[f]
        if _point_in_face(poly, int(f), foot, eps):
            best = (float(sd[f]), foot, ("face", int(f)))
            break
    return ClosestPointResult(best[1], best[2], best[0])


def d_separation(poly: ConvexPolyhedron, ball: Ball, tol: TolerancePolicy = DEFAULT_TOL) -> Plane:
    """Plane through the closest point x, normal (x - o)/|x - o| (pointing at P)."""
    if classify(poly, ball, tol) is Placement.CENTERED:
        raise CenteredInput("centered polyhedron has no D-separation")
    cp = closest_point(poly, ball.center, tol)
    n = (cp.point - ball.center) / cp.distance
    return Plane(n, float(np.dot(n, cp.point)))


def d_separation_radius_sq(poly: ConvexPolyhedron, ball: Ball, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """Squared base radius r² = R² - |x - o|² of the cap removed by the D-separation."""
    cp = closest_point(poly, ball.center, tol)
    return ball.radius ** 2 - cp.distance ** 2
