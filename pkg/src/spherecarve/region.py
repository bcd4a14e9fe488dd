"""The stock: a ball intersected with half-spaces, and exact cut costs.

A cut's cost is the area of the planar face it creates, computed in
plane-local 2D coordinates as (disk) ∩ (convex polygon).  The polygon is the
plane's slice of the region's cell, a vertex/edge polytope equal to a
bounding cube clipped by every half-space so far, updated once per cut.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import KeepPointOnPlane
from .geometry import DEFAULT_TOL, Plane, TolerancePolicy, orthonormal_basis, signed_distance, vec


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        c = vec(self.center).copy()
        c.flags.writeable = False
        object.__setattr__(self, "center", c)
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))


CELL_HALF_WIDTH = 1.5  # bounding cube half-width in ball radii


@dataclass(frozen=True, eq=False)
class Cell:
    """Convex polytope (bounding cube ∩ half-spaces) as vertices and edges.

    ``eps`` is the on-plane threshold used when clipping.
    """

    vertices: np.ndarray
    edges: np.ndarray
    eps: float

    @classmethod
    def cube(cls, center, half: float, eps: float) -> Cell:
        corners = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], float)
        edges = [(i, j) for i in range(8) for j in range(i + 1, 8)
                 if np.sum(corners[i] != corners[j]) == 1]
        return cls(np.asarray(center) + half * corners, np.array(edges), eps)

    def _hits(self, n, d, eps):
        sd = self.vertices @ n - d
        pos, neg = sd > eps, sd < -eps
        a, b = self.edges[:, 0], self.edges[:, 1]
        cross = (pos[a] & neg[b]) | (neg[a] & pos[b])
        ea, eb = a[cross], b[cross]
        t = sd[ea] / (sd[ea] - sd[eb])
        X = self.vertices[ea] + t[:, None] * (self.vertices[eb] - self.vertices[ea])
        return sd, pos, neg, cross, X

    def slice(self, n, d, eps) -> tuple[np.ndarray, bool]:
        """Points of the cell on the plane (vertices and edge crossings)."""
        sd, pos, neg, _, X = self._hits(n, d, eps)
        on = ~pos & ~neg
        return np.vstack([self.vertices[on], X]), bool(np.any(pos))

    def clip(self, n, d) -> Cell:
        """Keep ``n·x <= d``."""
        return self.split(n, d)[0]

    def split(self, n, d) -> tuple[Cell, np.ndarray, bool]:
        """``(clipped cell, points on the plane, whether anything was removed)``."""
        sd, pos, neg, cross, X = self._hits(n, d, self.eps)
        if not np.any(pos):
            return self, np.vstack([self.vertices[~neg], X]), False
        keep = ~pos
        k = int(keep.sum())
        new_id = np.full(len(sd), -1)
        new_id[keep] = np.arange(k)
        E = self.edges
        both = keep[E[:, 0]] & keep[E[:, 1]]
        kept_edges = new_id[E[both]]
        ce = E[cross]
        inner = np.where(keep[ce[:, 0]], ce[:, 0], ce[:, 1])
        x_id = k + np.arange(len(X))
        cut_edges = np.stack([new_id[inner], x_id], axis=1)
        # ring of the new face: on-plane vertices plus crossing points
        on = keep & ~neg
        ring_ids = np.concatenate([new_id[on], x_id])
        ring = np.vstack([self.vertices[on], X])
        V = np.vstack([self.vertices[keep], X])
        parts = [kept_edges, cut_edges]
        if len(ring) >= 2:
            u, v = orthonormal_basis(n)
            q = ring - ring.mean(axis=0)
            order = np.argsort(np.arctan2(q @ v, q @ u), kind="stable")
            r = ring_ids[order]
            loop = np.stack([r, np.append(r[1:], r[0])], axis=1) if len(r) > 2 else r[None, :]
            # only edges between two on-plane vertices can already exist
            on_ids = new_id[on]
            if len(on_ids) >= 2:
                flat = np.zeros(len(V), dtype=bool)
                flat[on_ids] = True
                both_on = kept_edges[flat[kept_edges[:, 0]] & flat[kept_edges[:, 1]]]
                have = {(min(a, b), max(a, b)) for a, b in both_on.tolist()}
                fresh = [(a, b) for a, b in loop.tolist()
                         if a != b and (min(a, b), max(a, b)) not in have]
                loop = np.array(fresh, dtype=int).reshape(-1, 2)
            parts.append(loop)
        return Cell(V, np.vstack(parts), self.eps), ring, True


@dataclass(frozen=True, eq=False)
class Region:
    """``ball ∩ {x : normals @ x <= offsets}``; a value type."""

    ball: Ball
    normals: np.ndarray
    offsets: np.ndarray
    cell: Cell | None = field(default=None, repr=False)

    @classmethod
    def fresh(cls, ball: Ball) -> Region:
        N = np.zeros((0, 3))
        d = np.zeros(0)
        N.flags.writeable = False
        d.flags.writeable = False
        return cls(ball, N, d)

    def polytope(self) -> Cell:
        """The cell ``cube ∩ half-spaces``; built on first use, then carried along."""
        if self.cell is None:
            cell = Cell.cube(self.ball.center, CELL_HALF_WIDTH * self.ball.radius,
                             DEFAULT_TOL.eps(self.ball.radius))
            for n, d in zip(self.normals, self.offsets):
                cell = cell.clip(n, d)
            object.__setattr__(self, "cell", cell)
        return self.cell

    @property
    def halfspaces(self) -> list[Plane]:
        return [Plane(n, d) for n, d in zip(self.normals, self.offsets)]

    def plane(self, k: int) -> Plane:
        return Plane(self.normals[k], self.offsets[k])

    def __len__(self):
        return len(self.offsets)

    def with_plane(self, plane: Plane, cell: Cell | None = None) -> Region:
        """Add a half-space; ``cell`` is the already clipped cell, if known."""
        N = np.vstack([self.normals, plane.normal[None, :]])
        d = np.append(self.offsets, plane.offset)
        N.flags.writeable = False
        d.flags.writeable = False
        if cell is None:
            cell = self.polytope().clip(plane.normal, plane.offset)
        return Region(self.ball, N, d, cell)


# -- 2D primitives -----------------------------------------------------------

def _clip_halfplane(poly: list, a: np.ndarray, b: float) -> list:
    """Sutherland-Hodgman: keep the part of convex ``poly`` with a·y <= b."""
    out = []
    m = len(poly)
    for k in range(m):
        p, q = poly[k], poly[(k + 1) % m]
        fp = a[0] * p[0] + a[1] * p[1] - b
        fq = a[0] * q[0] + a[1] * q[1] - b
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _tri_disk_area(p, q, r: float) -> float:
    """Signed area of disk(0, r) ∩ triangle(0, p, q)."""
    dx, dy = q[0] - p[0], q[1] - p[1]
    a = dx * dx + dy * dy
    pts = [p]
    if a > 0.0:
        b = p[0] * dx + p[1] * dy
        c = p[0] * p[0] + p[1] * p[1] - r * r
        disc = b * b - a * c
        if disc > 0.0:
            sq = math.sqrt(disc)
            for t in ((-b - sq) / a, (-b + sq) / a):
                if 0.0 < t < 1.0:
                    pts.append((p[0] + t * dx, p[1] + t * dy))
    pts.append(q)
    area = 0.0
    r2 = r * r
    for x, y in zip(pts[:-1], pts[1:]):
        cross = x[0] * y[1] - x[1] * y[0]
        mx, my = 0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])
        if mx * mx + my * my < r2 * (1.0 - 1e-12):
            area += 0.5 * cross
        else:
            area += 0.5 * r2 * math.atan2(cross, x[0] * y[0] + x[1] * y[1])
    return area


def disk_polygon_area(poly, r: float) -> float:
    """Area of disk(0, r) ∩ convex CCW polygon."""
    if len(poly) < 3:
        return 0.0
    P = np.asarray(poly)
    if np.all(np.einsum("ij,ij->i", P, P) <= r * r):
        x, y = P[:, 0], P[:, 1]
        return max(0.0, 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))
    total = 0.0
    m = len(poly)
    for k in range(m):
        total += _tri_disk_area(poly[k], poly[(k + 1) % m], r)
    return max(0.0, total)


# -- sections ------------------------------------------------------------------

def clipped_section(region: Region, plane: Plane, tol: TolerancePolicy = DEFAULT_TOL):
    """``(rho, polygon)`` of plane ∩ region by 2D half-plane clipping, or None.

    Independent of the region's cell; half-spaces whose boundary coincides
    with ``plane`` are ignored.  Kept as a reference path for checks.
    """
    o, R = region.ball.center, region.ball.radius
    n, d = plane.normal, plane.offset
    s = float(np.dot(n, o) - d)
    rho2 = R * R - s * s
    if rho2 <= 0.0:
        return None
    rho = math.sqrt(rho2)
    eps = tol.eps(R)
    w = 2.0 * rho
    poly = [(-w, -w), (w, -w), (w, w), (-w, w)]
    if len(region):
        c = o - s * n
        u, v = orthonormal_basis(n)
        N = region.normals
        A = np.stack([N @ u, N @ v], axis=1)
        b = region.offsets - N @ c
        reach = rho * np.hypot(A[:, 0], A[:, 1])
        keep = ~(np.abs(b) + reach <= eps)
        if np.any(keep & (-reach - b > eps)):
            return None
        active = keep & (reach - b > eps)
        A, b = A[active], b[active]
        thresh = 1e-13 * rho
        while len(b):
            viol = (np.asarray(poly) @ A.T).max(axis=0) - b
            # the polygon only shrinks, so satisfied constraints stay satisfied
            live = viol > thresh
            if not np.any(live):
                break
            A, b, viol = A[live], b[live], viol[live]
            k = int(np.argmax(viol))
            poly = _clip_halfplane(poly, A[k], b[k])
            if len(poly) < 3:
                return None
            A[k], b[k] = 0.0, np.inf
    return rho, poly


def _section(region: Region, plane: Plane, tol: TolerancePolicy):
    """``(rho, polygon, removes)`` for plane ∩ region from the cell, or None.

    ``polygon`` is in plane coordinates centred on the disk centre;
    ``removes`` tells whether the positive side holds any of the cell.
    """
    o, R = region.ball.center, region.ball.radius
    n, d = plane.normal, plane.offset
    s = float(np.dot(n, o) - d)
    rho2 = R * R - s * s
    if rho2 <= 0.0:
        return None
    pts, removes = region.polytope().slice(n, d, tol.eps(R))
    return _ring_section(region.ball, plane, pts, removes)


def _ring_section(ball: Ball, plane: Plane, pts: np.ndarray, removes: bool):
    if len(pts) < 3:
        return None
    o, R = ball.center, ball.radius
    n, d = plane.normal, plane.offset
    s = float(np.dot(n, o) - d)
    rho2 = R * R - s * s
    if rho2 <= 0.0:
        return None
    u, v = orthonormal_basis(n)
    Q = pts - (o - s * n)
    P = np.stack([Q @ u, Q @ v], axis=1)
    m = P.mean(axis=0)
    P = P[np.argsort(np.arctan2(P[:, 1] - m[1], P[:, 0] - m[0]), kind="stable")]
    return math.sqrt(rho2), [tuple(p) for p in P], removes


def section_area(region: Region, plane: Plane, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """Area of ``plane ∩ region`` (a boundary face lying in ``plane`` counts)."""
    sec = _section(region, plane, tol)
    if sec is None:
        return 0.0
    return disk_polygon_area(sec[1], sec[0])


def cut_cost(region: Region, plane: Plane, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """Area of the face a cut along ``plane`` creates (0 if it removes nothing).

    The removed side is ``signed_distance > 0``.
    """
    sec = _section(region, plane, tol)
    if sec is None or not sec[2]:
        return 0.0
    return disk_polygon_area(sec[1], sec[0])


def orient_plane(plane: Plane, keep_point, tol: TolerancePolicy = DEFAULT_TOL,
                 scale: float = 1.0) -> Plane:
    """Flip ``plane`` if needed so ``keep_point`` is on the kept (negative) side."""
    sd = float(signed_distance(plane, keep_point))
    if abs(sd) <= tol.eps(scale):
        raise KeepPointOnPlane(f"keep point at signed distance {sd:.3e} from cut plane")
    return plane if sd < 0 else plane.flipped()


def apply_cut(region: Region, plane: Plane, keep_point,
              tol: TolerancePolicy = DEFAULT_TOL) -> tuple[Region, float]:
    """Cut ``region`` with ``plane`` and keep the piece containing ``keep_point``.

    The stored half-space is oriented so ``keep_point`` is kept; it is
    ``result.plane(-1)``.
    """
    oriented = orient_plane(plane, keep_point, tol, region.ball.radius)
    cell = region.polytope()
    if cell.eps != tol.eps(region.ball.radius):
        return region.with_plane(oriented), cut_cost(region, oriented, tol)
    cell, ring, removes = cell.split(oriented.normal, oriented.offset)
    sec = _ring_section(region.ball, oriented, ring, removes) if removes else None
    cost = 0.0 if sec is None else disk_polygon_area(sec[1], sec[0])
    return region.with_plane(oriented, cell), cost


def contains(region: Region, p, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    p = np.asarray(p, dtype=float)
    eps = tol.eps(region.ball.radius)
    if np.linalg.norm(p - region.ball.center) > region.ball.radius + eps:
        return False
    return bool(np.all(region.normals @ p - region.offsets <= eps))


def _distinct_planes(region: Region, tol: TolerancePolicy, chunk: int = 512) -> list[int]:
    """Indices of half-spaces, dropping repeats of an earlier plane."""
    eps = tol.eps(region.ball.radius)
    N, d = region.normals, region.offsets
    k = len(d)
    dup = np.zeros(k, dtype=bool)
    for lo in range(1, k, chunk):
        hi = min(k, lo + chunk)
        dn = np.linalg.norm(N[lo:hi, None, :] - N[None, :hi, :], axis=2)
        same = (dn <= 1e-12) & (np.abs(d[lo:hi, None] - d[None, :hi]) <= eps)
        same &= np.arange(hi)[None, :] < np.arange(lo, hi)[:, None]
        dup[lo:hi] = same.any(axis=1)
    return [int(i) for i in np.flatnonzero(~dup)]


# -- spherical part ------------------------------------------------------------

_FIB = None


def _fibonacci_points(n=256):
    global _FIB
    if _FIB is None:
        k = np.arange(n) + 0.5
        z = 1 - 2 * k / n
        phi = math.pi * (1 + 5 ** 0.5) * k
        rr = np.sqrt(1 - z * z)
        _FIB = np.stack([rr * np.cos(phi), rr * np.sin(phi), z], axis=1)
    return _FIB


def spherical_area(region: Region, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """Area of the part of the ball's sphere that bounds ``region``.

    Exact, via Gauss-Bonnet on the arrangement of small circles cut out by the
    half-space planes: each boundary cycle contributes ``2π - ∫k_g - Σθ``
    (area to its left); the total is reduced mod 4π.
    """
    o, R = region.ball.center, region.ball.radius
    if len(region) == 0:
        return 4 * math.pi * R * R
    cv = region.polytope().vertices
    if np.max(np.einsum("ij,ij->i", cv - o, cv - o)) < (R * (1 - 1e-12)) ** 2:
        return 0.0  # the cell, hence the region, is strictly inside the ball
    idx = _distinct_planes(region, tol)
    M = region.normals[idx]
    h = (region.offsets[idx] - M @ o) / R
    if np.any(h <= -1.0):
        return 0.0
    act = h < 1.0
    M, h = M[act], h[act]
    K = len(h)
    if K == 0:
        return 4 * math.pi * R * R
    vtol = 1e-12

    def inside(Q, skip):
        """Boolean mask: rows of Q satisfying every constraint not in ``skip``."""
        viol = Q @ M.T - h
        for s in skip:
            viol[:, s] = -1.0
        return np.all(viol <= vtol, axis=1)

    # pairwise circle intersections
    vert_pts, vert_pair = [], []
    for i in range(K - 1):
        mj = M[i + 1:]
        c = mj @ M[i]
        den = 1.0 - c * c
        ok = den > 1e-14
        if not np.any(ok):
            continue
        js = np.flatnonzero(ok) + i + 1
        c, den, hj = c[ok], den[ok], h[js]
        alpha = (h[i] - c * hj) / den
        beta = (hj - c * h[i]) / den
        w = np.cross(M[i], M[js])
        base = alpha[:, None] * M[i] + beta[:, None] * M[js]
        rem = 1.0 - np.einsum("ij,ij->i", base, base)
        hit = rem > 0
        if not np.any(hit):
            continue
        t = np.sqrt(rem[hit] / den[hit])
        for sign in (1.0, -1.0):
            q = base[hit] + sign * t[:, None] * w[hit]
            q /= np.linalg.norm(q, axis=1)[:, None]
            for qq, j in zip(q, js[hit]):
                vert_pts.append(qq)
                vert_pair.append((i, int(j)))
    on_circle: dict[int, list[int]] = {k: [] for k in range(K)}
    good = []
    if vert_pts:
        Q = np.array(vert_pts)
        viol = Q @ M.T - h
        pairs = np.array(vert_pair)
        viol[np.arange(len(Q)), pairs[:, 0]] = -1.0
        viol[np.arange(len(Q)), pairs[:, 1]] = -1.0
        good = np.flatnonzero(np.all(viol <= vtol, axis=1))
        for g in good:
            i, j = vert_pair[g]
            on_circle[i].append(int(g))
            on_circle[j].append(int(g))

    parent = {int(g): int(g) for g in good}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    kg = 0.0
    full_cycles = 0
    used_vertices: set[int] = set()
    for i in range(K):
        e1, e2 = orthonormal_basis(M[i])
        sr = math.sqrt(max(0.0, 1.0 - h[i] * h[i]))
        ids = on_circle[i]
        if not ids:
            q = h[i] * M[i] + sr * e1
            if inside(q[None, :], [i])[0]:
                full_cycles += 1
                kg += -h[i] * 2 * math.pi
            continue
        Q = np.array([vert_pts[g] for g in ids])
        phi = np.arctan2(Q @ e2, Q @ e1)
        order = np.argsort(phi)
        phi = phi[order]
        ids = [ids[k] for k in order]
        nxt_phi = np.append(phi[1:], phi[0] + 2 * math.pi)
        mids = 0.5 * (phi + nxt_phi)
        P = (h[i] * M[i])[None, :] + sr * (np.cos(mids)[:, None] * e1 + np.sin(mids)[:, None] * e2)
        ins = inside(P, [i])
        for k in np.flatnonzero(ins):
            delta = nxt_phi[k] - phi[k]
            kg += -h[i] * delta
            a, b = ids[k], ids[(k + 1) % len(ids)]
            used_vertices.update((a, b))
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    theta = 0.0
    for g in used_vertices:
        i, j = vert_pair[g]
        q = vert_pts[g]
        gi = -(M[i] - np.dot(M[i], q) * q)
        gj = -(M[j] - np.dot(M[j], q) * q)
        cosang = np.dot(gi, gj) / (np.linalg.norm(gi) * np.linalg.norm(gj))
        theta += math.acos(max(-1.0, min(1.0, cosang)))
    cycles = full_cycles + len({find(g) for g in used_vertices})
    if cycles == 0:
        return 0.0
    total = 2 * math.pi * cycles - kg - theta
    four_pi = 4 * math.pi
    area = total % four_pi
    if area < 1e-9 or area > four_pi - 1e-9:
        # a near-empty patch and a near-full sphere are indistinguishable mod 4π
        frac = float(np.mean(inside(_fibonacci_points(), [])))
        area = four_pi if frac > 0.5 else 0.0
    return float(area * R * R)


def outer_surface_area(region: Region, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """Total boundary area: remaining sphere plus every planar face."""
    planar = sum(section_area(region, Plane(region.normals[k], region.offsets[k]), tol)
                 for k in _distinct_planes(region, tol))
    return spherical_area(region, tol) + planar
