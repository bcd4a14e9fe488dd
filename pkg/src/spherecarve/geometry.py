"""Vector and plane arithmetic, tolerances, and the convex polyhedron type.

Points and directions are plain ``numpy`` arrays of shape ``(3,)``.  A
:class:`Plane` stores a unit normal and an offset; the kept side of a cut is
always ``signed_distance <= 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull

from .errors import DegenerateGeometry, DegenerateProjection


@dataclass(frozen=True)
class TolerancePolicy:
    """Combined absolute + relative tolerance applied to lengths."""

    abs_eps: float = 1e-9
    rel_eps: float = 1e-12

    def __post_init__(self):
        if not (self.abs_eps > 0 and self.rel_eps > 0):
            raise ValueError("tolerances must be positive")

    def eps(self, scale: float = 1.0) -> float:
        return self.abs_eps + self.rel_eps * abs(scale)


DEFAULT_TOL = TolerancePolicy()


def vec(x) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector {v}")
    return v


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def orthonormal_basis(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors completing ``n`` to a right-handed frame (u, v, n)."""
    x, y, z = float(n[0]), float(n[1]), float(n[2])
    # u = n × e_x, or n × e_y when n is close to e_x
    u = np.array([0.0, z, -y]) if abs(x) < 0.9 else np.array([-z, 0.0, x])
    u /= math.sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2])
    v = np.array([y * u[2] - z * u[1], z * u[0] - x * u[2], x * u[1] - y * u[0]])
    return u, v


def rotate(v: np.ndarray, axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation of ``v`` about unit ``axis``."""
    c, s = np.cos(angle), np.sin(angle)
    return v * c + np.cross(axis, v) * s + axis * np.dot(axis, v) * (1.0 - c)


@dataclass(frozen=True)
class Plane:
    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float).reshape(3)
        if not np.all(np.isfinite(n)) or not np.isfinite(self.offset):
            raise ValueError("plane has non-finite coefficients")
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise ValueError(f"plane normal is not unit length: {n}")
        n = n.copy()
        n.flags.writeable = False
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def from_point_normal(cls, point, normal) -> Plane:
        n = normalize(normal)
        return cls(n, float(np.dot(n, point)))

    def flipped(self) -> Plane:
        return Plane(-self.normal, -self.offset)

    def __eq__(self, other):
        return (isinstance(other, Plane) and self.offset == other.offset
                and np.array_equal(self.normal, other.normal))

    def __hash__(self):
        return hash((self.normal.tobytes(), self.offset))


def signed_distance(plane: Plane, p) -> float | np.ndarray:
    """``dot(normal, p) - offset``; vectorised over a trailing axis of size 3."""
    return np.asarray(p, dtype=float) @ plane.normal - plane.offset


def _newell(points: np.ndarray) -> np.ndarray:
    """Area vector (twice the area times the unit normal) of a planar loop."""
    nxt = np.roll(points, -1, axis=0)
    return np.cross(points, nxt).sum(axis=0)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _merge_coplanar(vertices: np.ndarray, faces: list[list[int]], tol: TolerancePolicy,
                    scale: float) -> list[list[int]]:
    """Merge edge-adjacent faces lying in a common plane into single polygons.

    Faces must already be consistently oriented.  Used for triangulated inputs
    (Qhull output, triangulated OFF files) so that every stored edge separates
    two faces with distinct normals.
    """
    normals, offsets = [], []
    for f in faces:
        a = _newell(vertices[f])
        n = a / np.linalg.norm(a)
        normals.append(n)
        offsets.append(float(np.mean(vertices[f] @ n)))
    uf = _UnionFind(len(faces))
    owner = {}
    eps = tol.eps(scale)
    for fi, f in enumerate(faces):
        for k in range(len(f)):
            a, b = f[k], f[(k + 1) % len(f)]
            g = owner.get((b, a))
            if g is not None:
                if (np.dot(normals[fi], normals[g]) > 1.0 - 1e-10
                        and abs(offsets[fi] - offsets[g]) <= 1e3 * eps):
                    uf.union(fi, g)
            owner[(a, b)] = fi
    groups: dict[int, list[int]] = {}
    for fi in range(len(faces)):
        groups.setdefault(uf.find(fi), []).append(fi)
    if all(len(g) == 1 for g in groups.values()):
        return [list(f) for f in faces]
    merged = []
    for root in sorted(groups):
        members = groups[root]
        if len(members) == 1:
            merged.append(list(faces[members[0]]))
            continue
        directed = set()
        for fi in members:
            f = faces[fi]
            for k in range(len(f)):
                directed.add((f[k], f[(k + 1) % len(f)]))
        nxt = {a: b for (a, b) in directed if (b, a) not in directed}
        start = min(nxt)
        loop = [start]
        cur = nxt[start]
        while cur != start:
            loop.append(cur)
            cur = nxt[cur]
            if len(loop) > len(nxt):
                raise DegenerateGeometry("coplanar faces do not merge into a simple polygon")
        merged.append(loop)
    return merged


@dataclass(frozen=True, eq=False)
class ConvexPolyhedron:
    """Vertex/face/edge representation of a convex polyhedron.

    ``faces`` are vertex-index cycles, counter-clockwise seen from outside.
    ``edges[e] = (a, b)`` is traversed a->b by face ``edge_faces[e][0]`` and
    b->a by face ``edge_faces[e][1]``.  Build instances with
    :meth:`from_faces` or :meth:`from_points`.
    """

    vertices: np.ndarray
    faces: tuple[tuple[int, ...], ...]
    normals: np.ndarray
    offsets: np.ndarray
    edges: np.ndarray
    edge_faces: np.ndarray
    face_edges: tuple[tuple[int, ...], ...]
    nonmanifold: tuple[tuple[int, int], ...] = field(default=())

    @classmethod
    def from_faces(cls, vertices, faces, tol: TolerancePolicy = DEFAULT_TOL,
                   merge: bool = True) -> ConvexPolyhedron:
        """Build from a face list, re-orienting each face outward first."""
        V = np.array(vertices, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(V)):
            raise ValueError("non-finite vertex coordinates")
        if len(V) < 4 or len(faces) < 4:
            raise DegenerateGeometry("a polyhedron needs at least 4 vertices and 4 faces")
        centroid = V.mean(axis=0)
        scale = float(np.max(np.linalg.norm(V - centroid, axis=1)))
        oriented = []
        for f in faces:
            f = [int(i) for i in f]
            if len(f) < 3:
                raise DegenerateGeometry(f"face {f} has fewer than 3 vertices")
            a = _newell(V[f])
            if np.linalg.norm(a) <= tol.eps(scale) * scale:
                raise DegenerateGeometry(f"face {f} has zero area")
            if np.dot(a, V[f].mean(axis=0) - centroid) < 0:
                f = f[::-1]
            oriented.append(f)
        if merge:
            oriented = _merge_coplanar(V, oriented, tol, scale)
        return cls._assemble(V, oriented)

    @classmethod
    def from_points(cls, points, tol: TolerancePolicy = DEFAULT_TOL) -> ConvexPolyhedron:
        """Convex hull of a point cloud (Qhull), with coplanar facets merged."""
        pts = np.array(points, dtype=float).reshape(-1, 3)
        try:
            hull = ConvexHull(pts)
        except Exception as exc:  # qhull raises its own error type
            raise DegenerateGeometry(f"convex hull failed: {exc}") from exc
        keep = np.array(sorted(hull.vertices))
        remap = -np.ones(len(pts), dtype=int)
        remap[keep] = np.arange(len(keep))
        V = pts[keep]
        faces = [list(remap[s]) for s in hull.simplices]
        return cls.from_faces(V, faces, tol=tol, merge=True)

    @classmethod
    def _assemble(cls, V: np.ndarray, faces: list[list[int]]) -> ConvexPolyhedron:
        normals = np.empty((len(faces), 3))
        offsets = np.empty(len(faces))
        for i, f in enumerate(faces):
            a = _newell(V[f])
            normals[i] = a / np.linalg.norm(a)
            offsets[i] = float(np.mean(V[f] @ normals[i]))
        half = {}
        for fi, f in enumerate(faces):
            for k in range(len(f)):
                half.setdefault((f[k], f[(k + 1) % len(f)]), []).append(fi)
        edges, edge_faces, nonmanifold = [], [], []
        index = {}
        for (a, b), owners in half.items():
            if (a, b) in index or (b, a) in index:
                continue
            back = half.get((b, a), [])
            if len(owners) != 1 or len(back) != 1:
                nonmanifold.append((a, b))
                continue
            index[(a, b)] = len(edges)
            edges.append((a, b))
            edge_faces.append((owners[0], back[0]))
        face_edges = []
        for f in faces:
            ids = []
            for k in range(len(f)):
                a, b = f[k], f[(k + 1) % len(f)]
                e = index.get((a, b), index.get((b, a)))
                if e is not None:
                    ids.append(e)
            face_edges.append(tuple(ids))
        E = np.array(edges, dtype=int).reshape(-1, 2)
        EF = np.array(edge_faces, dtype=int).reshape(-1, 2)
        for arr in (V, normals, offsets, E, EF):
            arr.flags.writeable = False
        return cls(V, tuple(tuple(f) for f in faces), normals, offsets, E, EF,
                   tuple(face_edges), tuple(nonmanifold))

    # -- derived quantities ------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def centroid(self) -> np.ndarray:
        c = self.vertices.mean(axis=0)
        c.flags.writeable = False
        return c

    @cached_property
    def scale(self) -> float:
        """Bounding radius about the vertex centroid."""
        return float(np.max(np.linalg.norm(self.vertices - self.centroid, axis=1)))

    def face_plane(self, f: int) -> Plane:
        return Plane(self.normals[f], self.offsets[f])

    def face_area(self, f: int) -> float:
        return 0.5 * float(np.linalg.norm(_newell(self.vertices[list(self.faces[f])])))

    def face_areas(self) -> np.ndarray:
        return np.array([self.face_area(f) for f in range(self.n_faces)])

    def surface_area(self) -> float:
        return float(self.face_areas().sum())

    def volume(self) -> float:
        return float(np.dot(self.face_areas(), self.offsets) / 3.0)

    def contains(self, p, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(self.normals @ p - self.offsets <= tol.eps(self.scale)))

    def transformed(self, rotation=None, scale=1.0, translation=None) -> ConvexPolyhedron:
        """Rigid/similarity image ``scale * R @ v + t`` with identical topology."""
        V = np.array(self.vertices)
        if rotation is not None:
            V = V @ np.asarray(rotation, dtype=float).T
        V = V * scale
        if translation is not None:
            V = V + np.asarray(translation, dtype=float)
        return ConvexPolyhedron._assemble(V, [list(f) for f in self.faces])


@dataclass
class ValidationReport:
    ok: bool
    n_vertices: int
    n_edges: int
    n_faces: int
    euler_ok: bool
    convexity_violations: list[tuple[int, int, float]]
    nonmanifold_edges: list[tuple[int, int]]
    outward_violations: list[int]

    @property
    def euler(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces


def validate(poly: ConvexPolyhedron, tol: TolerancePolicy = DEFAULT_TOL) -> ValidationReport:
    eps = tol.eps(poly.scale)
    sd = poly.vertices @ poly.normals.T - poly.offsets  # (V, F)
    bad = np.argwhere(sd > eps)
    convexity = [(int(v), int(f), float(sd[v, f])) for v, f in bad]
    c = poly.centroid
    outward = [f for f in range(poly.n_faces)
               if np.dot(poly.normals[f], c) - poly.offsets[f] >= 0]
    counted = poly.n_edges + len(poly.nonmanifold)
    euler_ok = poly.n_vertices - counted + poly.n_faces == 2
    ok = not convexity and not poly.nonmanifold and euler_ok and not outward
    return ValidationReport(ok, poly.n_vertices, counted, poly.n_faces, euler_ok,
                            convexity, list(poly.nonmanifold), outward)


def is_supporting_plane(plane: Plane, poly: ConvexPolyhedron,
                        tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """True iff all of P lies on one side of ``plane`` and some vertex touches it.

    Either orientation of the plane is accepted; use :func:`support_margin`
    for the oriented (kept side ``<= 0``) check.
    """
    eps = tol.eps(poly.scale)
    sd = signed_distance(plane, poly.vertices)
    one_side = sd.max() <= eps or sd.min() >= -eps
    return bool(one_side and np.abs(sd).min() <= eps)


def support_margin(plane: Plane, poly: ConvexPolyhedron) -> float:
    """``-max signed distance`` of P's vertices: >= 0 iff P is on the kept side."""
    return float(-signed_distance(plane, poly.vertices).max())


@dataclass(frozen=True)
class Silhouette:
    direction: np.ndarray
    visible: np.ndarray  # bool per face
    edges: np.ndarray     # edge indices with one visible, one invisible face


def check_direction(poly: ConvexPolyhedron, direction, tol: TolerancePolicy = DEFAULT_TOL):
    d = normalize(vec(direction))
    dots = poly.normals @ d
    worst = int(np.argmin(np.abs(dots)))
    if abs(dots[worst]) <= tol.abs_eps:
        raise DegenerateProjection(
            f"direction {d} is parallel to face {worst} (dot={dots[worst]:.3e})")
    return d, dots


def silhouette_classify(poly: ConvexPolyhedron, direction,
                        tol: TolerancePolicy = DEFAULT_TOL) -> Silhouette:
    d, dots = check_direction(poly, direction, tol)
    visible = dots > 0
    vis = visible[poly.edge_faces]
    sil = np.flatnonzero(vis[:, 0] != vis[:, 1])
    return Silhouette(d, visible, sil)


def repair_direction(poly: ConvexPolyhedron, direction, seed: int = 0,
                     tol: TolerancePolicy = DEFAULT_TOL, step: float = 1e-7,
                     max_steps: int = 100000) -> np.ndarray:
    """Rotate ``direction`` in ``step``-radian increments about a seeded axis
    until no face normal is perpendicular to it."""
    d = normalize(vec(direction))
    rng = np.random.default_rng(seed)
    axis = np.cross(d, rng.normal(size=3))
    axis /= np.linalg.norm(axis)
    for k in range(max_steps + 1):
        cand = rotate(d, axis, k * step)
        if np.min(np.abs(poly.normals @ cand)) > tol.abs_eps:
            return cand / np.linalg.norm(cand)
    raise DegenerateProjection("could not repair the projection direction")


def order_chains(poly: ConvexPolyhedron, edge_ids) -> list[tuple[list[int], bool]]:
    """Group edges into maximal vertex-connected chains.

    Returns ``(ordered edge ids, is_cycle)`` pairs.  Silhouette subsets have
    vertex degree <= 2, so each component is a path or a cycle.  Ordering is
    deterministic: paths start at their lowest-index end vertex, cycles at
    their lowest edge id and continue toward the lower-id neighbour.
    """
    edge_ids = [int(e) for e in edge_ids]
    at: dict[int, list[int]] = {}
    for e in edge_ids:
        a, b = poly.edges[e]
        at.setdefault(int(a), []).append(e)
        at.setdefault(int(b), []).append(e)
    if any(len(v) > 2 for v in at.values()):
        raise DegenerateProjection("edge subset has a vertex of degree > 2")
    seen: set[int] = set()
    chains = []

    def walk(v, e):
        out = []
        while e is not None and e not in seen:
            seen.add(e)
            out.append(e)
            a, b = (int(x) for x in poly.edges[e])
            v = b if a == v else a
            nxt = [x for x in at[v] if x != e and x not in seen]
            e = nxt[0] if nxt else None
        return out

    for v in sorted(at):
        if len(at[v]) == 1 and at[v][0] not in seen:
            chains.append((walk(v, at[v][0]), False))
    for e in sorted(edge_ids):
        if e in seen:
            continue
        a, b = (int(x) for x in poly.edges[e])
        # orient the cycle: from e, step toward whichever endpoint leads to the
        # smaller neighbouring edge id
        na = [x for x in at[a] if x != e]
        nb = [x for x in at[b] if x != e]
        start = b if (nb and (not na or nb[0] <= na[0])) else a
        chains.append((walk(a if start == b else b, e), True))
    return chains
