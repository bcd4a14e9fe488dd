"""Carving phase: balanced face rounds, zones of edge cuts, final cap cuts."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .cuts import Cut, CutKind
from .errors import CarveError, DegenerateCross, DegenerateProjection, FaceSetTooSmall
from .geometry import (DEFAULT_TOL, ConvexPolyhedron, Plane, TolerancePolicy, order_chains,
                       orthonormal_basis, support_margin)
from .region import Region, apply_cut, outer_surface_area

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
_TIE = 1e-9  # angles closer than this count as tied


@dataclass(frozen=True)
class FaceSet:
    faces: tuple[int, ...]
    depth: int
    tag: str = "r"

    def __len__(self):
        return len(self.faces)


@dataclass(frozen=True, eq=False)
class SeparatingChain:
    edges: tuple[int, ...]
    zone_direction: np.ndarray
    is_cycle: bool

    def __len__(self):
        return len(self.edges)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def balanced_direction(face_set: FaceSet, poly: ConvexPolyhedron, seed=0,
                       tol: TolerancePolicy = DEFAULT_TOL, frame=None,
                       n_pole_candidates: int = 16, n_finalists: int = 8) -> np.ndarray:
    """Projection direction splitting ``face_set`` into visible/invisible
    halves of at least ``floor(l/2)`` faces each, non-degenerate for all faces.

    A pole avoiding every normal is drawn from ``seed``; directions orthogonal
    to the pole are swept by longitude.  Visibility of a face in the set flips
    at two longitudes, so the sweep is cut into intervals of constant split;
    the widest balanced intervals are the finalists and the one whose
    midpoint has the largest ``min |n_f · u|`` over all faces wins.  The
    sign is chosen so the lowest-index face of the set is visible.
    ``frame`` (a rotation matrix) rotates the random pole draws, so a rotated
    instance with the matching frame reproduces the rotated plan.
    """
    F = np.asarray(face_set.faces, dtype=int)
    l = len(F)
    if l < 2:
        raise FaceSetTooSmall(f"face set of size {l} cannot be split")
    rng = _as_rng(seed)
    N = poly.normals
    half = l // 2
    for _attempt in range(8):
        P = rng.normal(size=(n_pole_candidates, 3))
        P /= np.linalg.norm(P, axis=1)[:, None]
        if frame is not None:
            P = P @ np.asarray(frame, dtype=float).T
        p = P[int(np.argmin(np.abs(P @ N.T).max(axis=1)))]
        e1, e2 = orthonormal_basis(p)
        NF = N[F]
        psi = np.arctan2(NF @ e2, NF @ e1)
        # visibility of face f flips where theta = psi_f ± π/2
        ev = np.sort(np.concatenate([psi + 0.5 * math.pi, psi - 0.5 * math.pi]) % TWO_PI)
        nxt = np.append(ev[1:], ev[0] + TWO_PI)
        gap = nxt - ev
        theta = (0.5 * (ev + nxt)) % TWO_PI
        # visible count at theta: psi within (theta - π/2, theta + π/2)
        ps = np.sort(psi % TWO_PI)
        ps2 = np.concatenate([ps, ps + TWO_PI])
        lo = (theta - 0.5 * math.pi) % TWO_PI
        count = np.searchsorted(ps2, lo + math.pi, side="left") - np.searchsorted(ps2, lo, side="right")
        ok = np.flatnonzero((count >= half) & (l - count >= half) & (gap > _TIE))
        if len(ok) == 0:
            continue
        if len(ok) > n_finalists:
            # keep near-ties with the n-th widest so the cut does not hinge on rounding
            nth = np.partition(gap[ok], len(ok) - n_finalists)[len(ok) - n_finalists]
            ok = ok[gap[ok] >= nth - _TIE]
        U = np.cos(theta[ok])[:, None] * e1 + np.sin(theta[ok])[:, None] * e2
        U /= np.linalg.norm(U, axis=1)[:, None]
        # u and -u give the same split; the lowest-index face is made visible
        U[NF[np.argmin(F)] @ U.T < 0] *= -1.0
        margin = np.abs(U @ N.T).min(axis=1)
        best = float(margin.max())
        if best <= tol.abs_eps:
            continue
        # remaining ties go to the lexicographically smallest visible set,
        # which is independent of the in-plane basis
        near = np.flatnonzero(margin >= best - _TIE * 1e-3)
        keys = [tuple(np.sort(F[NF @ U[k] > 0])) for k in near]
        return U[near[min(range(len(near)), key=keys.__getitem__)]]
    raise DegenerateProjection("no balanced non-degenerate direction found")


def separating_chain(face_set: FaceSet, poly: ConvexPolyhedron, direction,
                     tol: TolerancePolicy = DEFAULT_TOL):
    """Chains of edges internal to ``face_set`` with one visible and one
    invisible face; returns ``(chains, (visible child, invisible child))``."""
    d = np.asarray(direction, dtype=float)
    dots = poly.normals @ d
    if np.min(np.abs(dots)) <= tol.abs_eps:
        raise DegenerateProjection("zone direction is parallel to a face")
    visible = dots > 0
    in_f = np.zeros(poly.n_faces, dtype=bool)
    in_f[list(face_set.faces)] = True
    ef = poly.edge_faces
    mask = in_f[ef[:, 0]] & in_f[ef[:, 1]] & (visible[ef[:, 0]] != visible[ef[:, 1]])
    chains = [SeparatingChain(tuple(edges), d.copy(), cyc)
              for edges, cyc in order_chains(poly, np.flatnonzero(mask))]
    vis = tuple(f for f in face_set.faces if visible[f])
    inv = tuple(f for f in face_set.faces if not visible[f])
    children = (FaceSet(vis, face_set.depth + 1, face_set.tag + "0"),
                FaceSet(inv, face_set.depth + 1, face_set.tag + "1"))
    return chains, children


def edge_cut_plane(poly: ConvexPolyhedron, edge: int, zone_dir,
                   tol: TolerancePolicy = DEFAULT_TOL) -> Plane:
    """Plane through ``edge`` parallel to ``zone_dir``, with P on the kept side."""
    a, b = poly.vertices[poly.edges[edge]]
    n = np.cross(b - a, np.asarray(zone_dir, dtype=float))
    nn = np.linalg.norm(n)
    if nn <= tol.eps(poly.scale) * max(1.0, np.linalg.norm(b - a)):
        raise DegenerateCross(f"edge {edge} is parallel to the zone direction")
    n = n / nn
    plane = Plane(n, float(np.dot(n, a)))
    if np.dot(n, poly.centroid) - plane.offset > 0:
        plane = plane.flipped()
    if support_margin(plane, poly) < -tol.eps(poly.scale):
        raise CarveError(f"edge cut through edge {edge} would cut into P")
    return plane


def edge_schedule(k: int) -> list[list[int]]:
    """0-based chain positions cut in each edge round (middle = ceil(k/2), 1-based)."""
    rounds = []
    segments = [(0, k)] if k > 0 else []
    while segments:
        this, nxt = [], []
        for lo, hi in segments:
            m = lo + (hi - lo + 1) // 2 - 1
            this.append(m)
            if lo < m:
                nxt.append((lo, m))
            if m + 1 < hi:
                nxt.append((m + 1, hi))
        rounds.append(this)
        segments = nxt
    return rounds


@dataclass
class EdgeRoundRecord:
    face_round: int
    face_set: str
    chain_index: int
    edge_round: int
    edges: list[int]
    cost: float
    surface_at_start: float | None = None


@dataclass
class FaceRoundRecord:
    face_round: int
    face_set: str
    size: int
    direction: list[float]
    child_sizes: tuple[int, int]
    chain_lengths: list[int]
    chain_cycles: list[bool]


@dataclass
class RoundLog:
    face_rounds: list[FaceRoundRecord] = field(default_factory=list)
    edge_rounds: list[EdgeRoundRecord] = field(default_factory=list)
    face_cut_cost: float = 0.0
    chainless: int = 0

    @property
    def n_face_rounds(self) -> int:
        return 1 + max((r.face_round for r in self.face_rounds), default=-1)


def edge_rounds(region: Region, chain: SeparatingChain, poly: ConvexPolyhedron,
                tol: TolerancePolicy = DEFAULT_TOL, face_round: int | None = None,
                track_surface: bool = False):
    """Apply a zone of edge cuts in binary midpoint order.

    Returns ``(region, cuts, per_round)`` where ``per_round`` lists
    ``(edge_round, edges, cost, surface_at_start)``.
    """
    if len(chain) == 0:
        raise ValueError("empty separating chain")
    keep = poly.centroid
    cuts, per_round = [], []
    for j, positions in enumerate(edge_schedule(len(chain))):
        surface = outer_surface_area(region, tol) if track_surface else None
        cost_j = 0.0
        edges = [chain.edges[p] for p in positions]
        for e in edges:
            plane = edge_cut_plane(poly, e, chain.zone_direction, tol)
            region, cost = apply_cut(region, plane, keep, tol)
            cuts.append(Cut(region.plane(-1), CutKind.EDGE, face_round, j, ("edge", e), cost))
            cost_j += cost
        per_round.append((j, edges, cost_j, surface))
    return region, cuts, per_round


def face_round_splits(poly: ConvexPolyhedron, seed=0, tol: TolerancePolicy = DEFAULT_TOL,
                      frame=None):
    """Yield ``(face_set, direction, chains, children)`` breadth-first.

    This is the face-round recursion alone, without touching any region.
    """
    rng = _as_rng(seed)
    current = [FaceSet(tuple(range(poly.n_faces)), 0, "r")]
    while current:
        nxt = []
        for fs in current:
            u = balanced_direction(fs, poly, rng, tol, frame)
            chains, children = separating_chain(fs, poly, u, tol)
            yield fs, u, chains, children
            nxt.extend(c for c in children if len(c) >= 2)
        current = nxt


def carve(region: Region, poly: ConvexPolyhedron, seed=0, tol: TolerancePolicy = DEFAULT_TOL,
          frame=None, track_surface: bool = False):
    """Run all face rounds with their edge rounds, then one cap cut per face.

    Returns ``(region, cuts, round_log)``.
    """
    log_ = RoundLog()
    cuts: list[Cut] = []
    for fs, u, chains, children in face_round_splits(poly, seed, tol, frame):
        log_.face_rounds.append(FaceRoundRecord(
            fs.depth, fs.tag, len(fs), [float(x) for x in u],
            (len(children[0]), len(children[1])),
            [len(c) for c in chains], [c.is_cycle for c in chains]))
        if not chains:
            # only disconnected face sets split without an internal edge
            log_.chainless += 1
            log.debug("face set %s split without a separating chain", fs.tag)
        if len(chains) > 1:
            log.debug("face set %s has %d separating chains", fs.tag, len(chains))
        for ci, chain in enumerate(chains):
            region, zone_cuts, per_round = edge_rounds(region, chain, poly, tol, fs.depth,
                                                       track_surface)
            cuts.extend(zone_cuts)
            for j, edges, cost, surface in per_round:
                log_.edge_rounds.append(EdgeRoundRecord(fs.depth, fs.tag, ci, j, edges,
                                                        cost, surface))
    keep = poly.centroid
    for f in range(poly.n_faces):
        region, cost = apply_cut(region, poly.face_plane(f), keep, tol)
        cuts.append(Cut(region.plane(-1), CutKind.FACE, None, None, ("face", f), cost))
        log_.face_cut_cost += cost
    return region, cuts, log_
