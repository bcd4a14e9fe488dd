"""Plan assembly, replay certification and approximation-ratio report."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .boxing import LowerBounds, OrientedBox, box_cut_phase, lower_bounds, min_volume_box
from .carving import RoundLog, carve
from .cuts import Cut, CutKind
from .geometry import DEFAULT_TOL, ConvexPolyhedron, TolerancePolicy, support_margin
from .region import Ball, Region, apply_cut, contains, outer_surface_area, section_area
from .separation import Placement, classify, closest_point, d_separation


def instance_hash(poly: ConvexPolyhedron, ball: Ball) -> str:
    """SHA-256 over full-precision vertex coordinates, faces and the ball."""
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(poly.vertices, dtype="<f8").tobytes())
    for f in poly.faces:
        h.update(np.asarray(f, dtype="<i8").tobytes())
        h.update(b"|")
    h.update(np.ascontiguousarray(ball.center, dtype="<f8").tobytes())
    h.update(np.float64(ball.radius).astype("<f8").tobytes())
    return h.hexdigest()


@dataclass
class CutPlan:
    instance_hash: str
    ball: Ball
    seed: int
    placement: Placement
    n_vertices: int
    cuts: list[Cut]
    bounds: LowerBounds
    box: OrientedBox | None = None
    surface_in: float | None = None
    round_log: RoundLog | None = field(default=None, repr=False)

    def costs(self, *kinds: CutKind) -> float:
        return float(sum(c.realized_cost for c in self.cuts if c.kind in kinds))

    @property
    def phase_markers(self) -> dict[str, int]:
        """Index of the first cut of each phase."""
        carve_at = next((i for i, c in enumerate(self.cuts)
                         if c.kind in (CutKind.EDGE, CutKind.FACE)), len(self.cuts))
        return {"box": 0, "carve": carve_at}

    @property
    def box_phase_cost(self) -> float:
        return self.costs(CutKind.D_SEPARATION, CutKind.BOX)

    @property
    def six_cut_cost(self) -> float:
        return self.costs(CutKind.BOX)

    @property
    def carve_phase_cost(self) -> float:
        return self.costs(CutKind.EDGE)

    @property
    def face_cut_cost(self) -> float:
        return self.costs(CutKind.FACE)

    @property
    def total_cost(self) -> float:
        return float(sum(c.realized_cost for c in self.cuts))

    @property
    def ratio(self) -> float:
        return self.total_cost / self.bounds.combined

    @property
    def ratio_normalized(self) -> float:
        return self.ratio / (math.log2(self.n_vertices) + 1.0) ** 2


def build_plan(poly: ConvexPolyhedron, ball: Ball, seed: int = 0,
               tol: TolerancePolicy = DEFAULT_TOL, frame=None,
               track_surface: bool = False) -> CutPlan:
    """Box-cutting phase (with the D-separation when cornered) then carving."""
    placement = classify(poly, ball, tol)
    keep = poly.centroid
    region = Region.fresh(ball)
    cuts: list[Cut] = []
    r_sq = None
    if placement is Placement.CORNERED:
        region, cost = apply_cut(region, d_separation(poly, ball, tol), keep, tol)
        cuts.append(Cut(region.plane(-1), CutKind.D_SEPARATION, None, None, ("point", 0), cost))
        r_sq = ball.radius ** 2 - closest_point(poly, ball.center, tol).distance ** 2
    surface_in = outer_surface_area(region, tol)
    box = min_volume_box(poly, tol)
    region, box_cuts = box_cut_phase(region, poly, box, tol)
    cuts.extend(box_cuts)
    region, carve_cuts, rlog = carve(region, poly, seed, tol, frame, track_surface)
    cuts.extend(carve_cuts)
    return CutPlan(instance_hash(poly, ball), ball, int(seed), placement, poly.n_vertices,
                   cuts, lower_bounds(poly, ball, box, r_sq), box, surface_in, rlog)


@dataclass
class CertificationReport:
    ok: bool
    hash_ok: bool
    cost_mismatches: list[tuple[int, float, float]]
    safety_violations: list[tuple[int, float]]
    missing_edges: list[int]
    repeated_edges: list[int]
    unexposed_faces: list[tuple[int, float, float]]
    vertices_outside: list[int]
    final_region: Region | None = field(default=None, repr=False)

    def summary(self) -> str:
        if self.ok:
            return "plan certified"
        parts = []
        if not self.hash_ok:
            parts.append("instance hash mismatch")
        for name in ("cost_mismatches", "safety_violations", "missing_edges",
                     "repeated_edges", "unexposed_faces", "vertices_outside"):
            v = getattr(self, name)
            if v:
                parts.append(f"{len(v)} {name.replace('_', ' ')}")
        return "certification FAILED: " + ", ".join(parts)


def replay(plan: CutPlan, poly: ConvexPolyhedron, ball: Ball,
           tol: TolerancePolicy = DEFAULT_TOL, cost_rtol: float = 1e-9,
           face_rtol: float = 1e-6) -> CertificationReport:
    """Re-execute every cut on a fresh region and check the plan's claims."""
    keep = poly.centroid
    scale = poly.scale
    region = Region.fresh(ball)
    cost_bad, unsafe = [], []
    floor = 1e-12 * ball.radius ** 2
    for i, cut in enumerate(plan.cuts):
        margin = support_margin(cut.plane, poly)
        if margin < -1e-9 * max(scale, 1.0):
            unsafe.append((i, margin))
        region, cost = apply_cut(region, cut.plane, keep, tol)
        if abs(cost - cut.realized_cost) > cost_rtol * max(abs(cost), abs(cut.realized_cost)) + floor:
            cost_bad.append((i, cut.realized_cost, cost))
    hits = np.zeros(poly.n_edges, dtype=int)
    for cut in plan.cuts:
        if cut.kind is CutKind.EDGE:
            hits[cut.source_feature[1]] += 1
    unexposed = []
    for f in range(poly.n_faces):
        want = poly.face_area(f)
        got = section_area(region, poly.face_plane(f), tol)
        if abs(got - want) > face_rtol * want:
            unexposed.append((f, want, got))
    outside = [v for v in range(poly.n_vertices) if not contains(region, poly.vertices[v], tol)]
    hash_ok = plan.instance_hash == instance_hash(poly, ball)
    missing = [int(e) for e in np.flatnonzero(hits == 0)]
    repeated = [int(e) for e in np.flatnonzero(hits > 1)]
    ok = (hash_ok and not cost_bad and not unsafe and not missing and not repeated
          and not unexposed and not outside)
    return CertificationReport(ok, hash_ok, cost_bad, unsafe, missing, repeated, unexposed,
                               outside, region)
