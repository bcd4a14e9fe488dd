"""Plan documents (versioned JSON) and region snapshot meshes."""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .boxing import LowerBounds, OrientedBox
from .carving import EdgeRoundRecord, FaceRoundRecord, RoundLog
from .cuts import Cut, CutKind
from .geometry import DEFAULT_TOL, ConvexPolyhedron, Plane, TolerancePolicy, orthonormal_basis
from .offio import dump_off
from .plan import CutPlan
from .region import Ball, Region, apply_cut
from .separation import Placement

SCHEMA_VERSION = "1"


class IoError(OSError):
    """A plan document could not be written or read back."""


def _f(x):
    return None if x is None else float(x)


def plan_document(plan: CutPlan, poly: ConvexPolyhedron) -> dict:
    """The plan as plain JSON-ready data, with the instance embedded."""
    cuts = []
    for i, c in enumerate(plan.cuts):
        cuts.append({
            "index": i,
            "kind": c.kind.value,
            "unit_normal": [float(x) for x in c.plane.normal],
            "offset": float(c.plane.offset),
            "face_round": c.face_round,
            "edge_round": c.edge_round,
            "source_feature": [c.source_feature[0], int(c.source_feature[1])],
            "cost": float(c.realized_cost),
        })
    b = plan.bounds
    doc = {
        "schema_version": SCHEMA_VERSION,
        "instance": {
            "hash": plan.instance_hash,
            "n_vertices": plan.n_vertices,
            "vertices": [[float(x) for x in v] for v in poly.vertices],
            "faces": [list(map(int, f)) for f in poly.faces],
            "ball": {"center": [float(x) for x in plan.ball.center], "radius": plan.ball.radius},
        },
        "seed": plan.seed,
        "placement": plan.placement.value,
        "phase_markers": plan.phase_markers,
        "cuts": cuts,
        "totals": {
            "box_phase_cost": plan.box_phase_cost,
            "six_cut_cost": plan.six_cut_cost,
            "carve_phase_cost": plan.carve_phase_cost,
            "face_cut_cost": plan.face_cut_cost,
            "total_cost": plan.total_cost,
        },
        "bounds": {
            "cornered_bound": _f(b.cornered_bound),
            "centered_bound": _f(b.centered_bound),
            "box_bound": float(b.box_bound),
            "combined": float(b.combined),
        },
        "ratio": plan.ratio,
        "ratio_normalized": plan.ratio_normalized,
        "surface_in": _f(plan.surface_in),
    }
    if plan.box is not None:
        doc["box"] = {"center": [float(x) for x in plan.box.center],
                      "axes": [[float(x) for x in a] for a in plan.box.axes],
                      "half_extents": [float(x) for x in plan.box.half_extents]}
    if plan.round_log is not None:
        rl = plan.round_log
        doc["rounds"] = {
            "n_face_rounds": rl.n_face_rounds,
            "chainless": rl.chainless,
            "face_cut_cost": float(rl.face_cut_cost),
            "face_rounds": [asdict(r) for r in rl.face_rounds],
            "edge_rounds": [asdict(r) for r in rl.edge_rounds],
        }
    return doc


def dumps_plan(plan: CutPlan, poly: ConvexPolyhedron) -> str:
    # floats go out as shortest round-trip reprs, which read back bit-exactly
    return json.dumps(plan_document(plan, poly), indent=1, allow_nan=False) + "\n"


def export_plan(plan: CutPlan, poly: ConvexPolyhedron, path) -> None:
    try:
        with open(os.fspath(path), "w", encoding="utf-8") as fh:
            fh.write(dumps_plan(plan, poly))
    except OSError as exc:
        raise IoError(f"cannot write plan to {path}: {exc}") from exc


def plan_from_document(doc: dict) -> tuple[CutPlan, ConvexPolyhedron, Ball]:
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise IoError(f"unsupported plan schema {doc.get('schema_version')!r}")
    inst = doc["instance"]
    V = np.array(inst["vertices"], dtype=float)
    poly = ConvexPolyhedron._assemble(V, [list(f) for f in inst["faces"]])
    ball = Ball(np.array(inst["ball"]["center"], dtype=float), inst["ball"]["radius"])
    cuts = [Cut(Plane(np.array(c["unit_normal"]), c["offset"]), CutKind(c["kind"]),
                c["face_round"], c["edge_round"],
                (c["source_feature"][0], int(c["source_feature"][1])), float(c["cost"]))
            for c in doc["cuts"]]
    b = doc["bounds"]
    bounds = LowerBounds(b["cornered_bound"], b["centered_bound"], b["box_bound"])
    box = None
    if "box" in doc:
        bx = doc["box"]
        box = OrientedBox(np.array(bx["center"]), np.array(bx["axes"]), np.array(bx["half_extents"]))
    rlog = None
    if "rounds" in doc:
        r = doc["rounds"]
        rlog = RoundLog(
            [FaceRoundRecord(**{**x, "child_sizes": tuple(x["child_sizes"])}) for x in r["face_rounds"]],
            [EdgeRoundRecord(**x) for x in r["edge_rounds"]],
            r["face_cut_cost"], r.get("chainless", 0))
    plan = CutPlan(inst["hash"], ball, int(doc["seed"]), Placement(doc["placement"]),
                   int(inst["n_vertices"]), cuts, bounds, box, doc.get("surface_in"), rlog)
    return plan, poly, ball


def import_plan(path) -> tuple[CutPlan, ConvexPolyhedron, Ball]:
    """Read a plan document; returns the plan and the embedded instance."""
    try:
        with open(os.fspath(path), encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise IoError(f"cannot read plan from {path}: {exc}") from exc
    try:
        return plan_from_document(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise IoError(f"malformed plan document {path}: {exc}") from exc


# -- snapshots -------------------------------------------------------------------

SNAPSHOT_RESOLUTION_DEG = 2.0


def _sphere_grid(resolution_deg: float) -> np.ndarray:
    h = math.radians(resolution_deg)
    lat = np.arange(-0.5 * math.pi + 0.5 * h, 0.5 * math.pi, h)
    pts = [np.array([[0.0, 0.0, -1.0], [0.0, 0.0, 1.0]])]
    for t in lat:
        m = max(3, int(round(2 * math.pi * math.cos(t) / h)))
        ph = np.arange(m) * (2 * math.pi / m)
        pts.append(np.stack([math.cos(t) * np.cos(ph), math.cos(t) * np.sin(ph),
                             np.full(m, math.sin(t))], axis=1))
    return np.vstack(pts)


def region_mesh(region: Region, resolution_deg: float = SNAPSHOT_RESOLUTION_DEG,
                tol: TolerancePolicy = DEFAULT_TOL):
    """Triangulated boundary of the region, for display only.

    Returns ``(vertices, triangles)``: the hull of the cell's vertices inside
    the ball, sphere grid points inside every half-space, and samples of each
    plane's circle on the sphere.
    """
    o, R = region.ball.center, region.ball.radius
    eps = tol.eps(R)
    cell = region.polytope().vertices
    pts = [cell[np.linalg.norm(cell - o, axis=1) <= R + eps]]
    N, d = region.normals, region.offsets

    def inside(X, skip=None):
        if len(d) == 0:
            return np.ones(len(X), dtype=bool)
        viol = X @ N.T - d
        if skip is not None:
            viol[:, skip] = -np.inf
        return np.all(viol <= eps, axis=1)

    S = o + R * _sphere_grid(resolution_deg)
    pts.append(S[inside(S)])
    h = math.radians(resolution_deg)
    for k in range(len(d)):
        s = float(N[k] @ o - d[k])
        rho2 = R * R - s * s
        if rho2 <= 0:
            continue
        rho = math.sqrt(rho2)
        u, v = orthonormal_basis(N[k])
        m = max(8, int(math.ceil(2 * math.pi / h)))
        ph = np.arange(m) * (2 * math.pi / m)
        C = (o - s * N[k]) + rho * (np.cos(ph)[:, None] * u + np.sin(ph)[:, None] * v)
        pts.append(C[inside(C, k)])
    P = np.vstack(pts)
    if len(P) < 4:
        return P, np.zeros((0, 3), dtype=int)
    try:
        hull = ConvexHull(P)
    except QhullError:
        return P, np.zeros((0, 3), dtype=int)
    keep = np.array(sorted(hull.vertices))
    remap = -np.ones(len(P), dtype=int)
    remap[keep] = np.arange(len(keep))
    tris = remap[hull.simplices]
    # outward winding
    c = P[keep].mean(axis=0)
    Vk = P[keep]
    nrm = np.cross(Vk[tris[:, 1]] - Vk[tris[:, 0]], Vk[tris[:, 2]] - Vk[tris[:, 0]])
    flip = np.einsum("ij,ij->i", nrm, Vk[tris[:, 0]] - c) < 0
    tris[flip] = tris[flip][:, ::-1]
    return Vk, tris


def export_snapshots(plan: CutPlan, poly: ConvexPolyhedron, ball: Ball, every_k: int,
                     directory, tol: TolerancePolicy = DEFAULT_TOL) -> list[str]:
    """Write ``snapshot_XXXXX.off`` after every ``every_k``-th cut and after the last."""
    if every_k < 1:
        raise ValueError("every_k must be >= 1")
    os.makedirs(os.fspath(directory), exist_ok=True)
    keep = poly.centroid
    region = Region.fresh(ball)
    written = []
    last = len(plan.cuts) - 1
    for i, cut in enumerate(plan.cuts):
        region, _ = apply_cut(region, cut.plane, keep, tol)
        if (i + 1) % every_k == 0 or i == last:
            V, T = region_mesh(region, tol=tol)
            path = os.path.join(os.fspath(directory), f"snapshot_{i + 1:05d}.off")
            try:
                with open(path, "w", encoding="ascii") as fh:
                    fh.write(dump_off(V, T))
            except OSError as exc:
                raise IoError(f"cannot write snapshot {path}: {exc}") from exc
            written.append(path)
    return written
