"""Guillotine cutting plans that carve a convex polyhedron out of a ball."""
from .boxing import LowerBounds, OrientedBox, lower_bounds, min_volume_box
from .carving import RoundLog, balanced_direction, carve, separating_chain
from .cuts import Cut, CutKind
from .errors import CarveError, NotConvex, ParseError
from .geometry import DEFAULT_TOL, ConvexPolyhedron, Plane, TolerancePolicy
from .instances import InstanceSpec, generate, platonic, random_cornered, random_hull
from .offio import load_off, write_off
from .plan import CertificationReport, CutPlan, build_plan, replay
from .planio import export_plan, export_snapshots, import_plan
from .region import Ball, Region, apply_cut, cut_cost, outer_surface_area, section_area
from .separation import Placement, classify, closest_point, d_separation

__version__ = "0.1.0"

__all__ = [
    "Ball", "CarveError", "CertificationReport", "ConvexPolyhedron", "Cut", "CutKind",
    "CutPlan", "DEFAULT_TOL", "InstanceSpec", "LowerBounds", "NotConvex", "OrientedBox",
    "ParseError", "Placement", "Plane", "Region", "RoundLog", "TolerancePolicy",
    "apply_cut", "balanced_direction", "build_plan", "carve", "classify", "closest_point",
    "cut_cost", "d_separation", "export_plan", "export_snapshots", "generate",
    "import_plan", "load_off", "lower_bounds", "min_volume_box", "outer_surface_area",
    "platonic", "random_cornered", "random_hull", "replay", "section_area",
    "separating_chain", "write_off",
]
