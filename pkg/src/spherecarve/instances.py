"""Instance generators and the resolvable instance description."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometry, DegenerateHull
from .geometry import ConvexPolyhedron
from .region import Ball
from .separation import closest_point

PHI = (1.0 + 5.0 ** 0.5) / 2.0
HULL_RADIUS = 0.5
CORNERED_BALL_RADIUS = 1.5

_PLATONIC = {
    "tetrahedron": np.array([[1, 1, 1], [-1, -1, 1], [-1, 1, -1], [1, -1, -1]], dtype=float),
    "cube": np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=float),
    "octahedron": np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]],
                           dtype=float),
    "icosahedron": np.array([p for a in (-1, 1) for b in (-PHI, PHI)
                             for p in ([0, a, b], [a, b, 0], [b, 0, a])], dtype=float),
}

GENERATORS = tuple(_PLATONIC) + ("random_hull", "random_cornered")


def platonic(kind: str, radius: float = HULL_RADIUS) -> ConvexPolyhedron:
    pts = _PLATONIC[kind]
    pts = pts * (radius / np.linalg.norm(pts[0]))
    return ConvexPolyhedron.from_points(pts)


def random_hull(n: int, seed: int, radius: float = HULL_RADIUS) -> ConvexPolyhedron:
    """Hull of ``n`` seeded uniform points on a sphere of the given radius."""
    if n < 4:
        raise DegenerateHull("random hulls need n >= 4")
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, 3))
    pts *= radius / np.linalg.norm(pts, axis=1)[:, None]
    try:
        poly = ConvexPolyhedron.from_points(pts)
    except DegenerateGeometry as exc:
        raise DegenerateHull(str(exc)) from exc
    if poly.n_vertices < 4:
        raise DegenerateHull(f"hull has only {poly.n_vertices} vertices")
    return poly


def cornered_translation(poly: ConvexPolyhedron, direction: np.ndarray, target: float) -> np.ndarray:
    """Translation along ``direction`` leaving the origin at ``target`` from P."""
    w = direction / np.linalg.norm(direction)
    lo, hi = 0.0, 4.0 * poly.scale + target + 1.0

    def gap(t):
        o = -t * w
        if poly.contains(o):
            return -1.0
        return closest_point(poly, o).distance

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gap(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) * w


def random_cornered(n: int, seed: int, radius: float = HULL_RADIUS):
    """The ``random_hull(n, seed)`` hull moved so the origin lies outside it.

    The origin-to-P distance is drawn uniformly from [0.1, 0.4]; the stock
    ball has radius 1.5 so the moved hull stays strictly inside.
    """
    poly = random_hull(n, seed, radius)
    rng = np.random.default_rng([seed, 1])
    w = rng.normal(size=3)
    target = rng.uniform(0.1, 0.4)
    t = cornered_translation(poly, w, target)
    return poly.transformed(translation=t), Ball(np.zeros(3), CORNERED_BALL_RADIUS)


@dataclass
class InstanceSpec:
    """Where an instance comes from and how it is placed in the stock ball.

    ``source`` is a generator name or ``"file"``; ``rotation``/``translation``
    are applied to the polyhedron after generation or loading.
    """

    source: str
    n: int | None = None
    seed: int = 0
    path: str | None = None
    center: tuple[float, float, float] | None = None
    radius: float | None = None
    rotation: np.ndarray | None = None
    translation: np.ndarray | None = None
    scale: float = 1.0
    params: dict = field(default_factory=dict)

    def resolve(self) -> tuple[ConvexPolyhedron, Ball]:
        ball = Ball(np.zeros(3), 1.0)
        if self.source == "file":
            from .offio import load_off
            poly = load_off(self.path)
        elif self.source in _PLATONIC:
            poly = platonic(self.source)
        elif self.source == "random_hull":
            poly = random_hull(self.n, self.seed)
        elif self.source == "random_cornered":
            poly, ball = random_cornered(self.n, self.seed)
        else:
            raise ValueError(f"unknown instance source {self.source!r}")
        if self.rotation is not None or self.translation is not None or self.scale != 1.0:
            poly = poly.transformed(self.rotation, self.scale, self.translation)
        center = ball.center if self.center is None else np.asarray(self.center, dtype=float)
        radius = ball.radius * self.scale if self.radius is None else self.radius
        return poly, Ball(center, radius)


def generate(kind: str, n: int | None = None, seed: int = 0) -> tuple[ConvexPolyhedron, Ball]:
    """Resolve a generator name straight to ``(poly, ball)``."""
    return InstanceSpec(kind, n=n, seed=seed).resolve()


def random_rotation(seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def expected_round_bound(n_faces: int) -> int:
    return math.ceil(math.log2(n_faces)) + 1
