from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import settings

from spherecarve.geometry import ConvexPolyhedron
from spherecarve.instances import platonic, random_cornered, random_hull, random_rotation
from spherecarve.plan import CertificationReport, CutPlan, build_plan, replay
from spherecarve.region import Ball

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

# vertex counts for the shared pool, one instance per entry and family
POOL_SIZES = (8, 12, 16, 24, 32, 48, 64, 96, 128, 200, 256, 300, 400, 500,
              10, 20, 40, 80, 160, 320, 450, 30)

_ACCEPTANCE: dict[int, str] = {}
_TABLES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    _ACCEPTANCE[number] = line
    print(line)


def record_table(text: str) -> None:
    _TABLES.append(text)
    print(text)


def pytest_terminal_summary(terminalreporter):
    if _TABLES:
        terminalreporter.section("ratio table")
        for t in _TABLES:
            terminalreporter.write(t)
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])


@dataclass
class Case:
    name: str
    poly: ConvexPolyhedron
    ball: Ball
    plan: CutPlan | None = None
    report: CertificationReport | None = None


def pool_instances() -> list[Case]:
    unit = Ball(np.zeros(3), 1.0)
    cases = [Case(k, platonic(k), unit) for k in ("tetrahedron", "cube", "octahedron", "icosahedron")]
    cases.append(Case("cube-rotated", platonic("cube").transformed(random_rotation(5)), unit))
    cases.append(Case("cube-cornered",
                      platonic("cube").transformed(translation=np.array([0.6, 0.0, 0.0])), unit))
    for i, n in enumerate(POOL_SIZES):
        cases.append(Case(f"hull-{n}-{i}", random_hull(n, 100 + i), unit))
    for i, n in enumerate(POOL_SIZES):
        poly, ball = random_cornered(n, 200 + i)
        cases.append(Case(f"cornered-{n}-{i}", poly, ball))
    return cases


@pytest.fixture(scope="session")
def pool() -> list[Case]:
    """Fifty instances (n up to 500) with their plans and replay reports."""
    cases = pool_instances()
    for c in cases:
        c.plan = build_plan(c.poly, c.ball, seed=7)
        c.report = replay(c.plan, c.poly, c.ball)
    return cases


@pytest.fixture(scope="session")
def tetra_plan():
    poly = platonic("tetrahedron")
    ball = Ball(np.zeros(3), 1.0)
    return poly, ball, build_plan(poly, ball, seed=0)
