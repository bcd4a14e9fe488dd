"""The cut record shared by every phase."""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .geometry import Plane


class CutKind(enum.Enum):
    D_SEPARATION = "d_separation"
    BOX = "box"
    EDGE = "edge"
    FACE = "face"


@dataclass(frozen=True)
class Cut:
    """One guillotine cut; ``plane`` is oriented with P on its negative side.

    ``source_feature`` is ``("edge", e)``, ``("face", f)``, ``("box", k)`` with
    k = 2*axis + (0 for +, 1 for -), or ``("point", 0)`` for the D-separation.
    """

    plane: Plane
    kind: CutKind
    face_round: int | None
    edge_round: int | None
    source_feature: tuple[str, int]
    realized_cost: float
