"""Exception types raised across the package."""


class CarveError(Exception):
    """Base class for all errors raised by spherecarve."""


class DegenerateProjection(CarveError):
    """A projection direction is (nearly) parallel to some face of the polyhedron."""


class DegenerateGeometry(CarveError):
    """Input is flat or otherwise too degenerate to process."""


class DegenerateCross(CarveError):
    """An edge is (nearly) parallel to the requested zone direction."""


class KeepPointOnPlane(CarveError):
    """The point that must survive a cut lies on the cutting plane."""


class PNotInsideBall(CarveError):
    """Some vertex of the polyhedron is not strictly inside the stock ball."""


class OInsideP(CarveError):
    """A closest-point query was made from a point inside the polyhedron."""


class CenteredInput(CarveError):
    """A D-separation was requested for a polyhedron that contains the center."""


class FaceSetTooSmall(CarveError):
    """A face set with fewer than two faces cannot be split."""


class DegenerateHull(CarveError):
    """A generated point set has a hull with fewer than four vertices."""


class ParseError(CarveError):
    """Malformed OFF input; carries the 1-based line (and column when known)."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class NotConvex(CarveError):
    """Mesh fails the convexity test; ``violations`` lists (vertex, face, distance)."""

    def __init__(self, violations):
        self.violations = list(violations)
        head = ", ".join(f"v{v}/f{f}" for v, f, _ in self.violations[:8])
        more = "" if len(self.violations) <= 8 else f" (+{len(self.violations) - 8} more)"
        super().__init__(f"mesh is not convex: {head}{more}")
