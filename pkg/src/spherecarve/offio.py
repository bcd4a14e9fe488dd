"""ASCII OFF reading and writing."""
from __future__ import annotations

import io
import os

import numpy as np

from .errors import DegenerateGeometry, NotConvex, ParseError
from .geometry import DEFAULT_TOL, ConvexPolyhedron, TolerancePolicy, validate


def _content_lines(text: str):
    """Yield ``(line_no, [(token, column), ...])`` for non-empty lines, comments dropped."""
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks, col = [], 0
        for part in line.split():
            col = line.index(part, col)
            toks.append((part, col + 1))
            col += len(part)
        if toks:
            yield no, toks


def _number(tok, line, kind):
    text, col = tok
    try:
        return kind(text)
    except ValueError:
        raise ParseError(f"expected {kind.__name__}, got {text!r}", line, col) from None


def parse_off(text: str) -> tuple[np.ndarray, list[list[int]]]:
    """Parse OFF text into ``(vertices (V, 3), faces)``; trailing per-line data is ignored."""
    lines = _content_lines(text)
    last = 0

    def take(what):
        nonlocal last
        try:
            no, toks = next(lines)
        except StopIteration:
            raise ParseError(f"unexpected end of file, expected {what}", last + 1) from None
        last = no
        return no, toks

    no, toks = take("OFF header")
    if toks[0][0] != "OFF":
        raise ParseError(f"expected header 'OFF', got {toks[0][0]!r}", no, toks[0][1])
    counts = toks[1:]
    if not counts:
        no, counts = take("vertex/face counts")
    if len(counts) < 2:
        raise ParseError("counts line needs vertex and face counts", no)
    nv = _number(counts[0], no, int)
    nf = _number(counts[1], no, int)
    if nv < 0 or nf < 0:
        raise ParseError("negative element count", no)
    V = np.empty((nv, 3))
    for i in range(nv):
        no, toks = take(f"vertex {i} of {nv}")
        if len(toks) < 3:
            raise ParseError(f"vertex line needs 3 coordinates, got {len(toks)}", no)
        V[i] = [_number(t, no, float) for t in toks[:3]]
        if not np.all(np.isfinite(V[i])):
            raise ParseError("non-finite vertex coordinate", no)
    faces = []
    for j in range(nf):
        no, toks = take(f"face {j} of {nf}")
        k = _number(toks[0], no, int)
        if k < 3:
            raise ParseError(f"face needs at least 3 vertices, got {k}", no, toks[0][1])
        if len(toks) < k + 1:
            raise ParseError(f"face lists {len(toks) - 1} of {k} indices", no)
        idx = [_number(t, no, int) for t in toks[1:k + 1]]
        for t, v in zip(toks[1:k + 1], idx):
            if not 0 <= v < nv:
                raise ParseError(f"vertex index {v} out of range", no, t[1])
        faces.append(idx)
    return V, faces


def load_off(source, tol: TolerancePolicy = DEFAULT_TOL) -> ConvexPolyhedron:
    """Read an OFF file (path or text stream), orient faces outward, validate convexity.

    Raises :class:`ParseError` for malformed input and :class:`NotConvex`
    when some vertex lies outside some face plane.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(os.fspath(source), encoding="ascii") as fh:
            text = fh.read()
    V, faces = parse_off(text)
    used = np.zeros(len(V), dtype=bool)
    for f in faces:
        used[f] = True
    if not used.all():
        raise DegenerateGeometry(f"{int((~used).sum())} vertices belong to no face")
    poly = ConvexPolyhedron.from_faces(V, faces, tol=tol)
    report = validate(poly, tol)
    if report.convexity_violations:
        raise NotConvex(report.convexity_violations)
    if not report.ok:
        raise DegenerateGeometry(
            f"mesh is not a closed manifold (V-E+F = {report.euler}, "
            f"{len(report.nonmanifold_edges)} non-manifold edges)")
    return poly


def dump_off(vertices, faces, comment: str | None = None) -> str:
    """OFF text with coordinates at 17 significant digits."""
    V = np.asarray(vertices, dtype=float)
    out = io.StringIO()
    out.write("OFF\n")
    if comment:
        for line in comment.splitlines():
            out.write(f"# {line}\n")
    out.write(f"{len(V)} {len(faces)} 0\n")
    for x, y, z in V:
        out.write(f"{x:.17g} {y:.17g} {z:.17g}\n")
    for f in faces:
        out.write(f"{len(f)} " + " ".join(str(int(i)) for i in f) + "\n")
    return out.getvalue()


def write_off(path, poly_or_vertices, faces=None, comment: str | None = None) -> None:
    """Write a polyhedron, or explicit ``(vertices, faces)``, as OFF."""
    if faces is None:
        poly = poly_or_vertices
        vertices, faces = poly.vertices, poly.faces
    else:
        vertices = poly_or_vertices
    with open(os.fspath(path), "w", encoding="ascii") as fh:
        fh.write(dump_off(vertices, faces, comment))
