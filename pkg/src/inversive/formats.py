"""Strict JSON interchange formats.

Two document kinds are supported:

* a c-polyhedron file carrying an abstract polyhedron plus one oriented
  circle per vertex, and
* a Euclidean polyhedron file carrying raw coordinates and face cycles.

Both are versioned, and both are parsed strictly: an unknown field anywhere
in the document is an error, not a warning.  Dumps are deterministic (sorted
keys, repr-exact floats) so that emitting and re-ingesting a file reproduces
the same geometry bit for bit.
"""

from __future__ import annotations

import json
from typing import Mapping, Tuple

import numpy as np

from .circles import OrientedCircle
from .cpoly import AbstractSphericalPolyhedron
from .hyperideal import ConvexPolyhedron3

FORMAT_VERSION = 1


class ParseError(ValueError):
    """The document is not syntactically valid JSON."""


class ValidationFailed(ValueError):
    """The document is valid JSON but does not match the schema."""


def _loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _require_keys(obj, required, where, optional=()):
    if not isinstance(obj, dict):
        raise ValidationFailed(f"{where} must be a JSON object")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ValidationFailed(f"{where} is missing field(s): {', '.join(missing)}")
    extra = [k for k in obj if k not in required and k not in optional]
    if extra:
        raise ValidationFailed(f"{where} has unknown field(s): {', '.join(sorted(extra))}")


def _require_version(obj, where):
    v = obj["format_version"]
    if v != FORMAT_VERSION:
        raise ValidationFailed(
            f"{where}: format_version must be {FORMAT_VERSION}, got {v!r}")


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _is_vertex_id(x) -> bool:
    return isinstance(x, (str, int)) and not isinstance(x, bool)


def circle_from_literal(obj, where: str = "circle") -> OrientedCircle:
    _require_keys(obj, ("lorentz",), where)
    vec = obj["lorentz"]
    if not (isinstance(vec, list) and len(vec) == 4 and all(_is_number(x) for x in vec)):
        raise ValidationFailed(f"{where}: lorentz must be a list of 4 numbers")
    try:
        return OrientedCircle(np.asarray(vec, dtype=float))
    except ValueError as exc:
        raise ValidationFailed(f"{where}: {exc}") from None


def circle_to_literal(circle: OrientedCircle) -> dict:
    return {"lorentz": [float(x) for x in circle.lorentz]}


def load_cpolyhedron(text: str) -> Tuple[AbstractSphericalPolyhedron, dict]:
    """Parse a c-polyhedron document into (abstract polyhedron, circles).

    Circles are returned keyed by the vertex ids used in the polyhedron.
    Only the schema is checked here; geometric validation is a separate step.
    """
    doc = _loads(text)
    _require_keys(doc, ("format_version", "polyhedron", "circles"), "document")
    _require_version(doc, "document")

    poly = doc["polyhedron"]
    _require_keys(poly, ("vertices", "faces"), "polyhedron")
    verts = poly["vertices"]
    if not (isinstance(verts, list) and verts):
        raise ValidationFailed("polyhedron.vertices must be a non-empty list")
    for v in verts:
        if not _is_vertex_id(v):
            raise ValidationFailed(f"vertex id {v!r} must be a string or an integer")
    by_str = {str(v): v for v in verts}
    if len(by_str) != len(verts):
        raise ValidationFailed("vertex ids must be unique as strings")

    faces = poly["faces"]
    if not (isinstance(faces, list) and faces):
        raise ValidationFailed("polyhedron.faces must be a non-empty list")
    vset = set(verts)
    for i, f in enumerate(faces):
        if not (isinstance(f, list) and len(f) >= 3):
            raise ValidationFailed(f"face {i} must be a list of at least 3 vertex ids")
        for v in f:
            if not _is_vertex_id(v) or v not in vset:
                raise ValidationFailed(f"face {i} references unknown vertex {v!r}")
        if len(set(f)) != len(f):
            raise ValidationFailed(f"face {i} repeats a vertex")

    raw = doc["circles"]
    if not isinstance(raw, dict):
        raise ValidationFailed("circles must be an object keyed by vertex id")
    want = set(by_str)
    got = set(raw)
    if got != want:
        missing = sorted(want - got)
        extra = sorted(got - want)
        parts = []
        if missing:
            parts.append(f"missing circle(s) for: {', '.join(missing)}")
        if extra:
            parts.append(f"circle(s) for unknown vertex id(s): {', '.join(extra)}")
        raise ValidationFailed("; ".join(parts))
    circles = {
        by_str[k]: circle_from_literal(raw[k], where=f"circles[{k!r}]") for k in raw
    }

    base = AbstractSphericalPolyhedron(
        vertices=tuple(verts), faces=tuple(tuple(f) for f in faces))
    return base, circles


def dump_cpolyhedron(base: AbstractSphericalPolyhedron, circles: Mapping) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "polyhedron": {
            "vertices": list(base.vertices),
            "faces": [list(f) for f in base.faces],
        },
        "circles": {str(v): circle_to_literal(circles[v]) for v in base.vertices},
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def load_polyhedron3(text: str) -> ConvexPolyhedron3:
    """Parse a Euclidean polyhedron document.

    Vertices are coordinate triples; faces index into the vertex list.
    """
    doc = _loads(text)
    _require_keys(doc, ("format_version", "vertices", "faces"), "document")
    _require_version(doc, "document")

    verts = doc["vertices"]
    if not (isinstance(verts, list) and len(verts) >= 4):
        raise ValidationFailed("vertices must be a list of at least 4 points")
    for i, v in enumerate(verts):
        if not (isinstance(v, list) and len(v) == 3 and all(_is_number(x) for x in v)):
            raise ValidationFailed(f"vertex {i} must be a list of 3 numbers")

    faces = doc["faces"]
    if not (isinstance(faces, list) and len(faces) >= 4):
        raise ValidationFailed("faces must be a list of at least 4 index cycles")
    n = len(verts)
    for i, f in enumerate(faces):
        ok = (isinstance(f, list) and len(f) >= 3
              and all(isinstance(j, int) and not isinstance(j, bool) for j in f)
              and all(0 <= j < n for j in f))
        if not ok:
            raise ValidationFailed(
                f"face {i} must be a list of at least 3 indices into vertices")
        if len(set(f)) != len(f):
            raise ValidationFailed(f"face {i} repeats a vertex")

    return ConvexPolyhedron3(
        vertices=tuple(tuple(float(x) for x in v) for v in verts),
        faces=tuple(tuple(f) for f in faces))


def dump_polyhedron3(p: ConvexPolyhedron3) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "vertices": [[float(x) for x in v] for v in p.vertices],
        "faces": [list(f) for f in p.faces],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
