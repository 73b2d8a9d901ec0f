"""Strictly hyperideal convex polyhedra and their dual circle polyhedra.

A Euclidean convex polyhedron sitting around the unit ball (the projective
ball model of hyperbolic 3-space) is strictly hyperideal when every vertex
lies strictly outside the closed ball while every face plane cuts the open
ball. Each face plane then cuts the sphere in a support circle and each
vertex has a tangency circle; the support circles assigned to the dual
combinatorics form a circle polyhedron.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from .circles import OrientedCircle, SphericalCap, convert
from .cpoly import (
    AbstractSphericalPolyhedron,
    CPolyhedron,
    validate_cpolyhedron,
)

PHI = (1 + math.sqrt(5)) / 2


class NotConvex(ValueError):
    """The polyhedron is not convex with outward-oriented faces."""


class PlaneMissesBall(ValueError):
    """A face plane does not cut the open unit ball."""


class VertexInsideBall(ValueError):
    """A vertex inside the closed unit ball has no tangency circle."""


class ParamsOutOfRange(ValueError):
    """Fixture parameters leave the strictly hyperideal window."""


class RejectionBudgetExceeded(RuntimeError):
    """Rejection sampling failed to produce an acceptable hull."""


@dataclass(frozen=True, eq=False)
class ConvexPolyhedron3:
    """Convex polyhedron in Euclidean 3-space.

    Faces are index cycles, counterclockwise as seen from outside.
    """

    vertices: tuple
    faces: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices",
                           tuple(tuple(float(x) for x in v) for v in self.vertices))
        object.__setattr__(self, "faces", tuple(tuple(f) for f in self.faces))

    def vertex_array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    def abstract(self) -> AbstractSphericalPolyhedron:
        return AbstractSphericalPolyhedron(
            vertices=tuple(range(len(self.vertices))), faces=self.faces)

    def face_plane(self, fi: int) -> tuple:
        """Unit outward normal and signed offset d, plane {x . n = d}."""
        pts = self.vertex_array()[list(self.faces[fi])]
        n = np.zeros(3)
        for i in range(len(pts)):
            a, b = pts[i], pts[(i + 1) % len(pts)]
            n += np.cross(a, b)
        norm = np.linalg.norm(n)
        if norm < 1e-14:
            raise ValueError(f"face {fi} has a degenerate normal")
        n /= norm
        return n, float(pts.mean(axis=0) @ n)

    def edges(self) -> tuple:
        return self.abstract().edges()


def validate_polyhedron3(p: ConvexPolyhedron3, tol: float = 1e-9) -> list:
    """Combinatorial and geometric diagnostics for a convex polyhedron."""
    diags = []
    from .cpoly import validate_abstract
    for d in validate_abstract(p.abstract()):
        diags.append(d)

    verts = p.vertex_array()
    flat_bad, convex_bad = [], []
    for fi in range(len(p.faces)):
        n, d = p.face_plane(fi)
        offsets = verts[list(p.faces[fi])] @ n - d
        if np.max(np.abs(offsets)) > 1e-7:
            flat_bad.append({"face": fi, "residual": float(np.max(np.abs(offsets)))})
        side = verts @ n - d
        if np.max(side) > 1e-7:
            convex_bad.append({"face": fi, "beyond": float(np.max(side))})
    diags.append({"check": "face_planarity", "status": "pass" if not flat_bad else "fail",
                  "witness": flat_bad or None})
    diags.append({"check": "convex", "status": "pass" if not convex_bad else "fail",
                  "witness": convex_bad or None})
    return diags


def _require_convex(p: ConvexPolyhedron3) -> None:
    diags = validate_polyhedron3(p)
    bad = [d["check"] for d in diags if d["status"] == "fail"]
    if bad:
        raise NotConvex(f"polyhedron fails checks: {bad}")


def _segment_ball_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Distance from the origin to the closed segment ab."""
    d = b - a
    denom = d @ d
    t = 0.0 if denom == 0 else float(np.clip(-(a @ d) / denom, 0.0, 1.0))
    return float(np.linalg.norm(a + t * d))


@dataclass(frozen=True)
class HyperidealClass:
    strict: bool
    regime: str                  # "BB1" | "BB2" | "mixed" | "not_strict"
    min_vertex_norm: float
    max_plane_distance: float
    min_edge_distance: float
    max_edge_distance: float
    witness: dict | None = None


def classify_strictly_hyperideal(p: ConvexPolyhedron3,
                                 tol: float = 1e-9) -> HyperidealClass:
    """Strictness margins plus the edge regime.

    BB1: every edge misses the closed unit ball, so all dual links are
    compact black polygons. BB2: every edge meets the open ball, so all
    links are right-angled with alternating green edges.
    """
    _require_convex(p)
    verts = p.vertex_array()
    vnorm = float(np.min(np.linalg.norm(verts, axis=1)))
    pdist = max(abs(p.face_plane(fi)[1]) for fi in range(len(p.faces)))
    edist = [_segment_ball_distance(verts[u], verts[v]) for u, v in p.edges()]
    lo, hi = float(min(edist)), float(max(edist))
    strict = vnorm > 1 + tol and pdist < 1 - tol
    if not strict:
        regime = "not_strict"
    elif lo > 1 + tol:
        regime = "BB1"
    elif hi < 1 - tol:
        regime = "BB2"
    else:
        regime = "mixed"
    return HyperidealClass(strict=strict, regime=regime, min_vertex_norm=vnorm,
                           max_plane_distance=pdist, min_edge_distance=lo,
                           max_edge_distance=hi)


def support_circle(n, d: float, tol: float = 1e-9) -> OrientedCircle:
    """Oriented circle cut by the plane {x . n = d}, |d| < 1.

    The companion cap sits on the far side of the plane from the origin, so
    it avoids the polyhedron's interior when the plane supports a face.
    """
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    if abs(d) >= 1 - tol:
        raise PlaneMissesBall(f"plane offset {d} does not cut the open ball")
    return convert(SphericalCap(center=n, radius=math.acos(d)), OrientedCircle)


def tangency_circle(v, tol: float = 1e-9) -> OrientedCircle:
    """Circle of tangency of the cone from an outside point v to the sphere."""
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm <= 1 + tol:
        raise VertexInsideBall(f"|v| = {norm} is not strictly outside the sphere")
    return convert(SphericalCap(center=v / norm, radius=math.acos(1 / norm)),
                   OrientedCircle)


def dual_abstract(p: ConvexPolyhedron3) -> AbstractSphericalPolyhedron:
    """Dual combinatorics: a vertex per face, a face per vertex.

    Each dual face lists the faces around the primal vertex in rotation
    order.
    """
    ap = p.abstract()
    return AbstractSphericalPolyhedron(
        vertices=tuple(range(len(p.faces))),
        faces=tuple(ap.rotation(v)[0] for v in range(len(p.vertices))))


def dual_cpolyhedron(p: ConvexPolyhedron3, tol: float = 1e-9) -> CPolyhedron:
    """Support circles on the dual combinatorics, fully validated.

    The result is convex, non-unitary, consistently oriented, and carries
    its properness flag.
    """
    _require_convex(p)
    circles = {}
    for fi in range(len(p.faces)):
        n, d = p.face_plane(fi)
        circles[fi] = support_circle(n, d, tol)
    cp, diags = validate_cpolyhedron(dual_abstract(p), circles, tol)
    if cp is None:
        bad = [(d["check"], d["witness"]) for d in diags if d["status"] == "fail"]
        raise ValueError(f"dual circle polyhedron failed validation: {bad}")
    return cp


# --------------------------------------------------------------------------
# Fixtures.

_CUBE_FACES = ((0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1),
               (1, 5, 7, 3), (3, 7, 6, 2), (2, 6, 4, 0))


def _cube(a: float) -> ConvexPolyhedron3:
    # vertex i has coordinates read off bits (x, y, z)
    verts = []
    for i in range(8):
        verts.append((a if i & 4 else -a, a if i & 2 else -a, a if i & 1 else -a))
    return ConvexPolyhedron3(vertices=tuple(verts), faces=_CUBE_FACES)


def _octahedron(s: float) -> ConvexPolyhedron3:
    verts = ((s, 0, 0), (-s, 0, 0), (0, s, 0), (0, -s, 0), (0, 0, s), (0, 0, -s))
    faces = ((0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4),
             (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5))
    return ConvexPolyhedron3(vertices=verts, faces=faces)


def _merge_hull_faces(points: np.ndarray) -> ConvexPolyhedron3:
    """Convex hull with coplanar qhull facets merged into polygonal faces."""
    hull = ConvexHull(points)
    used = sorted(set(hull.vertices))
    remap = {old: new for new, old in enumerate(used)}
    pts = points[used]

    groups: dict = {}
    for simplex, eq in zip(hull.simplices, hull.equations):
        key = tuple(np.round(eq, 7))
        groups.setdefault(key, set()).update(simplex.tolist())

    faces = []
    for eq, idxs in groups.items():
        n = np.array(eq[:3])
        members = np.array(sorted(idxs))
        coords = points[members]
        centroid = coords.mean(axis=0)
        e1 = coords[0] - centroid
        e1 = e1 - (e1 @ n) * n
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(n, e1)
        ang = np.arctan2((coords - centroid) @ e2, (coords - centroid) @ e1)
        order = members[np.argsort(ang)]
        faces.append(tuple(remap[int(i)] for i in order))
    return ConvexPolyhedron3(vertices=tuple(map(tuple, pts)), faces=tuple(faces))


def _dodecahedron(scale: float) -> ConvexPolyhedron3:
    verts = []
    for sx in (1, -1):
        for sy in (1, -1):
            for sz in (1, -1):
                verts.append((sx, sy, sz))
    for s1 in (1, -1):
        for s2 in (1, -1):
            verts.append((0, s1 / PHI, s2 * PHI))
            verts.append((s1 / PHI, s2 * PHI, 0))
            verts.append((s1 * PHI, 0, s2 / PHI))
    return _merge_hull_faces(np.array(verts, dtype=float) * scale)


def _icosahedron(scale: float) -> ConvexPolyhedron3:
    verts = []
    for s1 in (1, -1):
        for s2 in (1, -1):
            verts.append((0, s1, s2 * PHI))
            verts.append((s1, s2 * PHI, 0))
            verts.append((s1 * PHI, 0, s2))
    return _merge_hull_faces(np.array(verts, dtype=float) * scale)


def _window(value: float, lo: float, hi: float, name: str,
            margin: float = 1e-3) -> None:
    if not (lo + margin <= value <= hi - margin):
        raise ParamsOutOfRange(
            f"{name} = {value} outside [{lo + margin}, {hi - margin}]")


def _scale_window(p: ConvexPolyhedron3) -> tuple:
    """Scales keeping vertices outside and face planes cutting the ball."""
    circum = float(np.min(np.linalg.norm(p.vertex_array(), axis=1)))
    inradius = max(abs(p.face_plane(fi)[1]) for fi in range(len(p.faces)))
    return 1 / circum, 1 / inradius


def _fibonacci_directions(n: int) -> np.ndarray:
    k = np.arange(n)
    z = 1 - (2 * k + 1) / n
    r = np.sqrt(1 - z * z)
    ga = math.pi * (3 - math.sqrt(5))
    return np.stack([r * np.cos(ga * k), r * np.sin(ga * k), z], axis=1)


# offset windows and jitter per face count; tighter shells need more faces
_HULL_BANDS = ((8, 0.73, 0.81, 0.10), (11, 0.78, 0.86, 0.08),
               (13, 0.81, 0.88, 0.07), (16, 0.88, 0.93, 0.045))


def _random_hull(seed, n_faces: int, budget: int = 200) -> ConvexPolyhedron3:
    """Intersection of sampled half-spaces, via polar duality.

    Face planes get well-spread jittered normals and offsets drawn from a
    band where strictness is achievable; each dual-hull facet polarizes to
    a vertex, which must land strictly outside the unit ball.
    """
    for cap, d_lo, d_hi, sigma in _HULL_BANDS:
        if n_faces <= cap:
            break
    else:
        raise ParamsOutOfRange(f"n_faces = {n_faces} exceeds {_HULL_BANDS[-1][0]}")
    rng = np.random.RandomState(seed)
    base = _fibonacci_directions(n_faces)
    for _ in range(budget):
        q = np.linalg.qr(rng.standard_normal((3, 3)))[0]
        if np.linalg.det(q) < 0:
            q[:, 0] *= -1
        dirs = base @ q.T + sigma * rng.standard_normal((n_faces, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        offs = rng.uniform(d_lo, d_hi, size=n_faces)
        try:
            dual = ConvexHull(dirs / offs[:, None])
        except Exception:
            continue
        if len(dual.vertices) < n_faces:
            continue
        verts = []
        for eq in dual.equations:
            m, c = eq[:3], -eq[3]
            if c <= 1e-9:
                verts = None
                break
            verts.append(m / c)
        if verts is None:
            continue
        verts = np.array(verts)
        if np.linalg.norm(verts, axis=1).min() <= 1 + 1e-3:
            continue
        try:
            p = _merge_hull_faces(verts)
            cls = classify_strictly_hyperideal(p, tol=1e-9)
        except Exception:
            continue
        if not (cls.strict and cls.max_plane_distance < 1 - 1e-3):
            continue
        vs = p.vertex_array()
        if any(abs(_segment_ball_distance(vs[u], vs[v]) - 1) <= 1e-3
               for u, v in p.edges()):
            continue
        # strictness alone does not make the dual proper; keep only hulls
        # whose dual circle polyhedron passes the full battery
        try:
            if not dual_cpolyhedron(p).proper:
                continue
        except (ValueError, PlaneMissesBall):
            continue
        return p
    raise RejectionBudgetExceeded(f"no acceptable hull in {budget} draws")


def generate_fixture(kind: str, seed=None, **params) -> ConvexPolyhedron3:
    """Named strictly hyperideal fixtures.

    cube(a): half-width a in (1/sqrt3, 1); BB1 above 1/sqrt2, BB2 below.
    octahedron(s): vertex distance s in (1, sqrt3).
    dodecahedron(scale), icosahedron(scale): scaled canonical vertices.
    random_hull(n_faces): rejection-sampled half-space intersection, seeded.
    """
    if kind == "cube":
        a = float(params.get("a", 0.8))
        _window(a, 1 / math.sqrt(3), 1.0, "a")
        return _cube(a)
    if kind == "octahedron":
        s = float(params.get("s", 1.3))
        _window(s, 1.0, math.sqrt(3), "s")
        return _octahedron(s)
    if kind == "dodecahedron":
        scale = float(params.get("scale", 0.7))
        _window(scale, *_scale_window(_dodecahedron(1.0)), "scale")
        return _dodecahedron(scale)
    if kind == "icosahedron":
        scale = float(params.get("scale", 0.6))
        _window(scale, *_scale_window(_icosahedron(1.0)), "scale")
        return _icosahedron(scale)
    if kind == "random_hull":
        n_faces = int(params.get("n_faces", 12))
        if n_faces < 6:
            raise ParamsOutOfRange("random_hull needs n_faces >= 6")
        return _random_hull(seed, n_faces)
    raise ParamsOutOfRange(f"unknown fixture kind {kind!r}")
