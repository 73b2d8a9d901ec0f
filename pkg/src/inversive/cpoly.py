"""Circle polyhedra over abstract spherical polyhedra.

A circle polyhedron assigns an oriented circle to each vertex of an abstract
spherical polyhedron so that adjacent circles are uncoupled and each face's
circles admit a common orthogonal circle (the face ortho-circle). This module
builds and validates such assignments, orients the ortho-circles by the
convexity search, checks that face traversal order is consistent on every
face, measures complex dihedral angles, and cuts the link polygon of each
vertex out of its companion disk.

Faces are referred to by index into the polyhedron's face list. Vertices are
arbitrary hashable identifiers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .circles import (
    OrientedCircle,
    MoebiusMap,
    circle_intersection_points,
    classify_pair,
    eta,
    inv_dist,
    moebius_apply_circle,
    pencil_limit_points,
)
from .hyperbolic import (
    ComplexAngle,
    DiskModel,
    GBEdge,
    GreenBlackPolygon,
    HyperidealPolygonSpec,
    IncompatibleChains,
    NotBlackEdgeCongruent,
    OrientedLine,
    acos_theta,
    crossing_point,
    four_vertex_labels,
    greenblack_from_hyperideal,
    is_proper_hyperideal,
)

TOL = 1e-9


class InvalidPolyhedron(ValueError):
    """The abstract polyhedron fails its combinatorial invariants."""


class EdgeCoupled(ValueError):
    """Adjacent circles where one lies inside the other's companion disk."""


class Unitary(ValueError):
    """Adjacent circles tangent within tolerance."""


class FaceCoaxial(ValueError):
    """All circles of a face lie in a single pencil."""


class FaceNotCPlanar(ValueError):
    """A face's circles admit no real common orthogonal circle."""


class ThreeConsecutiveCoaxial(ValueError):
    """Three consecutive circles on a face lie in a single pencil."""


class NotAdjacent(ValueError):
    """The two faces share no edge."""


class TangentPair(ValueError):
    """Link points are undefined for tangent circle pairs."""


class FocusNotInDisk(ValueError):
    """No unique link point landed inside the open disk."""


class NotProperAt(ValueError):
    """A vertex whose support lines do not bound a proper hyperideal polygon."""


class StillInconsistent(ValueError):
    """Orientation normalization failed to reach the forward case."""


class ValidationMissing(ValueError):
    """An operation was invoked before its required validation flags were set."""


def canonical_edge(u, v):
    """Order-independent edge key."""
    return (u, v) if str(u) <= str(v) else (v, u)


# --------------------------------------------------------------------------
# Abstract spherical polyhedra.

@dataclass(frozen=True, eq=False)
class AbstractSphericalPolyhedron:
    """Oriented cellular decomposition of the 2-sphere.

    `faces` lists each face as a cyclic vertex sequence; the sequences carry
    the orientation. Edges are derived.
    """

    vertices: tuple
    faces: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "faces", tuple(tuple(f) for f in self.faces))
        object.__setattr__(self, "_cache", {})

    def directed_edges(self) -> dict:
        """Map from directed edge (a, b) to the index of the face traversing it."""
        if "directed" not in self._cache:
            out: dict = {}
            for fi, f in enumerate(self.faces):
                n = len(f)
                for i in range(n):
                    out[(f[i], f[(i + 1) % n])] = fi
            self._cache["directed"] = out
        return self._cache["directed"]

    def edges(self) -> tuple:
        if "edges" not in self._cache:
            seen = []
            found = set()
            for f in self.faces:
                n = len(f)
                for i in range(n):
                    e = canonical_edge(f[i], f[(i + 1) % n])
                    if e not in found:
                        found.add(e)
                        seen.append(e)
            self._cache["edges"] = tuple(seen)
        return self._cache["edges"]

    def faces_of_edge(self, u, v) -> tuple:
        d = self.directed_edges()
        if (u, v) not in d or (v, u) not in d:
            raise KeyError(f"no such edge: {u!r}-{v!r}")
        return d[(u, v)], d[(v, u)]

    def vertex_faces(self, v) -> tuple:
        return tuple(fi for fi, f in enumerate(self.faces) if v in f)

    def degree(self, v) -> int:
        return sum(1 for e in self.edges() if v in e)

    def rotation(self, v) -> tuple:
        """Faces and neighbor vertices in cyclic order around v.

        Returns (face_indices, neighbors) where neighbors[i] spans the edge
        shared by face_indices[i] and face_indices[i + 1]. Starts at the
        lowest-index incident face; raises InvalidPolyhedron when the walk
        does not close into a single cycle.
        """
        if ("rotation", v) in self._cache:
            return self._cache[("rotation", v)]
        directed = self.directed_edges()
        incident = self.vertex_faces(v)
        if not incident:
            raise InvalidPolyhedron(f"vertex {v!r} lies on no face")
        start = min(incident)
        cycle = [start]
        neighbors = []
        fi = start
        while True:
            f = self.faces[fi]
            s = f[(f.index(v) + 1) % len(f)]
            neighbors.append(s)
            try:
                nxt = directed[(s, v)]
            except KeyError:
                raise InvalidPolyhedron(
                    f"edge {s!r}-{v!r} has no second face") from None
            if nxt == start:
                break
            if nxt in cycle or len(cycle) > len(incident):
                raise InvalidPolyhedron(
                    f"faces around {v!r} do not form a single cycle")
            cycle.append(nxt)
            fi = nxt
        if len(cycle) != len(incident):
            raise InvalidPolyhedron(
                f"faces around {v!r} do not form a single cycle")
        out = (tuple(cycle), tuple(neighbors))
        self._cache[("rotation", v)] = out
        return out


def validate_abstract(p: AbstractSphericalPolyhedron) -> list:
    """Full combinatorial diagnostics, one entry per check."""
    report = []

    def emit(check, ok, witness=None):
        report.append({"check": check, "status": "pass" if ok else "fail",
                       "witness": witness})

    bad_size = [fi for fi, f in enumerate(p.faces)
                if len(f) < 3 or len(set(f)) != len(f)]
    emit("face_size", not bad_size,
         None if not bad_size else {"faces": bad_size})

    unknown = sorted({u for f in p.faces for u in f if u not in set(p.vertices)},
                     key=str)
    unused = sorted([u for u in p.vertices if not any(u in f for f in p.faces)],
                    key=str)
    emit("vertex_cover", not unknown and not unused,
         None if not (unknown or unused) else {"undeclared": unknown, "unused": unused})

    # every directed edge exactly once, and its reverse present
    counts: dict = {}
    for f in p.faces:
        n = len(f)
        for i in range(n):
            de = (f[i], f[(i + 1) % n])
            counts[de] = counts.get(de, 0) + 1
    dup = sorted([de for de, c in counts.items() if c > 1], key=str)
    unmatched = sorted([de for de in counts if (de[1], de[0]) not in counts], key=str)
    emit("edge_orientation", not dup and not unmatched,
         None if not (dup or unmatched) else {"repeated": dup, "unmatched": unmatched})

    v_count, e_count, f_count = len(p.vertices), len(p.edges()), len(p.faces)
    emit("euler", v_count - e_count + f_count == 2,
         {"V": v_count, "E": e_count, "F": f_count}
         if v_count - e_count + f_count != 2 else None)

    low = sorted([v for v in p.vertices if p.degree(v) < 3], key=str)
    emit("vertex_degree", not low, None if not low else {"vertices": low})

    # two faces meet in at most one full edge; otherwise at most one vertex
    meets_bad = []
    for i in range(f_count):
        si = set(p.faces[i])
        ei = {canonical_edge(p.faces[i][k], p.faces[i][(k + 1) % len(p.faces[i])])
              for k in range(len(p.faces[i]))}
        for j in range(i + 1, f_count):
            sj = set(p.faces[j])
            ej = {canonical_edge(p.faces[j][k], p.faces[j][(k + 1) % len(p.faces[j])])
                  for k in range(len(p.faces[j]))}
            shared_e = ei & ej
            shared_v = si & sj
            if len(shared_e) > 1:
                meets_bad.append({"faces": (i, j), "shared_edges": len(shared_e)})
            elif len(shared_e) == 1:
                if shared_v != set(next(iter(shared_e))):
                    meets_bad.append({"faces": (i, j), "extra_vertices": True})
            elif len(shared_v) > 1:
                meets_bad.append({"faces": (i, j), "shared_vertices": len(shared_v)})
    emit("face_meets", not meets_bad, meets_bad or None)

    # face adjacency graph connected
    if f_count:
        directed = p.directed_edges()
        adj: dict = {fi: set() for fi in range(f_count)}
        for (a, b), fi in directed.items():
            if (b, a) in directed:
                adj[fi].add(directed[(b, a)])
        seen = {0}
        stack = [0]
        while stack:
            for g in adj[stack.pop()]:
                if g not in seen:
                    seen.add(g)
                    stack.append(g)
        emit("connected", len(seen) == f_count,
             None if len(seen) == f_count else {"reached": len(seen), "faces": f_count})
    else:
        emit("connected", False, {"faces": 0})

    # faces around each vertex form a single cycle
    rot_bad = []
    for v in p.vertices:
        try:
            p.rotation(v)
        except InvalidPolyhedron as exc:
            rot_bad.append({"vertex": v, "detail": str(exc)})
    emit("vertex_rotation", not rot_bad, rot_bad or None)

    return report


def abstract_is_valid(p: AbstractSphericalPolyhedron) -> bool:
    return all(item["status"] == "pass" for item in validate_abstract(p))


# --------------------------------------------------------------------------
# Frameworks and edge labels.

@dataclass(frozen=True, eq=False)
class EdgeLabelFunction:
    """Real label per edge, keyed by canonical edge."""

    values: dict

    def __call__(self, u, v) -> float:
        return self.values[canonical_edge(u, v)]

    @classmethod
    def from_framework(cls, fw: "CFramework") -> "EdgeLabelFunction":
        vals = {e: inv_dist(fw.circles[e[0]], fw.circles[e[1]])
                for e in fw.base.edges()}
        return cls(values=vals)


@dataclass(frozen=True, eq=False)
class CFramework:
    """Total assignment of oriented circles to the vertices of a base complex."""

    base: AbstractSphericalPolyhedron
    circles: dict

    def __post_init__(self) -> None:
        missing = [v for v in self.base.vertices if v not in self.circles]
        if missing:
            raise ValueError(f"circles missing for vertices {missing!r}")


@dataclass(frozen=True)
class RealizationReport:
    ok: bool
    mismatches: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def realization_check(fw: CFramework, beta: EdgeLabelFunction,
                      tol: float = TOL) -> RealizationReport:
    """Whether every edge's inversive distance matches its label within tol."""
    bad = []
    for u, v in fw.base.edges():
        got = inv_dist(fw.circles[u], fw.circles[v])
        want = beta(u, v)
        if abs(got - want) > tol:
            bad.append((canonical_edge(u, v), got, want))
    return RealizationReport(ok=not bad, mismatches=tuple(bad))


# --------------------------------------------------------------------------
# Building circle polyhedra.

@dataclass(frozen=True, eq=False)
class CPolyhedron:
    """Immutable circle polyhedron; flags record completed validations."""

    polyhedron: AbstractSphericalPolyhedron
    circles: dict
    face_ortho: dict
    convex: bool = False
    non_unitary: bool = False
    consistently_oriented: bool = False
    proper: bool | None = None

    @property
    def framework(self) -> CFramework:
        return CFramework(base=self.polyhedron, circles=self.circles)


def _eta_row(c: OrientedCircle) -> np.ndarray:
    r = np.array(c.lorentz, dtype=float)
    r[3] = -r[3]
    return r


def _pencil_rank(circles, rel_tol: float = 1e-9) -> int:
    m = np.array([_eta_row(c) for c in circles])
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > rel_tol * s[0]))


def _face_ortho_solve(face_circles, fi: int, tol: float) -> OrientedCircle:
    m = np.array([_eta_row(c) for c in face_circles])
    u, s, vt = np.linalg.svd(m)
    if s[2] <= 1e-9 * s[0]:
        raise FaceCoaxial(f"face {fi}: circles lie in one pencil")
    x = vt[3]
    q = eta(x, x)
    if q <= tol:
        raise FaceNotCPlanar(f"face {fi}: no real common orthogonal circle")
    x = x / math.sqrt(q)
    residual = float(np.max(np.abs(m @ x)))
    if residual > tol * len(face_circles):
        raise FaceNotCPlanar(
            f"face {fi}: orthogonality residual {residual:.3e} exceeds gate")
    return OrientedCircle(lorentz=tuple(x))


def build_cpolyhedron(p: AbstractSphericalPolyhedron, circles: dict,
                      tol: float = TOL) -> CPolyhedron:
    """Check edges and faces and compute each face's ortho-circle.

    Ortho-circle orientations are whatever the solver produced; run
    check_convexity to choose them.
    """
    if not abstract_is_valid(p):
        failing = [d["check"] for d in validate_abstract(p) if d["status"] == "fail"]
        raise InvalidPolyhedron(f"combinatorial checks failed: {failing}")
    missing = [v for v in p.vertices if v not in circles]
    if missing:
        raise ValueError(f"circles missing for vertices {missing!r}")

    for u, v in p.edges():
        cls = classify_pair(circles[u], circles[v], tol=tol)
        if not cls.non_unitary:
            raise Unitary(f"edge {u!r}-{v!r}: tangent circles, <C,C> = {cls.invdist:.6f}")
        if not cls.uncoupled:
            raise EdgeCoupled(f"edge {u!r}-{v!r}: {cls.tag}, <C,C> = {cls.invdist:.6f}")

    face_ortho = {}
    for fi, f in enumerate(p.faces):
        circs = [circles[u] for u in f]
        if _pencil_rank(circs) <= 2:
            raise FaceCoaxial(f"face {fi}: circles lie in one pencil")
        n = len(f)
        for i in range(n):
            triple = [circles[f[(i - 1) % n]], circles[f[i]], circles[f[(i + 1) % n]]]
            if _pencil_rank(triple) <= 2:
                raise ThreeConsecutiveCoaxial(
                    f"face {fi}: circles at {f[(i-1) % n]!r}, {f[i]!r}, "
                    f"{f[(i+1) % n]!r} lie in one pencil")
        face_ortho[fi] = _face_ortho_solve(circs, fi, tol)

    return CPolyhedron(polyhedron=p, circles=dict(circles),
                       face_ortho=face_ortho, non_unitary=True)


# --------------------------------------------------------------------------
# Convexity and orientation.

@dataclass(frozen=True)
class ConvexityReport:
    convex: bool
    oriented: CPolyhedron | None = None
    witness: dict | None = None


def check_convexity(cp: CPolyhedron, tol: float = TOL) -> ConvexityReport:
    """Try both orientations of every face ortho-circle.

    Convex iff for each face some orientation leaves every circle of the
    framework segregated from it; the successful orientations are recorded
    on the returned polyhedron.
    """
    oriented = {}
    for fi in range(len(cp.polyhedron.faces)):
        chosen = None
        failures = {}
        for name, cand in (("as_built", cp.face_ortho[fi]),
                           ("reversed", cp.face_ortho[fi].reversed())):
            bad = None
            for u in cp.polyhedron.vertices:
                cls = classify_pair(cp.circles[u], cand, tol=tol)
                if not cls.segregated:
                    bad = (u, cls.tag, cls.invdist)
                    break
            if bad is None:
                chosen = cand
                break
            failures[name] = bad
        if chosen is None:
            return ConvexityReport(convex=False,
                                   witness={"face": fi, "failures": failures})
        oriented[fi] = chosen
    return ConvexityReport(
        convex=True,
        oriented=replace(cp, face_ortho=oriented, convex=True))


@dataclass(frozen=True)
class OrientationReport:
    case: str                     # "case_i" | "case_ii" | "inconsistent"
    per_face: dict


def _face_progress(cp: CPolyhedron, fi: int, tol: float) -> str:
    """Traversal direction of a face's circles along its oriented ortho-circle."""
    o = cp.face_ortho[fi]
    model = DiskModel(o)
    thetas = []
    for u in cp.polyhedron.faces[fi]:
        a, b = circle_intersection_points(cp.circles[u], o)
        za, zb = model.chart(a), model.chart(b)
        s = za + zb
        if abs(s) < 1e-9:
            candidates = (1j * za / abs(za), -1j * za / abs(za))
        else:
            candidates = (s / abs(s), -s / abs(s))
        pick = None
        for cand in candidates:
            if cp.circles[u].contains_point(model.unchart(cand)):
                pick = cand
                break
        if pick is None:
            return "ambiguous"
        thetas.append(math.atan2(pick.imag, pick.real))
    n = len(thetas)
    fwd = [(thetas[(i + 1) % n] - thetas[i]) % (2 * math.pi) for i in range(n)]
    if any(g < tol or g > 2 * math.pi - tol for g in fwd):
        return "ambiguous"
    total = sum(fwd)
    if abs(total - 2 * math.pi) < 1e-6:
        return "forward"
    if abs(total - 2 * math.pi * (n - 1)) < 1e-6:
        return "reverse"
    return "ambiguous"


def check_consistent_orientation(cp: CPolyhedron,
                                 tol: float = 1e-9) -> OrientationReport:
    """Whether all faces traverse their circles forward, all reverse, or mixed."""
    if not cp.convex:
        raise ValidationMissing("orientation check needs chosen ortho-circle "
                                "orientations; run check_convexity first")
    per_face = {fi: _face_progress(cp, fi, tol)
                for fi in range(len(cp.polyhedron.faces))}
    kinds = set(per_face.values())
    if kinds == {"forward"}:
        case = "case_i"
    elif kinds == {"reverse"}:
        case = "case_ii"
    else:
        case = "inconsistent"
    return OrientationReport(case=case, per_face=per_face)


def antipodal_reversed(c: OrientedCircle) -> OrientedCircle:
    """Antipodal image with orientation reversed: cap (p, r) to cap (-p, r)."""
    v = c.lorentz
    return OrientedCircle(lorentz=(-v[0], -v[1], -v[2], v[3]))


def antipodal_image(c: OrientedCircle) -> OrientedCircle:
    """Antipodal image alone (orientation carried along)."""
    v = c.lorentz
    return OrientedCircle(lorentz=(v[0], v[1], v[2], -v[3]))


def _map_circles(cp: CPolyhedron, f) -> CPolyhedron:
    return replace(cp,
                   circles={u: f(c) for u, c in cp.circles.items()},
                   face_ortho={fi: f(o) for fi, o in cp.face_ortho.items()})


def normalize_orientation(cp: CPolyhedron) -> CPolyhedron:
    """Force the forward traversal case.

    Forward input comes back unchanged apart from the flag; the reverse case
    is replaced by its antipodal image with every orientation flipped, which
    preserves all inversive distances.
    """
    rep = check_consistent_orientation(cp)
    if rep.case == "case_i":
        return replace(cp, consistently_oriented=True)
    if rep.case == "inconsistent":
        raise StillInconsistent(f"mixed traversal directions: {rep.per_face}")
    flipped = _map_circles(cp, antipodal_reversed)
    rep2 = check_consistent_orientation(flipped)
    if rep2.case != "case_i":
        raise StillInconsistent(
            f"normalization left case {rep2.case}: {rep2.per_face}")
    return replace(flipped, consistently_oriented=True)


def transform_cpolyhedron(cp: CPolyhedron, t: MoebiusMap) -> CPolyhedron:
    """Apply a Moebius map to every circle and ortho-circle; flags survive."""
    return _map_circles(cp, lambda c: moebius_apply_circle(t, c))


# --------------------------------------------------------------------------
# Dihedral angles and links.

def adjacent_face_pairs(p: AbstractSphericalPolyhedron) -> tuple:
    """(edge, face index pair) for every edge."""
    out = []
    for u, v in p.edges():
        out.append(((u, v), p.faces_of_edge(u, v)))
    return tuple(out)


def complex_dihedral(cp: CPolyhedron, f: int, g: int) -> ComplexAngle:
    """Complex angle between the oriented ortho-circles of two adjacent faces."""
    if not cp.convex:
        raise ValidationMissing("dihedral angles need oriented ortho-circles")
    if f == g:
        raise NotAdjacent("a face is not adjacent to itself")
    ef = {canonical_edge(cp.polyhedron.faces[f][i],
                         cp.polyhedron.faces[f][(i + 1) % len(cp.polyhedron.faces[f])])
          for i in range(len(cp.polyhedron.faces[f]))}
    eg = {canonical_edge(cp.polyhedron.faces[g][i],
                         cp.polyhedron.faces[g][(i + 1) % len(cp.polyhedron.faces[g])])
          for i in range(len(cp.polyhedron.faces[g]))}
    if not ef & eg:
        raise NotAdjacent(f"faces {f} and {g} share no edge")
    return acos_theta(inv_dist(cp.face_ortho[f], cp.face_ortho[g]))


def link_point(cu: OrientedCircle, cv: OrientedCircle, o: OrientedCircle,
               tol: float = TOL, model: DiskModel | None = None) -> complex:
    """Chart point of D_v where the ortho-circle o pins the pair (cu, cv).

    Disjoint pair: the focus of their pencil that lies inside D_v. Meeting
    pair: the crossing of o with the line joining the two intersection
    points.
    """
    for name, c in (("first circle", cu), ("second circle", cv)):
        if abs(inv_dist(c, o)) > 1e-7:
            raise ValueError(f"ortho-circle is not orthogonal to the {name}")
    if model is None:
        model = DiskModel(cv)
    d = inv_dist(cu, cv)
    if abs(abs(d) - 1.0) <= tol:
        raise TangentPair(f"<C_u, C_v> = {d:.9f}")
    if abs(d) > 1.0:
        p1, p2 = pencil_limit_points(cu, cv)
        cand = [model.chart(p) for p in (p1, p2)]
        inside = [z for z in cand if abs(z) < 1.0 - 1e-12]
        if len(inside) != 1:
            raise FocusNotInDisk(f"focus chart moduli {[abs(z) for z in cand]}")
        return inside[0]
    a, b = circle_intersection_points(cu, cv)
    za, zb = model.chart(a), model.chart(b)
    lam = OrientedLine.from_chart_endpoints(model, za, zb)
    line_o = OrientedLine(model, o)
    try:
        return crossing_point(lam, line_o)
    except ValueError as exc:
        raise FocusNotInDisk(f"no crossing inside the disk: {exc}") from None


@dataclass(frozen=True, eq=False)
class CLink:
    """Link polygon of a vertex circle, cut out by incident face ortho-circles.

    `faces` lists the incident faces in cyclic order and `neighbors[i]` the
    vertex across the edge shared by faces[i] and faces[i+1]. `provenance`
    aligns with polygon.elements: black edges name their face, green
    elements and truncation vertices name their edge.
    """

    vertex: object
    proper: bool
    model: DiskModel
    lines: tuple
    faces: tuple
    neighbors: tuple
    polygon: GreenBlackPolygon | None = None
    provenance: tuple | None = None
    improper_reason: str | None = None


def _link_provenance(polygon: GreenBlackPolygon, vertex, faces, neighbors) -> tuple:
    out = []
    k = -1
    for el in polygon.elements:
        if isinstance(el, GBEdge) and el.color == "black":
            k += 1
            out.append(("face", faces[k]))
        else:
            out.append(("edge", canonical_edge(vertex, neighbors[k])))
    return tuple(out)


def c_link(cp: CPolyhedron, v, tol: float = TOL, strict: bool = False) -> CLink:
    """Cut the link polygon of vertex v out of its companion disk.

    Improper vertices come back as a first-class result carrying the reason
    and the raw support lines; `strict` turns that into NotProperAt.
    """
    if not (cp.convex and cp.non_unitary and cp.consistently_oriented):
        raise ValidationMissing(
            "links need convex, non-unitary, consistently oriented input")
    model = DiskModel(cp.circles[v])
    # The successor walk runs clockwise in the companion-disk chart of a
    # consistently oriented polyhedron; the link wants positive order.
    faces = cp.polyhedron.rotation(v)[0][::-1]
    n = len(faces)
    neighbors = []
    for i in range(n):
        shared = (set(cp.polyhedron.faces[faces[i]])
                  & set(cp.polyhedron.faces[faces[(i + 1) % n]])) - {v}
        neighbors.append(next(iter(shared)))
    neighbors = tuple(neighbors)
    lines = tuple(OrientedLine(model, cp.face_ortho[fi].reversed())
                  for fi in faces)
    spec = HyperidealPolygonSpec(lines)
    report = is_proper_hyperideal(spec, tol)
    if not report.proper:
        reason = f"{report.reason}: {report.detail}"
        if strict:
            raise NotProperAt(f"vertex {v!r} is improper ({reason})")
        return CLink(vertex=v, proper=False, model=model, lines=lines,
                     faces=faces, neighbors=neighbors, improper_reason=reason)
    polygon = greenblack_from_hyperideal(spec, tol)
    return CLink(vertex=v, proper=True, model=model, lines=lines,
                 faces=faces, neighbors=neighbors, polygon=polygon,
                 provenance=_link_provenance(polygon, v, faces, neighbors))


@dataclass(frozen=True)
class ClinkComparison:
    status: str                   # "congruent" | "black_edge_congruent" | "incompatible"
    labels: tuple | None = None
    sign_changes: int | None = None
    detail: str = ""


def compare_clinks(a: CLink, b: CLink, tol: float = 1e-7) -> ClinkComparison:
    """Classify two links as congruent, black-edge congruent, or incompatible."""
    if not a.proper or not b.proper:
        return ClinkComparison(status="incompatible", detail="improper link")
    pa, pb = a.polygon, b.polygon
    colors_a = [(type(e).__name__, e.color) for e in pa.elements]
    colors_b = [(type(e).__name__, e.color) for e in pb.elements]
    if colors_a != colors_b:
        return ClinkComparison(status="incompatible", detail="color patterns differ")
    blacks_a = [e.length for e in pa.edges if e.color == "black"]
    blacks_b = [e.length for e in pb.edges if e.color == "black"]
    if any(abs(x - y) > tol for x, y in zip(blacks_a, blacks_b)):
        return ClinkComparison(status="incompatible", detail="black lengths differ")
    greens_equal = all(
        abs(x.length - y.length) <= tol
        for x, y in zip(pa.edges, pb.edges) if x.color == "green")
    angles_equal = all(
        va.angle.close_to(vb.angle, tol=tol)
        for va, vb in zip(pa.vertices, pb.vertices) if va.color == "green")
    if greens_equal and angles_equal:
        return ClinkComparison(status="congruent")
    try:
        res = four_vertex_labels(pa, pb, eq_tol=tol)
    except (IncompatibleChains, NotBlackEdgeCongruent) as exc:
        return ClinkComparison(status="incompatible", detail=str(exc))
    return ClinkComparison(status="black_edge_congruent",
                           labels=res.labels, sign_changes=res.sign_changes)


# --------------------------------------------------------------------------
# Whole-polyhedron validation battery.

def validate_cpolyhedron(p: AbstractSphericalPolyhedron, circles: dict,
                         tol: float = TOL):
    """Run every check in order; returns (cp_or_None, diagnostics).

    The returned polyhedron, when present, carries all flags including
    properness. Diagnostics entries are {"check", "status", "witness"}.
    """
    diags = list(validate_abstract(p))
    if any(d["status"] == "fail" for d in diags):
        return None, diags

    try:
        cp = build_cpolyhedron(p, circles, tol)
        diags.append({"check": "build", "status": "pass", "witness": None})
    except (EdgeCoupled, Unitary, FaceCoaxial, FaceNotCPlanar,
            ThreeConsecutiveCoaxial) as exc:
        diags.append({"check": "build", "status": "fail",
                      "witness": {"error": type(exc).__name__, "detail": str(exc)}})
        return None, diags

    conv = check_convexity(cp, tol)
    diags.append({"check": "convexity",
                  "status": "pass" if conv.convex else "fail",
                  "witness": conv.witness})
    if not conv.convex:
        return None, diags
    cp = conv.oriented

    try:
        cp = normalize_orientation(cp)
        diags.append({"check": "orientation", "status": "pass", "witness": None})
    except StillInconsistent as exc:
        diags.append({"check": "orientation", "status": "fail",
                      "witness": {"detail": str(exc)}})
        return None, diags

    improper = []
    links = {}
    for v in p.vertices:
        lk = c_link(cp, v, tol)
        links[v] = lk
        if not lk.proper:
            improper.append({"vertex": v, "reason": lk.improper_reason})
    diags.append({"check": "properness",
                  "status": "pass" if not improper else "fail",
                  "witness": improper or None})
    cp = replace(cp, proper=not improper)
    return cp, diags
