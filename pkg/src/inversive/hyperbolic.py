"""Hyperbolic plane geometry inside a disk model.

Any oriented circle whose companion disk is a round disk D on the sphere
serves as a circle at infinity; D with the complete curvature -1 metric is
the model. Point-level work happens in the standard unit-disk chart reached
by a Moebius map computed once per model, so all formulas below are the
classical unit-disk ones. Chart points are complex numbers with |z| < 1.

Oriented lines carry their ambient carrier circle (orthogonal to the model
boundary); the positively bounded half-plane of a line is the side left of
its traversal, which is the companion disk of the carrier.

Complex angles live on Theta = i*R+ union [0, pi] union (pi + i*R+), where
cos is a bijection onto R: crossing lines get a real angle, ultra-parallel
lines with consistent orientations an imaginary one i*d (d the distance
between them), and inconsistent orientations the phase-shifted pi + i*d.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .circles import (
    DegenerateTriple,
    MoebiusMap,
    OrientedCircle,
    SphericalCap,
    circle_intersection_points,
    inv_dist,
    mobius_from_three_points,
    moebius_apply_point,
    oriented_circle_through_sphere_points,
    ortho_circle,
    plane_to_sphere,
    sphere_to_plane,
)

TOL = 1e-9


class PointOnBoundary(ValueError):
    """A model point must lie strictly inside the disk."""


class LinesIntersect(ValueError):
    pass


class LinesParallel(ValueError):
    pass


class IdealVertex(ValueError):
    """Consecutive support lines are tangent (parabolic); rejected by policy."""


class NotProper(ValueError):
    pass


class NonConvex(ValueError):
    pass


class IncompatibleChains(ValueError):
    pass


class HypothesisViolated(ValueError):
    pass


class NotBlackEdgeCongruent(ValueError):
    pass


# --------------------------------------------------------------------------
# Complex angles on Theta.

@dataclass(frozen=True)
class ComplexAngle:
    """Point of Theta: real angle, imaginary i*value, or phase-shifted pi + i*value."""

    branch: str
    value: float

    def __post_init__(self) -> None:
        if self.branch not in ("imaginary", "real", "phase_shifted"):
            raise ValueError(f"unknown branch {self.branch!r}")
        if self.value < 0:
            raise ValueError("angle value must be nonnegative")
        if self.branch == "real" and self.value > math.pi + 1e-12:
            raise ValueError("real branch is limited to [0, pi]")

    def as_complex(self) -> complex:
        if self.branch == "real":
            return complex(self.value, 0.0)
        if self.branch == "imaginary":
            return complex(0.0, self.value)
        return complex(math.pi, self.value)

    def close_to(self, other: "ComplexAngle", tol: float = 1e-9) -> bool:
        return abs(self.as_complex() - other.as_complex()) <= tol


def acos_theta(r: float) -> ComplexAngle:
    """Inverse of cos restricted to Theta."""
    if r > 1.0:
        return ComplexAngle("imaginary", math.acosh(r))
    if r < -1.0:
        return ComplexAngle("phase_shifted", math.acosh(-r))
    return ComplexAngle("real", math.acos(r))


def cos_theta(a: ComplexAngle) -> float:
    if a.branch == "real":
        return math.cos(a.value)
    if a.branch == "imaginary":
        return math.cosh(a.value)
    return -math.cosh(a.value)


# --------------------------------------------------------------------------
# Chart-level primitives (standard unit disk).

def hyp_distance(p: complex, q: complex) -> float:
    """Distance in the unit-disk chart, 2 atanh of the Moebius displacement."""
    for z in (p, q):
        if abs(z) >= 1.0 - 1e-13:
            raise PointOnBoundary(f"|{z}| is not strictly inside the disk")
    num = abs(p - q)
    den = abs(1.0 - p.conjugate() * q)
    return 2.0 * math.atanh(num / den)


def side_of_geodesic(p: complex, q: complex, z: complex) -> float:
    """Signed side of z relative to the geodesic through p toward q; > 0 is left."""
    def shift(w: complex) -> complex:
        return (w - p) / (1.0 - p.conjugate() * w)
    u = shift(q)
    u /= abs(u)
    return (shift(z) * u.conjugate()).imag


def geodesic_point(p: complex, q: complex, t: float) -> complex:
    """Point at fraction t of the hyperbolic segment from p to q."""
    qh = (q - p) / (1.0 - p.conjugate() * q)
    d = 2.0 * math.atanh(abs(qh))
    zh = qh / abs(qh) * math.tanh(0.5 * t * d) if abs(qh) > 0 else 0j
    return (zh + p) / (1.0 + p.conjugate() * zh)


def angle_at(v: complex, a: complex, b: complex) -> float:
    """Angle of the wedge a-v-b at v, in [0, pi]."""
    def shift(w: complex) -> complex:
        return (w - v) / (1.0 - v.conjugate() * w)
    return abs(cmath.phase(shift(a) / shift(b)))


def _signed_axis_distance(z: complex) -> float:
    """Signed distance from a chart point to the real-axis geodesic (> 0 above)."""
    return math.asinh(2.0 * z.imag / (1.0 - abs(z) ** 2))


def _foot_on_axis(z: complex) -> float:
    """Foot of the perpendicular from a chart point to the real-axis geodesic."""
    x = z.real
    if abs(x) < 1e-15:
        return 0.0
    c = (1.0 + abs(z) ** 2) / (2.0 * x)
    return math.copysign(abs(c) - math.sqrt(c * c - 1.0), c)


def golden_minimize(f, a: float, b: float, tol: float = 1e-10):
    """Golden-section minimum of a unimodal f on [a, b]; returns (x, f(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def segment_nearest_point(z: complex, p: complex, q: complex, tol: float = 1e-10):
    """Nearest point of segment pq to z: (parameter t, foot, distance)."""
    t, d = golden_minimize(lambda s: hyp_distance(z, geodesic_point(p, q, s)), 0.0, 1.0, tol)
    for endpoint_t in (0.0, 1.0):
        de = hyp_distance(z, geodesic_point(p, q, endpoint_t))
        if de < d:
            t, d = endpoint_t, de
    return t, geodesic_point(p, q, t), d


# --------------------------------------------------------------------------
# Models and oriented lines.

@dataclass(frozen=True, eq=False)
class DiskModel:
    """Disk model of the hyperbolic plane bounded by an oriented circle."""

    boundary: OrientedCircle
    _to_unit: MoebiusMap = field(init=False, repr=False)

    def __post_init__(self) -> None:
        pts = [sphere_to_plane(self.boundary.boundary_point(t)) for t in (0.0, math.pi / 2, math.pi)]
        object.__setattr__(self, "_to_unit",
                           mobius_from_three_points(tuple(pts), (1 + 0j, 1j, -1 + 0j)))

    @classmethod
    def standard(cls) -> "DiskModel":
        south = SphericalCap(center=np.array([0.0, 0.0, -1.0]), radius=math.pi / 2)
        return cls(boundary=OrientedCircle.from_cap(south))

    @property
    def to_unit(self) -> MoebiusMap:
        return self._to_unit

    @property
    def from_unit(self) -> MoebiusMap:
        return self._to_unit.inverse()

    def chart(self, u: np.ndarray) -> complex:
        return moebius_apply_point(self._to_unit, sphere_to_plane(u))

    def unchart(self, z: complex) -> np.ndarray:
        return plane_to_sphere(moebius_apply_point(self.from_unit, z))

    def distance(self, u: np.ndarray, v: np.ndarray) -> float:
        return hyp_distance(self.chart(u), self.chart(v))

    def same_as(self, other: "DiskModel", tol: float = 1e-9) -> bool:
        return self.boundary.approx_eq(other.boundary, tol=tol, oriented=True)


@dataclass(frozen=True, eq=False)
class OrientedLine:
    """Geodesic with a direction; carrier circle orthogonal to the model boundary.

    `alpha` and `omega` are the ideal chart endpoints where the traversal
    enters and leaves the disk; the left half-plane is the companion disk of
    the carrier.
    """

    model: DiskModel
    carrier: OrientedCircle
    alpha: complex = field(init=False)
    omega: complex = field(init=False)

    def __post_init__(self) -> None:
        d = inv_dist(self.carrier, self.model.boundary)
        if abs(d) > 1e-7:
            raise ValueError(f"carrier is not orthogonal to the model boundary: <c,b> = {d:.3e}")
        u1, u2 = circle_intersection_points(self.carrier, self.model.boundary)
        vm = self.model.boundary.lorentz[:3]
        entry, exit_ = (u1, u2) if float(np.dot(self.carrier.boundary_tangent(u1), vm)) > 0 else (u2, u1)
        a = self.model.chart(entry)
        w = self.model.chart(exit_)
        object.__setattr__(self, "alpha", a / abs(a))
        object.__setattr__(self, "omega", w / abs(w))

    @classmethod
    def through_chart_points(cls, model: DiskModel, p: complex, q: complex) -> "OrientedLine":
        """The oriented line traversing from chart point p toward chart point q."""
        if abs(p - q) < 1e-14:
            raise DegenerateTriple("two distinct points are needed")
        base = p if abs(p) > abs(q) else q
        third = base.conjugate() ** -1  # inverse point, beyond the exit
        tr = [moebius_apply_point(model.from_unit, z) for z in (p, q, third)]
        carrier = oriented_circle_through_sphere_points(*[plane_to_sphere(z) for z in tr])
        return cls(model=model, carrier=carrier)

    @classmethod
    def from_chart_endpoints(cls, model: DiskModel, alpha: complex, omega: complex) -> "OrientedLine":
        a, w = alpha / abs(alpha), omega / abs(omega)
        if abs(a - w) < 1e-12:
            raise DegenerateTriple("ideal endpoints coincide")
        mid = geodesic_midpoint_of_boundary(a, w)
        tr = [moebius_apply_point(model.from_unit, z) for z in (a, mid, w)]
        carrier = oriented_circle_through_sphere_points(*[plane_to_sphere(z) for z in tr])
        return cls(model=model, carrier=carrier)

    def reversed(self) -> "OrientedLine":
        return OrientedLine(model=self.model, carrier=self.carrier.reversed())

    def in_half_plane(self, z: complex, tol: float = 0.0) -> bool:
        """Closed left-half-plane membership of a chart point."""
        return self.carrier.contains_point(self.model.unchart(z), tol=tol)

    def side(self, z: complex) -> float:
        return side_of_geodesic(self.chart_point(0.0), self.chart_point(1.0), z)

    def chart_point(self, t: float) -> complex:
        """Point of the line at signed flow coordinate t (t = 0 at the midpoint)."""
        n = self._axis_map()
        return moebius_apply_point(n.inverse(), complex(math.tanh(0.5 * t), 0.0))

    def flow_coordinate(self, z: complex) -> float:
        """Inverse of chart_point for points on the line."""
        w = moebius_apply_point(self._axis_map(), z)
        return 2.0 * math.atanh(max(-1.0 + 1e-15, min(1.0 - 1e-15, w.real)))

    def _axis_map(self) -> MoebiusMap:
        return normalize_line_to_real_axis(self)


def geodesic_midpoint_of_boundary(alpha: complex, omega: complex) -> complex:
    """Chart midpoint of the geodesic with the given ideal endpoints."""
    if abs(alpha + omega) < 1e-12:
        return 0j  # diameter
    # carrier center w solves Re(conj(alpha) w) = 1 = Re(conj(omega) w)
    m = np.array([[alpha.real, alpha.imag], [omega.real, omega.imag]])
    w = np.linalg.solve(m, np.array([1.0, 1.0]))
    wc = complex(w[0], w[1])
    r = math.sqrt(abs(wc) ** 2 - 1.0)
    return wc * (1.0 - r / abs(wc))


def complex_angle(l1: OrientedLine, l2: OrientedLine) -> ComplexAngle:
    """Complex angle between oriented lines: acos on Theta of the carrier pairing."""
    if not l1.model.same_as(l2.model):
        raise ValueError("lines live in different models")
    return acos_theta(inv_dist(l1.carrier, l2.carrier))


def normalize_line_to_real_axis(line: OrientedLine) -> MoebiusMap:
    """Chart-to-chart map: the line goes to the real axis traversed -1 to 1,
    its left half-plane to the upper half-disk."""
    a, w = line.alpha, line.omega
    # midpoint of the ccw boundary arc from omega to alpha = left side of the line
    ta, tw = cmath.phase(a), cmath.phase(w)
    span = (ta - tw) % (2.0 * math.pi)
    gamma = cmath.exp(1j * (tw + 0.5 * span))
    return mobius_from_three_points((a, w, gamma), (-1 + 0j, 1 + 0j, 1j))


def crossing_point(l1: OrientedLine, l2: OrientedLine) -> complex:
    """Chart intersection point of two crossing lines (inversive distance in (-1,1))."""
    u1, u2 = circle_intersection_points(l1.carrier, l2.carrier)
    for u in (u1, u2):
        z = l1.model.chart(u)
        if abs(z) < 1.0:
            return z
    raise LinesParallel("no intersection inside the disk")


@dataclass(frozen=True)
class PerpSegment:
    """Common perpendicular of two ultra-parallel lines."""

    line: OrientedLine
    foot1: complex
    foot2: complex
    length: float


def common_perpendicular(l1: OrientedLine, l2: OrientedLine, tol: float = TOL) -> PerpSegment:
    d = inv_dist(l1.carrier, l2.carrier)
    if abs(abs(d) - 1.0) <= tol:
        raise LinesParallel(f"lines are parallel, <c1,c2> = {d}")
    if abs(d) < 1.0:
        raise LinesIntersect(f"lines cross, <c1,c2> = {d}")
    carrier = ortho_circle(l1.model.boundary, l1.carrier, l2.carrier)

    def foot_on(line: OrientedLine) -> complex:
        p, q = circle_intersection_points(carrier, line.carrier)
        for u in (p, q):
            if line.model.boundary.point_side(u) > 0:
                return line.model.chart(u)
        raise LinesParallel("perpendicular does not meet the line inside the disk")

    f1, f2 = foot_on(l1), foot_on(l2)
    perp = OrientedLine.through_chart_points(l1.model, f1, f2)
    return PerpSegment(line=perp, foot1=f1, foot2=f2, length=hyp_distance(f1, f2))


def translate_along_line(line: OrientedLine, t: float) -> MoebiusMap:
    """Chart-level hyperbolic translation of signed length t with the line as axis."""
    a, w = line.alpha, line.omega
    lam = math.exp(t)
    return MoebiusMap(a - lam * w, a * w * (lam - 1.0), 1.0 - lam, lam * a - w)


def distance_to_line(z: complex, line: OrientedLine) -> float:
    """Signed distance from a chart point to a line; positive on the left side."""
    w = moebius_apply_point(normalize_line_to_real_axis(line), z)
    return _signed_axis_distance(w)


def perpendicular_foot(z: complex, line: OrientedLine) -> complex:
    """Foot of the perpendicular from a chart point to the line."""
    n = normalize_line_to_real_axis(line)
    w = moebius_apply_point(n, z)
    return moebius_apply_point(n.inverse(), complex(_foot_on_axis(w), 0.0))


# --------------------------------------------------------------------------
# Green-black polygons and chains.

@dataclass(frozen=True)
class GBEdge:
    color: str
    length: float

    def __post_init__(self) -> None:
        if self.color not in ("green", "black"):
            raise ValueError(f"edge color must be green or black, got {self.color!r}")


@dataclass(frozen=True)
class GBVertex:
    color: str
    angle: ComplexAngle
    position: complex | None = None

    def __post_init__(self) -> None:
        if self.color not in ("green", "black"):
            raise ValueError(f"vertex color must be green or black, got {self.color!r}")


def _check_alternating(elements, closed: bool) -> None:
    if closed:
        if len(elements) % 2 != 0 or not elements:
            raise ValueError("closed polygon needs an even, positive element count")
    else:
        if len(elements) % 2 != 1:
            raise ValueError("chain needs edge, vertex, ..., edge (odd element count)")
    for i, el in enumerate(elements):
        want = GBEdge if i % 2 == 0 else GBVertex
        if not isinstance(el, want):
            raise ValueError(f"element {i} must be a {want.__name__}")


@dataclass(frozen=True)
class GreenBlackPolygon:
    """Cyclic alternating (edge, vertex, edge, vertex, ...) starting with an edge."""

    elements: tuple

    def __post_init__(self) -> None:
        _check_alternating(self.elements, closed=True)

    @property
    def edges(self) -> tuple:
        return self.elements[0::2]

    @property
    def vertices(self) -> tuple:
        return self.elements[1::2]

    def positions(self) -> list[complex] | None:
        pos = [v.position for v in self.vertices]
        return None if any(p is None for p in pos) else pos


@dataclass(frozen=True)
class GreenBlackChain:
    """Open run edge, vertex, ..., edge; free vertices at `start` and `end`."""

    elements: tuple
    start: complex | None = None
    end: complex | None = None

    def __post_init__(self) -> None:
        _check_alternating(self.elements, closed=False)
        if self.elements[0].color != "black" or self.elements[-1].color != "black":
            raise ValueError("a chain begins and ends with black edges")

    @property
    def edges(self) -> tuple:
        return self.elements[0::2]

    @property
    def vertices(self) -> tuple:
        return self.elements[1::2]

    def free_span(self) -> float:
        if self.start is None or self.end is None:
            raise ValueError("chain has no computed positions")
        return hyp_distance(self.start, self.end)


@dataclass(frozen=True)
class HyperidealPolygonSpec:
    """Support lines of a convex hyperideal polygon, in ccw cyclic order."""

    lines: tuple

    def __post_init__(self) -> None:
        if len(self.lines) < 3:
            raise ValueError("at least three support lines are required")
        m0 = self.lines[0].model
        for ln in self.lines[1:]:
            if not ln.model.same_as(m0):
                raise ValueError("support lines live in different models")


@dataclass(frozen=True)
class PropernessReport:
    proper: bool
    reason: str | None = None
    detail: str = ""


@dataclass(frozen=True)
class _PairFeature:
    kind: str                 # "crossing" | "hyperideal"
    invdist: float
    point_prev: complex       # feature point on the earlier line
    point_next: complex       # feature point on the later line
    perp: PerpSegment | None = None


def _pair_features(spec: HyperidealPolygonSpec, tol: float) -> list[_PairFeature]:
    out = []
    n = len(spec.lines)
    for i in range(n):
        l1, l2 = spec.lines[i], spec.lines[(i + 1) % n]
        d = inv_dist(l1.carrier, l2.carrier)
        if abs(abs(d) - 1.0) <= tol:
            raise IdealVertex(f"support lines {i} and {(i + 1) % n} are tangent, <c1,c2> = {d}")
        if abs(d) < 1.0:
            v = crossing_point(l1, l2)
            out.append(_PairFeature(kind="crossing", invdist=d, point_prev=v, point_next=v))
        else:
            perp = common_perpendicular(l1, l2, tol=tol)
            out.append(_PairFeature(kind="hyperideal", invdist=d,
                                    point_prev=perp.foot1, point_next=perp.foot2, perp=perp))
    return out


def _ideal_arcs_nonempty(arcs: list[tuple[float, float]], tol: float = 1e-9) -> bool:
    """Whether closed ccw arcs [start, end] on the circle have a common point."""
    two_pi = 2.0 * math.pi

    def member(theta: float, arc: tuple[float, float]) -> bool:
        return (theta - arc[0]) % two_pi <= (arc[1] - arc[0]) % two_pi + tol

    return any(all(member(s, arc) for arc in arcs) for s, _ in arcs)


def is_proper_hyperideal(spec: HyperidealPolygonSpec, tol: float = TOL) -> PropernessReport:
    """Properness of a hyperideal polygon spec.

    Checks that every hyperideal-vertex segment stays inside the polygon
    (otherwise `vertex_outside`), that features occur in traversal order
    along each line, and that truncating the hyperideal vertices leaves a
    bounded polygon (otherwise `unbounded`).
    """
    try:
        feats = _pair_features(spec, tol)
    except IdealVertex as exc:
        return PropernessReport(proper=False, reason="unbounded",
                                detail=f"ideal vertex: {exc}")
    n = len(spec.lines)

    # hyperideal-vertex segments must stay inside every half-plane
    for i, f in enumerate(feats):
        if f.kind != "hyperideal":
            continue
        for pt_name, pt in (("prev", f.point_prev), ("next", f.point_next)):
            for j, line in enumerate(spec.lines):
                if not line.in_half_plane(pt, tol=1e-9):
                    return PropernessReport(
                        proper=False, reason="vertex_outside",
                        detail=f"hyperideal vertex of pair {i} ({pt_name}) violates half-plane {j}")

    # truncation cuts, oriented toward the rest of the polygon
    arcs = [(cmath.phase(line.omega), cmath.phase(line.alpha)) for line in spec.lines]
    all_points = [p for f in feats for p in (f.point_prev, f.point_next)]
    for i, f in enumerate(feats):
        if f.kind != "hyperideal":
            continue
        cut = f.perp.line
        others = [p for p in all_points if min(abs(p - f.point_prev), abs(p - f.point_next)) > 1e-12]
        sides = [cut.side(p) for p in others]
        if any(s < -1e-9 for s in sides) and any(s > 1e-9 for s in sides):
            return PropernessReport(proper=False, reason="vertex_outside",
                                    detail=f"hyperideal vertex line {i} separates the polygon")
        if sum(1 for s in sides if s < -1e-9) > sum(1 for s in sides if s > 1e-9):
            cut = cut.reversed()
        arcs.append((cmath.phase(cut.omega), cmath.phase(cut.alpha)))

    if _ideal_arcs_nonempty(arcs):
        return PropernessReport(proper=False, reason="unbounded",
                                detail="truncated polygon still reaches the ideal boundary")

    # with boundedness settled, finite vertices must also respect every half-plane
    for i, f in enumerate(feats):
        if f.kind != "crossing":
            continue
        for j, line in enumerate(spec.lines):
            if not line.in_half_plane(f.point_prev, tol=1e-9):
                return PropernessReport(
                    proper=False, reason="vertex_outside",
                    detail=f"crossing vertex of pair {i} violates half-plane {j}")

    # traversal order along each line: entry feature before exit feature
    for i, line in enumerate(spec.lines):
        t_in = line.flow_coordinate(feats[(i - 1) % n].point_next)
        t_out = line.flow_coordinate(feats[i].point_prev)
        if t_out <= t_in + 1e-12:
            return PropernessReport(
                proper=False, reason="vertex_outside",
                detail=f"features out of order along line {i}")

    return PropernessReport(proper=True)


_RIGHT = ComplexAngle("real", math.pi / 2)


def greenblack_from_hyperideal(spec: HyperidealPolygonSpec, tol: float = TOL) -> GreenBlackPolygon:
    """Truncate the hyperideal vertices of a proper spec into a green-black polygon.

    Black edges are the pieces of the support lines between consecutive
    features; hyperideal vertices become green edges whose endpoints are
    black right-angled vertices; finite vertices stay, colored green, with
    the real complex angle of their support-line pair.
    """
    feats = _pair_features(spec, tol)  # raises IdealVertex
    report = is_proper_hyperideal(spec, tol)
    if not report.proper:
        raise NotProper(f"{report.reason}: {report.detail}")
    n = len(spec.lines)
    elements: list = []
    for i in range(n):
        a = feats[(i - 1) % n].point_next   # entry feature on line i
        b = feats[i].point_prev             # exit feature on line i
        elements.append(GBEdge(color="black", length=hyp_distance(a, b)))
        f = feats[i]
        if f.kind == "crossing":
            elements.append(GBVertex(color="green", angle=acos_theta(f.invdist),
                                     position=f.point_prev))
        else:
            elements.append(GBVertex(color="black", angle=_RIGHT, position=f.point_prev))
            elements.append(GBEdge(color="green", length=f.perp.length))
            elements.append(GBVertex(color="black", angle=_RIGHT, position=f.point_next))
    return GreenBlackPolygon(elements=tuple(elements))


def validate_greenblack(p: GreenBlackPolygon | GreenBlackChain, tol: float = 1e-7) -> list[dict]:
    """Rule violations of the green-black structure, each with its element index."""
    issues: list[dict] = []
    closed = isinstance(p, GreenBlackPolygon)
    els = p.elements
    m = len(els)

    def at(i: int):
        return els[i % m] if closed else (els[i] if 0 <= i < m else None)

    for i, el in enumerate(els):
        if isinstance(el, GBEdge):
            if el.length <= 0:
                issues.append({"rule": "positive_length", "index": i,
                               "detail": f"edge length {el.length}"})
            if el.color == "green":
                for j in (i - 2, i + 2):
                    nb = at(j)
                    if nb is not None and nb.color != "black":
                        issues.append({"rule": 1, "index": i,
                                       "detail": f"green edge adjacent to green edge at {j % m}"})
        else:
            incident_green = any(
                isinstance(nb, GBEdge) and nb.color == "green"
                for nb in (at(i - 1), at(i + 1)) if nb is not None)
            want = "black" if incident_green else "green"
            if el.color != want:
                issues.append({"rule": 2, "index": i,
                               "detail": f"vertex should be {want}, is {el.color}"})
            if incident_green:
                if el.angle.branch != "real" or abs(el.angle.value - math.pi / 2) > tol:
                    issues.append({"rule": 3, "index": i,
                                   "detail": f"black vertex angle {el.angle} is not pi/2"})
            elif el.angle.branch == "real" and not 0.0 < el.angle.value < math.pi + tol:
                issues.append({"rule": "convex", "index": i,
                               "detail": f"green vertex angle {el.angle.value} outside (0, pi)"})

    pos = [v.position for v in p.vertices]
    if closed and all(q is not None for q in pos) and len(pos) >= 3:
        k = len(pos)
        for i in range(k):
            a, b = pos[i], pos[(i + 1) % k]
            if abs(a - b) < 1e-12:
                continue
            for j in range(k):
                if side_of_geodesic(a, b, pos[j]) < -math.sqrt(tol):
                    issues.append({"rule": "convex", "index": 2 * i,
                                   "detail": f"vertex {j} right of edge {i}"})
                    break
    return issues


# --------------------------------------------------------------------------
# Turtle layout and arm chains.

def _step(length: float) -> MoebiusMap:
    h = 0.5 * length
    return MoebiusMap(math.cosh(h), math.sinh(h), math.sinh(h), math.cosh(h))


def _turn(interior_angle: float) -> MoebiusMap:
    phi = math.pi - interior_angle  # left turn by the exterior angle
    rot = cmath.exp(0.5j * phi)
    return MoebiusMap(rot, 0, 0, rot.conjugate())


def layout_path(lengths, interior_angles) -> list[complex]:
    """Chart positions of a left-turning geodesic path from the origin.

    len(interior_angles) = len(lengths) - 1; traversal starts at 0 heading
    along the positive real axis.
    """
    frame = MoebiusMap.identity()
    pts = [0j]
    for i, L in enumerate(lengths):
        frame = frame.compose(_step(L))
        pts.append(moebius_apply_point(frame, 0j))
        if i < len(interior_angles):
            frame = frame.compose(_turn(interior_angles[i]))
    return pts


def closure_defect(lengths, interior_angles) -> np.ndarray:
    """How far the closed-up turtle path is from returning to its start frame.

    Takes n edge lengths and n interior angles (one per vertex, the last one
    closing up); returns the 3 holonomy components that vanish exactly when
    the polygon closes.
    """
    frame = MoebiusMap.identity()
    for L, ang in zip(lengths, interior_angles):
        frame = frame.compose(_step(L)).compose(_turn(ang))
    m = frame.matrix()
    if m[0, 0].real < 0:
        m = -m
    return np.array([m[0, 1].real, m[0, 1].imag, m[0, 0].imag])


def convex_positions(points: list[complex], tol: float = 1e-9) -> bool:
    """Whether the cyclic chart points bound a convex polygon traversed ccw."""
    k = len(points)
    for i in range(k):
        a, b = points[i], points[(i + 1) % k]
        if abs(a - b) < 1e-12:
            continue
        for j in range(k):
            if side_of_geodesic(a, b, points[j]) < -tol:
                return False
    return True


def arm_chain_build(black_lengths, green_lengths, green_vertex_angles, color_pattern) -> GreenBlackChain:
    """Lay out a green-black arm chain from its data.

    `color_pattern` lists the edge colors in order, beginning and ending
    black. Green-adjacent vertices get right angles; vertices between two
    black edges consume `green_vertex_angles` in order. The closed-up chain
    must be convex.
    """
    if not color_pattern or color_pattern[0] != "black" or color_pattern[-1] != "black":
        raise ValueError("pattern must begin and end with black edges")
    for i in range(len(color_pattern) - 1):
        if color_pattern[i] == "green" and color_pattern[i + 1] == "green":
            raise ValueError("green edges must be separated by black edges")
    blacks = list(black_lengths)
    greens = list(green_lengths)
    g_angles = list(green_vertex_angles)
    if any(x <= 0 for x in blacks + greens):
        raise ValueError("edge lengths must be positive")
    if any(not 0.0 < a < math.pi for a in g_angles):
        raise ValueError("green vertex angles must lie in (0, pi)")

    lengths: list[float] = []
    vertex_specs: list[tuple[str, float]] = []
    for i, color in enumerate(color_pattern):
        lengths.append((blacks if color == "black" else greens).pop(0))
        if i < len(color_pattern) - 1:
            if color == "green" or color_pattern[i + 1] == "green":
                vertex_specs.append(("black", math.pi / 2))
            else:
                vertex_specs.append(("green", g_angles.pop(0)))
    if blacks or greens or g_angles:
        raise ValueError("length/angle counts do not match the pattern")

    pts = layout_path(lengths, [a for _, a in vertex_specs])
    if not convex_positions(pts):
        raise NonConvex("closing the free vertices does not give a convex polygon")

    elements: list = []
    for i, color in enumerate(color_pattern):
        elements.append(GBEdge(color=color, length=lengths[i]))
        if i < len(vertex_specs):
            c, a = vertex_specs[i]
            elements.append(GBVertex(color=c, angle=ComplexAngle("real", a),
                                     position=pts[i + 1]))
    return GreenBlackChain(elements=tuple(elements), start=pts[0], end=pts[-1])


@dataclass(frozen=True)
class ArmCheckResult:
    consistent: bool
    span: float
    span_prime: float
    detail: str = ""


def _chain_data(c: GreenBlackChain):
    colors = tuple(e.color for e in c.edges)
    blacks = tuple(e.length for e in c.edges if e.color == "black")
    greens = tuple(e.length for e in c.edges if e.color == "green")
    green_angles = tuple(v.angle.value for v in c.vertices if v.color == "green")
    return colors, blacks, greens, green_angles


def arm_lemma_check(c: GreenBlackChain, c_prime: GreenBlackChain, tol: float = 1e-9) -> ArmCheckResult:
    """Numeric instance of the arm monotonicity statement.

    Requires the chains to share their pattern and black lengths, with every
    green length and green-vertex angle of `c` at most that of `c_prime`.
    Returns whether the free-vertex span of `c` stays below that of
    `c_prime`.
    """
    cols, blk, grn, ang = _chain_data(c)
    cols2, blk2, grn2, ang2 = _chain_data(c_prime)
    if cols != cols2 or len(ang) != len(ang2):
        raise IncompatibleChains("edge patterns differ")
    if any(abs(a - b) > tol for a, b in zip(blk, blk2)):
        raise NotBlackEdgeCongruent("black edge lengths differ")
    for v in list(c.vertices) + list(c_prime.vertices):
        if v.color == "black" and abs(v.angle.value - math.pi / 2) > 1e-7:
            raise HypothesisViolated("green-adjacent vertex is not right-angled")
    if any(g > g2 + tol for g, g2 in zip(grn, grn2)):
        raise HypothesisViolated("a green length of c exceeds that of c_prime")
    if any(a > a2 + tol for a, a2 in zip(ang, ang2)):
        raise HypothesisViolated("a green angle of c exceeds that of c_prime")

    span = c.free_span() if c.start is not None else _respan(c)
    span2 = c_prime.free_span() if c_prime.start is not None else _respan(c_prime)
    ok = span <= span2 + tol
    return ArmCheckResult(consistent=ok, span=span, span_prime=span2,
                          detail="" if ok else "free span decreased")


def _respan(c: GreenBlackChain) -> float:
    lengths = [e.length for e in c.edges]
    angles = [v.angle.value for v in c.vertices]
    pts = layout_path(lengths, angles)
    return hyp_distance(pts[0], pts[-1])


@dataclass(frozen=True)
class FourVertexResult:
    labels: tuple            # entries: (element_index, "+" | "-" | None)
    sign_changes: int


def four_vertex_labels(p: GreenBlackPolygon, p_prime: GreenBlackPolygon,
                       tol: float = 1e-9, eq_tol: float = 1e-7) -> FourVertexResult:
    """Compare green data of two black-edge-congruent polygons.

    Each green vertex is labeled by its angle difference and each green edge
    by its length difference ("+" when p exceeds p_prime beyond `eq_tol`);
    the cyclic count of sign alternations among labeled items is returned.
    """
    a, b = p.elements, p_prime.elements
    if len(a) != len(b):
        raise IncompatibleChains("element counts differ")
    for i, (x, y) in enumerate(zip(a, b)):
        if type(x) is not type(y) or x.color != y.color:
            raise IncompatibleChains(f"element {i} differs in kind or color")
    for i, (x, y) in enumerate(zip(a, b)):
        if isinstance(x, GBEdge) and x.color == "black" and abs(x.length - y.length) > tol:
            raise NotBlackEdgeCongruent(f"black edge {i}: {x.length} vs {y.length}")

    labels: list[tuple[int, str | None]] = []
    for i, (x, y) in enumerate(zip(a, b)):
        if isinstance(x, GBEdge) and x.color == "green":
            diff = x.length - y.length
        elif isinstance(x, GBVertex) and x.color == "green":
            diff = (x.angle.as_complex() - y.angle.as_complex()).real \
                if x.angle.branch == y.angle.branch == "real" \
                else abs(x.angle.as_complex()) - abs(y.angle.as_complex())
        else:
            continue
        labels.append((i, "+" if diff > eq_tol else "-" if diff < -eq_tol else None))

    signs = [s for _, s in labels if s is not None]
    changes = sum(1 for i in range(len(signs)) if signs[i] != signs[(i + 1) % len(signs)]) \
        if len(signs) > 1 else 0
    return FourVertexResult(labels=tuple(labels), sign_changes=changes)


def right_angled_polygon(side_lengths, closure_tol: float = 1e-7) -> GreenBlackPolygon:
    """Positioned polygon with all right angles, edges colored black, green,
    black, ... in order. The side lengths must already close up."""
    sides = list(side_lengths)
    if len(sides) % 2 != 0 or len(sides) < 6:
        raise ValueError("need an even number (at least 6) of alternating sides")
    angles = [math.pi / 2] * len(sides)
    defect = closure_defect(sides, angles)
    if np.max(np.abs(defect)) > closure_tol:
        raise ValueError(f"sides do not close up, defect {defect}")
    pts = layout_path(sides, angles[:-1])
    elements: list = []
    for i, L in enumerate(sides):
        elements.append(GBEdge(color="black" if i % 2 == 0 else "green", length=L))
        elements.append(GBVertex(color="black", angle=_RIGHT,
                                 position=pts[(i + 1) % len(sides)]))
    return GreenBlackPolygon(elements=tuple(elements))


def _newton_solve(f, x0, tol: float = 1e-12, max_iter: int = 60) -> np.ndarray:
    x = np.array(x0, dtype=float)
    for _ in range(max_iter):
        r = f(x)
        if float(np.max(np.abs(r))) < tol:
            return x
        jac = np.empty((len(r), len(x)))
        h = 1e-7
        for j in range(len(x)):
            xp, xm = x.copy(), x.copy()
            xp[j] += h
            xm[j] -= h
            jac[:, j] = (f(xp) - f(xm)) / (2.0 * h)
        x = x - np.linalg.solve(jac, r)
    raise ValueError("closure iteration did not converge")


def close_right_angled_octagon(blacks, green0: float, greens_guess=None) -> list[float]:
    """Green lengths of a right-angled octagon with the given black sides.

    The octagon alternates black, green, ... with all interior angles pi/2;
    fixing the four black sides leaves one degree of freedom, pinned here by
    the first green length. Returns all four green lengths.
    """
    blacks = list(blacks)
    if len(blacks) != 4:
        raise ValueError("an octagon needs exactly four black sides")
    guess = list(greens_guess) if greens_guess is not None else [green0] * 3
    angles = [math.pi / 2] * 8

    def defect(g: np.ndarray) -> np.ndarray:
        sides = [blacks[0], green0, blacks[1], g[0], blacks[2], g[1], blacks[3], g[2]]
        return closure_defect(sides, angles)

    sol = _newton_solve(defect, guess)
    if np.any(sol <= 0):
        raise ValueError(f"closure requires a non-positive green length: {sol}")
    return [green0, float(sol[0]), float(sol[1]), float(sol[2])]


def regular_right_angled_side(n: int) -> float:
    """Side length of the regular right-angled hyperbolic n-gon (n >= 5)."""
    if n < 5:
        raise ValueError("right-angled polygons need at least five sides")
    return 2.0 * math.acosh(math.sqrt(2.0) * math.cos(math.pi / n))


# --------------------------------------------------------------------------
# Flow lemmas.

def hypercycle_monotonicity_check(line: OrientedLine, point: complex, samples: int = 32,
                                  offset: float = 0.0, t_max: float = 3.0) -> bool:
    """Distances from a fixed point to points flowing away along a hypercycle.

    The hypercycle is the flow line of `line` at signed distance `offset`
    (the line itself when 0). Walking the hypercycle away from the foot of
    the perpendicular from `point` must increase the distance strictly, on
    both sides.
    """
    n = normalize_line_to_real_axis(line)
    p = moebius_apply_point(n, point)
    if abs(p) >= 1.0 - 1e-12:
        raise HypothesisViolated("point is not strictly inside the disk")
    if abs(_signed_axis_distance(p) - offset) < 1e-9:
        raise HypothesisViolated("point lies on the hypercycle")
    z0 = 1j * math.tanh(0.5 * offset)
    t_p = 2.0 * math.atanh(_foot_on_axis(p))

    def h(t: float) -> complex:
        lam = math.exp(t)
        return moebius_apply_point(
            MoebiusMap(1 + lam, lam - 1, lam - 1, 1 + lam), z0)  # translation by t along axis

    for direction in (1.0, -1.0):
        prev = hyp_distance(p, h(t_p))
        for k in range(1, samples + 1):
            cur = hyp_distance(p, h(t_p + direction * t_max * k / samples))
            if cur <= prev - 1e-12:
                return False
            prev = cur
    return True


def region_flow_check(k: OrientedLine, l: OrientedLine, m: OrientedLine,
                      b: complex, c: complex, B: complex, C: complex,
                      tol: float = 1e-9) -> bool:
    """Numeric instance of the two-wall flow inequality.

    The region is bounded by `k`, `l`, and the segment of `m` between them,
    with `m` orthogonal to both and all three left half-planes facing the
    region. `b` lies on the perpendicular dropped from `c` to `k`; `B` keeps
    the distance of `b` to `k`, `C` keeps the distance of `c` to `l`, and
    both lie beyond the line through `b` and `c` as seen from `m`. Checks
    that the segment `bc` is no longer than `BC`.
    """
    for ln, name in ((k, "k"), (l, "l")):
        d = inv_dist(m.carrier, ln.carrier)
        if abs(d) > 1e-7:
            raise HypothesisViolated(f"m is not orthogonal to {name}: <m,{name}> = {d:.3e}")
    for z, name in ((b, "b"), (c, "c"), (B, "B"), (C, "C")):
        for ln, lname in ((k, "k"), (l, "l"), (m, "m")):
            if not ln.in_half_plane(z, tol=1e-9):
                raise HypothesisViolated(f"{name} is outside half-plane of {lname}")

    a = perpendicular_foot(c, k)
    gap = hyp_distance(a, b) + hyp_distance(b, c) - hyp_distance(a, c)
    if gap > 1e-7 or hyp_distance(a, b) < 1e-9 or hyp_distance(b, c) < 1e-9:
        raise HypothesisViolated("b is not interior to the perpendicular segment from c to k")
    if abs(abs(distance_to_line(B, k)) - abs(distance_to_line(b, k))) > 1e-7:
        raise HypothesisViolated("B does not keep the distance of b to k")
    if abs(abs(distance_to_line(C, l)) - abs(distance_to_line(c, l))) > 1e-7:
        raise HypothesisViolated("C does not keep the distance of c to l")

    xk = crossing_point(m, k)
    xl = crossing_point(m, l)
    sk, sl = side_of_geodesic(b, c, xk), side_of_geodesic(b, c, xl)
    if sk * sl < -1e-12:
        raise HypothesisViolated("the line through b and c crosses m")
    side_m = sk + sl
    for z, name in ((B, "B"), (C, "C")):
        s = side_of_geodesic(b, c, z)
        if s * side_m > 1e-9:
            raise HypothesisViolated(f"{name} is on the m side of the line through b and c")

    return hyp_distance(b, c) <= hyp_distance(B, C) + tol
