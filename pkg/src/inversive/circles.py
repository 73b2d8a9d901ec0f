"""Oriented circles on the 2-sphere and in the extended plane.

An oriented circle bounds a closed companion disk lying to its left. Three
interchangeable representations are provided:

* ``SphericalCap``: the companion disk itself, a spherical center ``p`` (unit
  3-vector) and radius ``r`` in (0, pi).
* ``PlanarOrientedCircle``: a circle or line in the extended complex plane
  with a traversal orientation.
* ``OrientedCircle``: the canonical form, a space-like unit 4-vector under
  the bilinear form eta = diag(+,+,+,-). The cap (p, r) embeds as
  (p/sin r, cos r/sin r); negating the vector reverses orientation.

The sphere and the plane are identified once and for all by stereographic
projection from the north pole (north -> infinity, equator -> unit circle),
taken orientation-preserving: a counterclockwise planar circle has its
companion disk inside. Under this chart the oriented equator whose companion
disk is the southern hemisphere converts to the unit circle with
orientation +1.

The inversive distance of two oriented circles is -eta(x1, x2). It agrees
with the metric formula (-p1.p2 + cos r1 cos r2)/(sin r1 sin r2) and with
the cross-ratio definition 2[z1,z2;w1,w2] - 1 evaluated on a common
orthogonal circle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

TOL = 1e-9

INF = complex(math.inf, math.inf)
"""The point at infinity of the extended plane."""

_LINE_EPS = 1e-12  # below this the planar image is emitted as a line


class DegeneratePair(ValueError):
    """The two circles coincide as unoriented circles."""


class DegenerateTriple(ValueError):
    """A Moebius map was requested through a triple with repeated points."""


class NearPoleDegeneracy(ValueError):
    """Cap boundary passes too close to the projection pole for a planar form."""


class IdenticalCircles(ValueError):
    """A coaxial family needs two distinct unoriented circles."""


class Coaxial(ValueError):
    """The given circles span a pencil; no unique ortho-circle exists."""


class NoRealOrthoCircle(ValueError):
    """The common orthogonal solution is not space-like."""


def is_inf(z: complex) -> bool:
    return cmath.isinf(z)


def _ext_eq(a: complex, b: complex, tol: float = 1e-13) -> bool:
    if is_inf(a) or is_inf(b):
        return is_inf(a) and is_inf(b)
    return abs(a - b) <= tol * (1.0 + abs(a) + abs(b))


def eta(x: np.ndarray, y: np.ndarray) -> float:
    """Minkowski pairing diag(+,+,+,-)."""
    return float(x[0] * y[0] + x[1] * y[1] + x[2] * y[2] - x[3] * y[3])


def sphere_to_plane(u: np.ndarray) -> complex:
    """Stereographic projection from the north pole; (0,0,1) -> INF."""
    if u[2] >= 1.0 - 1e-15:
        return INF
    return complex(u[0], u[1]) / (1.0 - u[2])


def plane_to_sphere(z: complex) -> np.ndarray:
    if is_inf(z):
        return np.array([0.0, 0.0, 1.0])
    s = abs(z) ** 2
    return np.array([2.0 * z.real, 2.0 * z.imag, s - 1.0]) / (s + 1.0)


def _unit(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("zero vector has no direction")
    return v / n


@dataclass(frozen=True)
class SphericalCap:
    """Companion disk on the sphere: all points within angle `radius` of `center`."""

    center: np.ndarray
    radius: float

    def __post_init__(self) -> None:
        c = np.asarray(self.center, dtype=float)
        n = float(np.linalg.norm(c))
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"cap center must be a unit vector, |c| = {n}")
        if not 0.0 < self.radius < math.pi:
            raise ValueError(f"cap radius must lie in (0, pi), got {self.radius}")
        object.__setattr__(self, "center", c / n)
        object.__setattr__(self, "radius", float(self.radius))

    def contains(self, u: np.ndarray, tol: float = 0.0) -> bool:
        return float(np.dot(u, self.center)) >= math.cos(self.radius) - tol


@dataclass(frozen=True)
class PlanarOrientedCircle:
    """Oriented circle or line in the extended plane.

    For kind "circle": boundary |z - center| = radius, orientation +1 meaning
    counterclockwise (companion disk inside) and -1 clockwise (companion
    outside, through infinity).

    For kind "line": point set {offset * n + t * direction} with n the left
    normal 1j * direction. Orientation +1 traverses along +direction with the
    companion half-plane on the n side; -1 traverses the other way.
    """

    kind: str
    center: complex = 0j
    radius: float = 0.0
    direction: complex = 1 + 0j
    offset: float = 0.0
    orientation: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("circle", "line"):
            raise ValueError(f"kind must be 'circle' or 'line', got {self.kind!r}")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        if self.kind == "circle":
            if not self.radius > 0.0:
                raise ValueError("circle radius must be positive")
        else:
            d = abs(self.direction)
            if abs(d - 1.0) > 1e-9:
                raise ValueError("line direction must be a unit complex number")
            object.__setattr__(self, "direction", self.direction / d)

    @classmethod
    def circle(cls, center: complex, radius: float, orientation: int = 1) -> "PlanarOrientedCircle":
        return cls(kind="circle", center=center, radius=radius, orientation=orientation)

    @classmethod
    def line(cls, direction: complex, offset: float, orientation: int = 1) -> "PlanarOrientedCircle":
        return cls(kind="line", direction=direction, offset=offset, orientation=orientation)

    @property
    def normal(self) -> complex:
        """Left normal of the +direction traversal (lines only)."""
        return 1j * self.direction

    def contains(self, z: complex, tol: float = 0.0) -> bool:
        """Membership of `z` in the closed companion region."""
        if self.kind == "circle":
            if is_inf(z):
                return self.orientation < 0
            if self.orientation > 0:
                return abs(z - self.center) <= self.radius + tol
            return abs(z - self.center) >= self.radius - tol
        if is_inf(z):
            return True  # infinity lies on every line, hence in the closed half-plane
        n = self.normal
        side = z.real * n.real + z.imag * n.imag - self.offset
        return self.orientation * side >= -tol

    def reversed(self) -> "PlanarOrientedCircle":
        return PlanarOrientedCircle(
            kind=self.kind, center=self.center, radius=self.radius,
            direction=self.direction, offset=self.offset,
            orientation=-self.orientation,
        )

    def same_unoriented(self, other: "PlanarOrientedCircle", tol: float = 1e-9) -> bool:
        if self.kind != other.kind:
            return False
        if self.kind == "circle":
            return (abs(self.center - other.center) <= tol
                    and abs(self.radius - other.radius) <= tol)
        cross = (self.direction * other.direction.conjugate()).imag
        if abs(cross) > tol:
            return False
        p = self.offset * self.normal  # a point of self
        n = other.normal
        return abs(p.real * n.real + p.imag * n.imag - other.offset) <= tol


@dataclass(frozen=True, eq=False)
class OrientedCircle:
    """Canonical oriented circle: unit space-like 4-vector, eta(x, x) = 1."""

    lorentz: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.lorentz, dtype=float)
        if x.shape != (4,):
            raise ValueError("lorentz vector must have shape (4,)")
        q = eta(x, x)
        if q <= 0.0:
            raise ValueError(f"lorentz vector must be space-like, eta(x,x) = {q}")
        object.__setattr__(self, "lorentz", x / math.sqrt(q))

    @classmethod
    def from_cap(cls, cap: SphericalCap) -> "OrientedCircle":
        s = math.sin(cap.radius)
        vec = np.empty(4)
        vec[:3] = cap.center / s
        vec[3] = math.cos(cap.radius) / s
        return cls(vec)

    @classmethod
    def from_planar(cls, pc: PlanarOrientedCircle) -> "OrientedCircle":
        if pc.kind == "line":
            n = pc.normal
            s = float(pc.orientation)
            return cls(np.array([s * n.real, s * n.imag, s * pc.offset, s * pc.offset]))
        sigma = float(pc.orientation)
        rho = pc.radius
        z0 = pc.center
        k = -sigma / rho
        s = sigma * (abs(z0) ** 2 - rho ** 2) / rho
        v12 = sigma * z0 / rho
        return cls(np.array([v12.real, v12.imag, 0.5 * (k + s), 0.5 * (s - k)]))

    @property
    def cap(self) -> SphericalCap:
        v = self.lorentz[:3]
        t = self.lorentz[3]
        nv = float(np.linalg.norm(v))
        return SphericalCap(center=v / nv, radius=math.atan2(1.0, t))

    def to_planar(self, pole_tol: float = TOL) -> PlanarOrientedCircle:
        """Stereographic image. Raises NearPoleDegeneracy close to the pole."""
        v = self.lorentz
        k = v[2] - v[3]
        if abs(k) <= _LINE_EPS:
            n = complex(v[0], v[1])
            n /= abs(n)
            return PlanarOrientedCircle.line(direction=-1j * n, offset=float(v[3]), orientation=1)
        if abs(k) < pole_tol:
            raise NearPoleDegeneracy(
                f"cap boundary within {abs(k):.3e} of the projection pole; keep the spherical form")
        center = -complex(v[0], v[1]) / k
        radius = 1.0 / abs(k)
        orientation = 1 if k < 0 else -1
        return PlanarOrientedCircle.circle(center=center, radius=radius, orientation=orientation)

    def reversed(self) -> "OrientedCircle":
        return OrientedCircle(-self.lorentz)

    def point_side(self, u: np.ndarray) -> float:
        """Signed companion membership of a sphere point: >0 inside, 0 on the boundary."""
        v = self.lorentz
        return float(u[0] * v[0] + u[1] * v[1] + u[2] * v[2] - v[3])

    def contains_point(self, u: np.ndarray, tol: float = 0.0) -> bool:
        return self.point_side(u) >= -tol

    def boundary_frame(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Orthonormal (e1, e2, p) with e1 x e2 = -p, fixing the traversal below."""
        cap = self.cap
        p = cap.center
        axis = np.zeros(3)
        axis[int(np.argmin(np.abs(p)))] = 1.0
        e1 = _unit(axis - np.dot(axis, p) * p)
        e2 = np.cross(e1, p)  # e1 x e2 = e1 x (e1 x p) = -p
        return e1, e2, p

    def boundary_point(self, theta: float) -> np.ndarray:
        """Boundary traversal with the companion disk on the left."""
        cap = self.cap
        e1, e2, p = self.boundary_frame()
        c, s = math.cos(cap.radius), math.sin(cap.radius)
        return c * p + s * (math.cos(theta) * e1 + math.sin(theta) * e2)

    def boundary_tangent(self, u: np.ndarray) -> np.ndarray:
        """Unit traversal direction at a boundary point `u`."""
        return _unit(np.cross(u, self.cap.center))

    def approx_eq(self, other: "OrientedCircle", tol: float = 1e-9, oriented: bool = True) -> bool:
        d = float(np.linalg.norm(self.lorentz - other.lorentz))
        if oriented:
            return d <= tol
        return min(d, float(np.linalg.norm(self.lorentz + other.lorentz))) <= tol


def convert(obj, target: type, pole_tol: float = TOL):
    """Convert between the three circle representations."""
    if isinstance(obj, target):
        return obj
    if isinstance(obj, SphericalCap):
        oc = OrientedCircle.from_cap(obj)
    elif isinstance(obj, PlanarOrientedCircle):
        oc = OrientedCircle.from_planar(obj)
    elif isinstance(obj, OrientedCircle):
        oc = obj
    else:
        raise TypeError(f"not a circle representation: {type(obj).__name__}")
    if target is OrientedCircle:
        return oc
    if target is SphericalCap:
        return oc.cap
    if target is PlanarOrientedCircle:
        return oc.to_planar(pole_tol=pole_tol)
    raise TypeError(f"unknown target representation: {target!r}")


def inv_dist_spherical(c1: SphericalCap, c2: SphericalCap) -> float:
    """Metric-form inversive distance of two caps."""
    num = -float(np.dot(c1.center, c2.center)) + math.cos(c1.radius) * math.cos(c2.radius)
    return num / (math.sin(c1.radius) * math.sin(c2.radius))


def inv_dist(c1: OrientedCircle, c2: OrientedCircle) -> float:
    """Inversive distance, -eta(x1, x2); the sign is calibrated to the metric form."""
    return -eta(c1.lorentz, c2.lorentz)


def reverse_orientation(c: OrientedCircle) -> OrientedCircle:
    return c.reversed()


# --------------------------------------------------------------------------
# Cross-ratio route to the inversive distance. Kept deliberately planar and
# elementary so that it is an independent check of the Lorentz pairing.

def _cross_ratio(z1: complex, z2: complex, w1: complex, w2: complex) -> float:
    """[z1,z2;w1,w2] = (z1-w1)(z2-w2) / ((z1-z2)(w1-w2)) on the extended plane."""
    if _ext_eq(z1, z2) or _ext_eq(w1, w2):
        raise DegeneratePair("marked point pairs must be distinct")
    if _ext_eq(z1, w1) or _ext_eq(z2, w2):
        return 0.0
    if _ext_eq(z1, w2) or _ext_eq(z2, w1):
        return 1.0

    def factor(a: complex, b: complex) -> tuple[complex, int]:
        # value and infinity count; (inf - finite) contributes +1, (finite - inf) -1 sign
        if is_inf(a):
            return 1.0 + 0j, 1
        if is_inf(b):
            return -1.0 + 0j, 1
        return a - b, 0

    n1, i1 = factor(z1, w1)
    n2, i2 = factor(z2, w2)
    d1, j1 = factor(z1, z2)
    d2, j2 = factor(w1, w2)
    if i1 + i2 != j1 + j2:
        raise DegeneratePair("cross ratio degenerates to 0 or infinity")
    value = (n1 * n2) / (d1 * d2)
    if abs(value.imag) > 1e-6 * (1.0 + abs(value.real)):
        raise ValueError(f"cross ratio of concyclic points must be real, got {value}")
    return value.real


def _line_circle_hits(base: complex, direction: complex, pc: PlanarOrientedCircle):
    """Intersections of the line {base + t*direction} with a planar circle/line."""
    u = direction
    if pc.kind == "circle":
        rel = pc.center - base
        t0 = rel.real * u.real + rel.imag * u.imag
        foot = base + t0 * u
        h2 = abs(pc.center - foot) ** 2
        disc = pc.radius ** 2 - h2
        if disc < 0:
            raise DegeneratePair("chosen orthogonal line misses the circle")
        half = math.sqrt(max(disc, 0.0))
        return (t0 - half, base + (t0 - half) * u), (t0 + half, base + (t0 + half) * u)
    n = pc.normal
    denom = u.real * n.real + u.imag * n.imag
    if abs(denom) < 1e-14:
        raise DegeneratePair("orthogonal line is parallel to the target line")
    t = (pc.offset - (base.real * n.real + base.imag * n.imag)) / denom
    return (t, base + t * u), (math.inf, INF)


def _circle_circle_hits(q: complex, rho: float, pc: PlanarOrientedCircle):
    """Intersections of the circle (q, rho) with a planar circle/line, as angles."""
    if pc.kind == "circle":
        d = pc.center - q
        dist = abs(d)
        if dist < 1e-15:
            raise DegeneratePair("concentric probe circle")
        a = (rho ** 2 - pc.radius ** 2 + dist ** 2) / (2.0 * dist)
        disc = rho ** 2 - a ** 2
        if disc < 0:
            raise DegeneratePair("probe circle misses the target circle")
        h = math.sqrt(max(disc, 0.0))
        mid = q + a * d / dist
        off = 1j * d / dist * h
        p1, p2 = mid + off, mid - off
    else:
        n = pc.normal
        s = pc.offset - (q.real * n.real + q.imag * n.imag)
        disc = rho ** 2 - s ** 2
        if disc < 0:
            raise DegeneratePair("probe circle misses the target line")
        h = math.sqrt(max(disc, 0.0))
        foot = q + s * n
        tang = 1j * n
        p1, p2 = foot + h * tang, foot - h * tang
    return (cmath.phase(p1 - q), p1), (cmath.phase(p2 - q), p2)


def _ordered_hits_on_line(base: complex, direction: complex, pc: PlanarOrientedCircle):
    """Hits of an oriented probe line with pc, ordered so the forward sub-arc lies in pc's disk."""
    (ta, pa), (tb, pb) = _line_circle_hits(base, direction, pc)

    def arc_point(t_from: float, t_to: float) -> complex:
        if math.isinf(t_from):
            return base + (t_to - 1.0) * direction
        if math.isinf(t_to):
            return base + (t_from + 1.0) * direction
        if t_from < t_to:
            return base + 0.5 * (t_from + t_to) * direction
        return base + (t_from + 1.0) * direction  # wraps through infinity

    if pc.contains(arc_point(ta, tb)):
        return pa, pb
    return pb, pa


def _ordered_hits_on_circle(q: complex, rho: float, pc: PlanarOrientedCircle):
    (ha, pa), (hb, pb) = _circle_circle_hits(q, rho, pc)

    def arc_point(h_from: float, h_to: float) -> complex:
        span = (h_to - h_from) % (2.0 * math.pi)
        return q + rho * cmath.exp(1j * (h_from + 0.5 * span))

    if pc.contains(arc_point(ha, hb)):
        return pa, pb
    return pb, pa


def inv_dist_crossratio(c1: PlanarOrientedCircle, c2: PlanarOrientedCircle) -> float:
    """Cross-ratio form of the inversive distance, 2[z1,z2;w1,w2] - 1.

    A common orthogonal circle is chosen deterministically (the line through
    the two centers when both are circles), the four marked points ordered so
    the oriented sub-arc z1 -> z2 lies in the first companion disk and
    w1 -> w2 in the second.
    """
    if c1.same_unoriented(c2):
        raise DegeneratePair("identical unoriented circles; the value is -1 or +1 by orientation")
    if c1.kind == "circle" and c2.kind == "circle":
        if abs(c1.center - c2.center) < 1e-12:
            base, direction = c1.center, 1 + 0j
        else:
            base = c1.center
            direction = (c2.center - c1.center) / abs(c2.center - c1.center)
        z1, z2 = _ordered_hits_on_line(base, direction, c1)
        w1, w2 = _ordered_hits_on_line(base, direction, c2)
    elif c1.kind == "line" and c2.kind == "line":
        cross = (c1.direction * c2.direction.conjugate()).imag
        if abs(cross) < 1e-12:
            # parallel lines: probe with a shared perpendicular line
            base = c1.offset * c1.normal
            direction = c1.normal
            z1, z2 = _ordered_hits_on_line(base, direction, c1)
            w1, w2 = _ordered_hits_on_line(base, direction, c2)
        else:
            n1, n2 = c1.normal, c2.normal
            det = n1.real * n2.imag - n1.imag * n2.real
            x = (c1.offset * n2.imag - c2.offset * n1.imag) / det
            y = (c2.offset * n1.real - c1.offset * n2.real) / det
            q = complex(x, y)
            z1, z2 = _ordered_hits_on_circle(q, 1.0, c1)
            w1, w2 = _ordered_hits_on_circle(q, 1.0, c2)
    else:
        circ, line = (c1, c2) if c1.kind == "circle" else (c2, c1)
        base, direction = circ.center, line.normal
        zc1, zc2 = _ordered_hits_on_line(base, direction, circ)
        wl1, wl2 = _ordered_hits_on_line(base, direction, line)
        if c1.kind == "circle":
            z1, z2, w1, w2 = zc1, zc2, wl1, wl2
        else:
            z1, z2, w1, w2 = wl1, wl2, zc1, zc2
    return 2.0 * _cross_ratio(z1, z2, w1, w2) - 1.0


# --------------------------------------------------------------------------
# Pair classification.

@dataclass(frozen=True)
class PairClass:
    tag: str
    invdist: float
    uncoupled: bool
    segregated: bool
    separated: bool
    deep_overlap: bool
    non_unitary: bool


def classify_pair(c1: OrientedCircle, c2: OrientedCircle, tol: float = TOL) -> PairClass:
    """Overlap regime of an oriented pair; tangency within tol reports 'tangent'."""
    d = inv_dist(c1, c2)
    cap1, cap2 = c1.cap, c2.cap
    ang = math.acos(max(-1.0, min(1.0, float(np.dot(cap1.center, cap2.center)))))
    r1, r2 = cap1.radius, cap2.radius

    nested = ang <= abs(r1 - r2)          # one companion disk inside the other
    covering = ang >= 2.0 * math.pi - r1 - r2   # companion disks cover the sphere
    disjoint = ang >= r1 + r2             # companion disks disjoint
    coupled = nested or covering

    tangent = min(abs(d - 1.0), abs(d + 1.0)) <= tol
    if tangent:
        tag = "tangent"
    elif abs(d) <= tol:
        tag = "orthogonal"
    elif d < -1.0:
        tag = "coupled_nested"
    elif d > 1.0:
        tag = "separated" if disjoint else "coupled_enclosing"
    elif d > 0.0:
        tag = "overlapping_acute"
    else:
        tag = "overlapping_obtuse"

    uncoupled = not coupled
    return PairClass(
        tag=tag,
        invdist=d,
        uncoupled=uncoupled,
        segregated=uncoupled and d >= -tol,
        separated=disjoint and d > 1.0,
        deep_overlap=(-1.0 < d < -tol) and not coupled and not disjoint,
        non_unitary=not tangent,
    )


# --------------------------------------------------------------------------
# Moebius transformations.

@dataclass(frozen=True)
class MoebiusMap:
    """z -> (a z + b)/(c z + d), stored with ad - bc = 1 (projective up to sign)."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self) -> None:
        det = self.a * self.d - self.b * self.c
        if det == 0:
            raise ValueError("Moebius coefficients must have ad - bc != 0")
        s = cmath.sqrt(det)
        for name, val in zip("abcd", (self.a / s, self.b / s, self.c / s, self.d / s)):
            object.__setattr__(self, name, val)

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1, 0, 0, 1)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """self after other."""
        return MoebiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def projective_distance(self, other: "MoebiusMap") -> float:
        m, n = self.matrix(), other.matrix()
        return float(min(np.abs(m - n).max(), np.abs(m + n).max()))


def moebius_apply_point(T: MoebiusMap, z: complex) -> complex:
    if is_inf(z):
        if T.c == 0:
            return INF
        return T.a / T.c
    num = T.a * z + T.b
    den = T.c * z + T.d
    if den == 0:
        return INF
    return num / den


def moebius_apply_sphere_point(T: MoebiusMap, u: np.ndarray) -> np.ndarray:
    return plane_to_sphere(moebius_apply_point(T, sphere_to_plane(u)))


def _triple_matrix(z1: complex, z2: complex, z3: complex) -> np.ndarray:
    """Matrix of the map sending (z1, z2, z3) to (0, 1, infinity)."""
    if is_inf(z1):
        return np.array([[0, z2 - z3], [1, -z3]], dtype=complex)
    if is_inf(z2):
        return np.array([[1, -z1], [1, -z3]], dtype=complex)
    if is_inf(z3):
        return np.array([[1, -z1], [0, z2 - z1]], dtype=complex)
    return np.array([
        [z2 - z3, -z1 * (z2 - z3)],
        [z2 - z1, -z3 * (z2 - z1)],
    ], dtype=complex)


def mobius_from_three_points(src, dst) -> MoebiusMap:
    """The unique Moebius map with src[i] -> dst[i] for i = 0, 1, 2."""
    for triple in (src, dst):
        for i in range(3):
            for j in range(i + 1, 3):
                if _ext_eq(triple[i], triple[j]):
                    raise DegenerateTriple(f"repeated point in triple: {triple}")
    ms = _triple_matrix(*src)
    md = _triple_matrix(*dst)
    adj = np.array([[md[1, 1], -md[0, 1]], [-md[1, 0], md[0, 0]]], dtype=complex)
    m = adj @ ms
    return MoebiusMap(m[0, 0], m[0, 1], m[1, 0], m[1, 1])


def oriented_circle_through_sphere_points(
        x1: np.ndarray, x2: np.ndarray, x3: np.ndarray) -> OrientedCircle:
    """Circle through three sphere points, companion disk left of x1 -> x2 -> x3."""
    m = np.cross(x2 - x1, x3 - x2)
    nm = float(np.linalg.norm(m))
    if nm < 1e-13:
        raise DegenerateTriple("sphere points do not determine a circle")
    center = -m / nm
    h = max(-1.0, min(1.0, float(np.dot(center, x1))))
    return OrientedCircle.from_cap(SphericalCap(center=center, radius=math.acos(h)))


def oriented_circle_through(z1: complex, z2: complex, z3: complex) -> OrientedCircle:
    """Planar variant of the three-point circle; companion left of the traversal."""
    return oriented_circle_through_sphere_points(
        plane_to_sphere(z1), plane_to_sphere(z2), plane_to_sphere(z3))


_SAMPLE_THETAS = (0.3, 2.4, 4.5)


def moebius_apply_circle(T: MoebiusMap, c: OrientedCircle) -> OrientedCircle:
    """Image circle with the companion disk transported through three boundary points."""
    shift = 0.0
    for _ in range(8):
        pts = [c.boundary_point(t + shift) for t in _SAMPLE_THETAS]
        imgs = [moebius_apply_sphere_point(T, p) for p in pts]
        try:
            return oriented_circle_through_sphere_points(*imgs)
        except DegenerateTriple:
            shift += 0.7
    raise DegenerateTriple("could not find a non-degenerate boundary sample")


# --------------------------------------------------------------------------
# Pencils (coaxial families) and the ortho-circle.

def _eta_rows(*circles: OrientedCircle) -> np.ndarray:
    """Rows r_i with r_i . x = eta(c_i, x)."""
    rows = np.stack([c.lorentz for c in circles])
    rows[:, 3] *= -1.0
    return rows


def _null_space(rows: np.ndarray, rank_tol: float = 1e-9):
    u, s, vt = np.linalg.svd(rows)
    rank = int(np.sum(s > rank_tol * s[0])) if s[0] > 0 else 0
    return vt[rank:].T, s


def _light_directions(w1: np.ndarray, w2: np.ndarray) -> list[np.ndarray]:
    """Null vectors of eta within span{w1, w2}, scaled to (u, 1) point form."""
    g = np.array([[eta(w1, w1), eta(w1, w2)], [eta(w1, w2), eta(w2, w2)]])
    vals, vecs = np.linalg.eigh(g)
    out: list[np.ndarray] = []
    lo, hi = float(vals[0]), float(vals[1])
    scale = max(abs(lo), abs(hi), 1e-300)
    if lo > -1e-12 * scale:
        if lo > 1e-12 * scale:
            return []  # definite: no real null direction
        combos = [vecs[:, 0]]
    elif hi < 1e-12 * scale:
        combos = [vecs[:, 1]] if hi > -1e-12 * scale else []
    else:
        a = math.sqrt(-lo)
        b = math.sqrt(hi)
        combos = [b * vecs[:, 0] + a * vecs[:, 1], b * vecs[:, 0] - a * vecs[:, 1]]
    for cmb in combos:
        vec = cmb[0] * w1 + cmb[1] * w2
        if abs(vec[3]) < 1e-13:
            continue
        out.append(vec[:3] / vec[3])
    return out


def circle_intersection_points(c1: OrientedCircle, c2: OrientedCircle) -> tuple[np.ndarray, np.ndarray]:
    """The two common sphere points of a crossing pair (|inversive distance| < 1)."""
    basis, _ = _null_space(_eta_rows(c1, c2))
    if basis.shape[1] != 2:
        raise IdenticalCircles("pair does not span a pencil")
    pts = _light_directions(basis[:, 0], basis[:, 1])
    if len(pts) != 2:
        raise ValueError("circles do not intersect in two real points")
    return _unit(pts[0]), _unit(pts[1])


def pencil_limit_points(c1: OrientedCircle, c2: OrientedCircle) -> tuple[np.ndarray, np.ndarray]:
    """Foci of the hyperbolic pencil spanned by a disjoint pair (|inv dist| > 1)."""
    pts = _light_directions(c1.lorentz, c2.lorentz)
    if len(pts) != 2:
        raise ValueError("pair spans no hyperbolic pencil; no real limit points")
    return _unit(pts[0]), _unit(pts[1])


@dataclass(frozen=True)
class FamilyInfo:
    """A coaxial family. `points` are the common points (elliptic), the limit
    points (hyperbolic), or the single tangency point (parabolic), as
    extended-complex chart values."""

    kind: str
    points: tuple[complex, ...]

    def orthogonal_complement(self) -> "FamilyInfo":
        swap = {"elliptic": "hyperbolic", "hyperbolic": "elliptic", "parabolic": "parabolic"}
        return FamilyInfo(kind=swap[self.kind], points=self.points)


def coaxial_family(c1: OrientedCircle, c2: OrientedCircle, tol: float = TOL) -> FamilyInfo:
    d = inv_dist(c1, c2)
    basis, _ = _null_space(_eta_rows(c1, c2))
    if basis.shape[1] != 2:
        raise IdenticalCircles("coaxial family requires two distinct unoriented circles")
    if abs(abs(d) - 1.0) <= tol:
        pts = _light_directions(c1.lorentz, c2.lorentz)
        if not pts:
            pts = _light_directions(basis[:, 0], basis[:, 1])
        return FamilyInfo(kind="parabolic",
                          points=(sphere_to_plane(_unit(pts[0])),) if pts else ())
    if abs(d) < 1.0:
        u1, u2 = circle_intersection_points(c1, c2)
        return FamilyInfo(kind="elliptic", points=(sphere_to_plane(u1), sphere_to_plane(u2)))
    u1, u2 = pencil_limit_points(c1, c2)
    return FamilyInfo(kind="hyperbolic", points=(sphere_to_plane(u1), sphere_to_plane(u2)))


def _canonical_sign(x: np.ndarray) -> np.ndarray:
    idx = int(np.argmax(np.abs(x)))
    return -x if x[idx] < 0 else x


def ortho_circle(c1: OrientedCircle, c2: OrientedCircle, c3: OrientedCircle,
                 tol: float = TOL) -> OrientedCircle:
    """The unique circle orthogonal to three non-coaxial circles.

    Returns an arbitrary but deterministic orientation; callers choose the
    sign they need. Raises Coaxial on rank deficiency and NoRealOrthoCircle
    when the solution direction is not space-like.
    """
    rows = _eta_rows(c1, c2, c3)
    basis, s = _null_space(rows, rank_tol=tol)
    if basis.shape[1] > 1:
        raise Coaxial(f"circles span a pencil (singular values {s})")
    if basis.shape[1] == 0:
        raise Coaxial("degenerate system")
    x = basis[:, 0]
    q = eta(x, x)
    if q <= tol:
        raise NoRealOrthoCircle(f"common orthogonal direction has eta(x,x) = {q:.3e}")
    return OrientedCircle(_canonical_sign(x / math.sqrt(q)))
