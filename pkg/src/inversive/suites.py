"""Seeded randomized check suites.

Each suite draws its own deterministic stream from a base seed, runs a fixed
number of trials, and reports the failure count together with the worst
error margin it saw.  The suites back both the command line runner and the
acceptance tests; trial counts and tolerances can be overridden, and pushing
the tolerance far below double precision is the intended way to watch a
suite fail.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from .circles import (
    Coaxial,
    MoebiusMap,
    NearPoleDegeneracy,
    NoRealOrthoCircle,
    OrientedCircle,
    PlanarOrientedCircle,
    SphericalCap,
    eta,
    inv_dist,
    inv_dist_crossratio,
    inv_dist_spherical,
    moebius_apply_circle,
    moebius_apply_point,
    ortho_circle,
)
from .hyperbolic import (
    DiskModel,
    acos_theta,
    cos_theta,
    HypothesisViolated,
    OrientedLine,
    angle_at,
    arm_chain_build,
    arm_lemma_check,
    geodesic_point,
    golden_minimize,
    hyp_distance,
    hypercycle_monotonicity_check,
    perpendicular_foot,
    region_flow_check,
    translate_along_line,
)
from .cpoly import canonical_edge
from .rigidity import (
    LemmaViolated,
    NoLabeledEdge,
    combinatorial_scan,
    coaxial_partner,
    lemma_three_coaxial_check,
)
from .hyperideal import generate_fixture

DEFAULT_SEED = 20260816

MODEL = DiskModel.standard()


@dataclass(frozen=True)
class SuiteResult:
    name: str
    trials: int
    failures: int
    worst: float
    detail: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def as_report(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "failures": self.failures,
            "worst": self.worst,
            "ok": self.ok,
            "detail": self.detail,
        }


def _random_cap(rng) -> SphericalCap:
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return SphericalCap(center=v, radius=rng.uniform(0.15, math.pi - 0.15))


def _random_circle(rng) -> OrientedCircle:
    return OrientedCircle.from_cap(_random_cap(rng))


def _random_moebius(rng) -> MoebiusMap:
    while True:
        m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        if abs(np.linalg.det(m)) > 0.3:
            return MoebiusMap(m[0, 0], m[0, 1], m[1, 0], m[1, 1])


def _nearest_point_geodesic(rho: float, theta: float) -> OrientedLine:
    """Geodesic whose closest chart approach to the origin is rho e^{i theta},
    oriented with the origin in its closed half-plane."""
    c0 = (1.0 + rho * rho) / (2.0 * rho)
    r = (1.0 - rho * rho) / (2.0 * rho)
    carrier = PlanarOrientedCircle.circle(
        complex(c0 * math.cos(theta), c0 * math.sin(theta)), r, orientation=-1)
    return OrientedLine(MODEL, OrientedCircle.from_planar(carrier))


def _suite_invdist(rng, trials: int, tol: float):
    failures = 0
    worst = 0.0
    crossratio_legs = 0
    for _ in range(trials):
        cap1, cap2 = _random_cap(rng), _random_cap(rng)
        c1 = OrientedCircle.from_cap(cap1)
        c2 = OrientedCircle.from_cap(cap2)
        d_lor = inv_dist(c1, c2)
        scale = max(1.0, abs(d_lor))
        err = abs(inv_dist_spherical(cap1, cap2) - d_lor) / scale
        try:
            p1, p2 = c1.to_planar(), c2.to_planar()
        except NearPoleDegeneracy:
            pass
        else:
            err = max(err, abs(inv_dist_crossratio(p1, p2) - d_lor) / scale)
            crossratio_legs += 1
        worst = max(worst, err)
        failures += err > tol
    return failures, worst, {"crossratio_legs": crossratio_legs}


def _suite_moebius(rng, trials: int, tol: float):
    flip_tol = tol * 1e-3
    failures = 0
    worst = 0.0
    for _ in range(trials):
        c1, c2 = _random_circle(rng), _random_circle(rng)
        t = _random_moebius(rng)
        d0 = inv_dist(c1, c2)
        d1 = inv_dist(moebius_apply_circle(t, c1), moebius_apply_circle(t, c2))
        rel = abs(d1 - d0) / max(1.0, abs(d0))
        flip = abs(inv_dist(c1.reversed(), c2) + d0)
        worst = max(worst, rel, flip)
        failures += rel > tol or flip > flip_tol
    return failures, worst, {"flip_tol": flip_tol}


def _suite_ortho(rng, trials: int, tol: float):
    failures = 0
    worst = 0.0
    done = 0
    budget = 20 * trials
    while done < trials and budget > 0:
        budget -= 1
        trio = [_random_circle(rng) for _ in range(3)]
        try:
            o = ortho_circle(*trio)
        except (Coaxial, NoRealOrthoCircle):
            continue
        done += 1
        res = max(abs(inv_dist(o, c)) for c in trio)
        worst = max(worst, res)
        failures += res > tol

    # both refusal branches, on circles where the refusal is forced
    detail = {"coaxial_branch": False, "no_real_branch": False}
    c1, c2 = _random_circle(rng), _random_circle(rng)
    third = coaxial_partner(c1, c2)
    try:
        ortho_circle(c1, c2, third)
    except Coaxial:
        detail["coaxial_branch"] = True
    axes = [OrientedCircle.from_cap(SphericalCap(center=np.eye(3)[i],
                                                 radius=math.pi / 2))
            for i in range(3)]
    try:
        ortho_circle(*axes)
    except NoRealOrthoCircle:
        detail["no_real_branch"] = True
    failures += done < trials
    failures += not detail["coaxial_branch"]
    failures += not detail["no_real_branch"]
    return failures, worst, detail


def _suite_theta(rng, trials: int, tol: float):
    failures = 0
    worst = 0.0
    for d in np.linspace(-10.0, 10.0, trials):
        back = cos_theta(acos_theta(float(d)))
        err = abs(back - d) / max(1.0, abs(d))
        worst = max(worst, err)
        failures += err > tol
    return failures, worst, {"grid": [-10.0, 10.0]}


def _suite_three_coaxial(rng, trials: int, tol: float):
    failures = 0
    done = 0
    budget = 50 * trials
    while done < trials and budget > 0:
        budget -= 1
        try:
            o = OrientedCircle(rng.standard_normal(4))
            a = OrientedCircle(rng.standard_normal(4))
        except ValueError:
            continue
        if abs(abs(inv_dist(o, a)) - 1.0) < 1e-3:
            continue
        b = coaxial_partner(o, a)
        x = rng.standard_normal(4)
        xv = x - eta(x, np.asarray(o.lorentz)) * np.asarray(o.lorentz)
        if eta(xv, xv) <= 1e-6:
            continue
        c = OrientedCircle(xv)
        try:
            ok = lemma_three_coaxial_check(o, a, b, c, tol=tol)
        except HypothesisViolated:
            continue
        done += 1
        failures += not ok
    failures += done < trials
    return failures, 0.0, {"completed": done}


def _suite_hypercycle(rng, trials: int, tol: float):
    failures = 0
    done = 0
    budget = 20 * trials
    while done < trials and budget > 0:
        budget -= 1
        ln = OrientedLine.through_chart_points(
            MODEL, complex(-0.5, rng.uniform(-0.2, 0.2)),
            complex(0.5, rng.uniform(-0.2, 0.2)))
        z = complex(rng.uniform(-0.6, 0.6), rng.uniform(0.1, 0.7))
        if abs(z) > 0.85:
            continue
        try:
            ok = hypercycle_monotonicity_check(
                ln, z, offset=rng.uniform(0.0, 0.8))
        except HypothesisViolated:
            continue
        done += 1
        failures += not ok
    failures += done < trials
    return failures, 0.0, {"completed": done}


def _suite_region_flow(rng, trials: int, tol: float):
    failures = 0
    done = 0
    budget = 20 * trials
    while done < trials and budget > 0:
        budget -= 1
        c = complex(rng.uniform(-0.2, 0.2), rng.uniform(0.25, 0.45))
        k = _nearest_point_geodesic(rng.uniform(0.2, 0.45), math.pi)
        if not k.in_half_plane(c):
            k = k.reversed()
        l = _nearest_point_geodesic(rng.uniform(0.2, 0.45), 0.0)
        if not l.in_half_plane(c):
            l = l.reversed()
        m = OrientedLine.through_chart_points(MODEL, -0.5 + 0j, 0.5 + 0j)
        a = perpendicular_foot(c, k)
        b = geodesic_point(a, c, rng.uniform(0.3, 0.7))
        B = moebius_apply_point(
            translate_along_line(k, -rng.uniform(0.0, 0.6)), b)
        C = moebius_apply_point(
            translate_along_line(l, rng.uniform(0.0, 0.6)), c)
        try:
            ok = region_flow_check(k, l, m, b, c, B, C)
        except HypothesisViolated:
            continue
        done += 1
        grew = hyp_distance(B, C) >= hyp_distance(b, c) - 1e-9
        failures += (not ok) or (not grew)
    failures += done < trials
    return failures, 0.0, {"completed": done}


def _suite_containment(rng, trials: int, tol: float):
    failures = 0
    worst = 0.0
    done = 0
    budget = 20 * trials
    while done < trials and budget > 0:
        budget -= 1
        p = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
        q = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
        if abs(p - q) < 0.3:
            continue
        ln = OrientedLine.through_chart_points(MODEL, p, q)
        z = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
        if hyp_distance(z, perpendicular_foot(z, ln)) < 0.1:
            continue
        t_star, _ = golden_minimize(
            lambda t: hyp_distance(z, ln.chart_point(t)), -4.0, 4.0, tol=1e-12)
        foot = ln.chart_point(t_star)
        err = abs(angle_at(foot, z, ln.chart_point(t_star + 0.5)) - math.pi / 2)
        done += 1
        worst = max(worst, err)
        failures += err > tol
    failures += done < trials
    return failures, worst, {"completed": done}


def _suite_arm(rng, trials: int, tol: float):
    failures = 0
    done = 0
    budget = 20 * trials
    while done < trials and budget > 0:
        budget -= 1
        if done % 3 == 2:
            # a single green edge, widened
            blacks = list(rng.uniform(0.4, 1.1, size=2))
            g = rng.uniform(0.8, 1.4)
            bump = 0.0 if done % 6 == 5 else rng.uniform(0.0, 0.4)
            try:
                base = arm_chain_build(blacks, [g], [],
                                       ["black", "green", "black"])
                wide = arm_chain_build(blacks, [g + bump], [],
                                       ["black", "green", "black"])
            except (ValueError, HypothesisViolated):
                continue
        else:
            blacks = list(rng.uniform(0.3, 1.2, size=3))
            angles = list(rng.uniform(0.6, 2.6, size=2))
            bumped = [min(a + rng.uniform(0.0, 0.3), 3.0) for a in angles]
            try:
                base = arm_chain_build(blacks, [], angles, ["black"] * 3)
                wide = arm_chain_build(blacks, [], bumped, ["black"] * 3)
            except (ValueError, HypothesisViolated):
                continue
        try:
            res = arm_lemma_check(base, wide, tol=tol)
        except HypothesisViolated:
            continue
        done += 1
        failures += not res.consistent
    failures += done < trials
    return failures, 0.0, {"completed": done}


def _suite_cauchy(rng, trials: int, tol: float):
    graphs = [generate_fixture(kind).abstract()
              for kind in ("cube", "octahedron", "dodecahedron")]
    failures = 0
    scanned = 0
    for i in range(trials):
        p = graphs[i % len(graphs)]
        labels = {}
        for u, v in p.edges():
            labels[canonical_edge(u, v)] = \
                ("+", "-", None)[rng.randint(3)]
        try:
            combinatorial_scan(labels, p)
            scanned += 1
        except NoLabeledEdge:
            scanned += 1  # all-None labelings are legitimately refused
        except LemmaViolated:
            failures += 1
    return failures, 0.0, {"scanned": scanned}


# name -> (function, default trials, default tolerance)
SUITES = {
    "invdist_agreement": (_suite_invdist, 10000, 1e-9),
    "moebius_invariance": (_suite_moebius, 10000, 1e-9),
    "ortho_circle": (_suite_ortho, 1000, 1e-10),
    "theta_roundtrip": (_suite_theta, 2001, 1e-12),
    "three_coaxial": (_suite_three_coaxial, 500, 1e-9),
    "hypercycle": (_suite_hypercycle, 500, 1e-9),
    "region_flow": (_suite_region_flow, 500, 1e-9),
    "containment_right_angle": (_suite_containment, 500, 1e-6),
    "arm_lemma": (_suite_arm, 500, 1e-9),
    "cauchy_scan": (_suite_cauchy, 10000, 1e-9),
}

LEMMA_SUITES = ("three_coaxial", "hypercycle", "region_flow",
                "containment_right_angle", "arm_lemma")


def run_suite(name: str, trials: int | None = None, seed: int | None = None,
              tol: float | None = None) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; have {', '.join(sorted(SUITES))}")
    fn, default_trials, default_tol = SUITES[name]
    n = default_trials if trials is None else trials
    t = default_tol if tol is None else tol
    base = DEFAULT_SEED if seed is None else seed
    rng = np.random.RandomState((base + zlib.crc32(name.encode())) % 2 ** 32)
    failures, worst, detail = fn(rng, n, t)
    detail["tol"] = t
    return SuiteResult(name=name, trials=n, failures=int(failures),
                       worst=float(worst), detail=detail)


def run_all(names=None, trials: int | None = None, seed: int | None = None,
            tol: float | None = None) -> list:
    picked = list(SUITES) if names is None else list(names)
    return [run_suite(name, trials=trials, seed=seed, tol=tol)
            for name in picked]
