"""Circle polyhedra: combinatorics, building, orientation, and links."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inversive.circles import (
    MoebiusMap,
    OrientedCircle,
    SphericalCap,
    inv_dist,
)
from inversive.cpoly import (
    AbstractSphericalPolyhedron,
    CFramework,
    CLink,
    EdgeCoupled,
    EdgeLabelFunction,
    FaceCoaxial,
    FocusNotInDisk,
    NotAdjacent,
    NotProperAt,
    TangentPair,
    ThreeConsecutiveCoaxial,
    Unitary,
    ValidationMissing,
    antipodal_reversed,
    build_cpolyhedron,
    c_link,
    canonical_edge,
    check_consistent_orientation,
    check_convexity,
    compare_clinks,
    complex_dihedral,
    link_point,
    normalize_orientation,
    realization_check,
    transform_cpolyhedron,
    validate_abstract,
    validate_cpolyhedron,
)
from inversive.hyperbolic import DiskModel, GBEdge, GreenBlackPolygon, hyp_distance

# Octahedral graph with one circle per vertex: the dual picture of a cube
# whose six face planes cut the sphere at distance a from the origin.
OCT = AbstractSphericalPolyhedron(
    vertices=("+z", "-z", "+x", "+y", "-x", "-y"),
    faces=(("+z", "+x", "+y"), ("+z", "+y", "-x"), ("+z", "-x", "-y"),
           ("+z", "-y", "+x"), ("-z", "+y", "+x"), ("-z", "-x", "+y"),
           ("-z", "-y", "-x"), ("-z", "+x", "-y")),
)
NORMALS = {"+z": (0, 0, 1), "-z": (0, 0, -1), "+x": (1, 0, 0),
           "+y": (0, 1, 0), "-x": (-1, 0, 0), "-y": (0, -1, 0)}

PYRAMID = AbstractSphericalPolyhedron(
    vertices=(0, 1, 2, 3, 4),
    faces=((4, 3, 2, 1), (1, 2, 0), (2, 3, 0), (3, 4, 0), (4, 1, 0)),
)


def cap_circle(center, radius):
    return OrientedCircle.from_cap(
        SphericalCap(center=np.array(center, dtype=float), radius=radius))


def meridian(azimuth):
    """Great circle through both poles, plane normal at the given azimuth."""
    return cap_circle((math.cos(azimuth), math.sin(azimuth), 0.0), math.pi / 2)


def cube_dual_circles(a):
    return {v: cap_circle(n, math.acos(a)) for v, n in NORMALS.items()}


def cube_dual(a):
    cp, diags = validate_cpolyhedron(OCT, cube_dual_circles(a))
    assert cp is not None and cp.proper, diags
    return cp


def random_map(seed):
    rng = np.random.RandomState(seed)
    while True:
        m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        if abs(np.linalg.det(m)) > 0.3:
            return MoebiusMap(m[0, 0], m[0, 1], m[1, 0], m[1, 1])


# closed forms for the cube dual at half-width a: circle-level distances and
# the shared ortho-circle pairing d = (1 - a^2)/(3 a^2 - 1)
def d_adjacent(a):
    return a * a / (1.0 - a * a)


def d_opposite(a):
    return (1.0 + a * a) / (1.0 - a * a)


def d_ortho_adjacent(a):
    return (1.0 - a * a) / (3.0 * a * a - 1.0)


class TestAbstract:
    def test_octahedron_passes(self):
        assert all(d["status"] == "pass" for d in validate_abstract(OCT))

    def test_pyramid_passes(self):
        assert all(d["status"] == "pass" for d in validate_abstract(PYRAMID))

    def test_rotation_is_a_cycle(self):
        faces, neighbors = OCT.rotation("+z")
        assert len(faces) == 4 and len(neighbors) == 4
        assert set(neighbors) == {"+x", "+y", "-x", "-y"}
        for i, fi in enumerate(faces):
            shared = set(OCT.faces[fi]) & set(OCT.faces[faces[(i + 1) % 4]])
            assert neighbors[i] in shared - {"+z"}

    def test_missing_face_fails(self):
        broken = AbstractSphericalPolyhedron(
            vertices=OCT.vertices, faces=OCT.faces[:-1])
        status = {d["check"]: d["status"] for d in validate_abstract(broken)}
        assert status["edge_orientation"] == "fail" or status["euler"] == "fail"

    def test_dihedron_rejected(self):
        dihedron = AbstractSphericalPolyhedron(
            vertices=("a", "b", "c"), faces=(("a", "b", "c"), ("c", "b", "a")))
        status = {d["check"]: d["status"] for d in validate_abstract(dihedron)}
        assert status["vertex_degree"] == "fail"
        assert status["face_meets"] == "fail"

    def test_duplicated_direction_fails(self):
        # one face wound backwards duplicates directed edges
        flipped = OCT.faces[:4] + (tuple(reversed(OCT.faces[4])),) + OCT.faces[5:]
        broken = AbstractSphericalPolyhedron(vertices=OCT.vertices, faces=flipped)
        status = {d["check"]: d["status"] for d in validate_abstract(broken)}
        assert status["edge_orientation"] == "fail"


class TestFrameworks:
    def test_labels_from_framework_realize(self):
        fw = CFramework(base=OCT, circles=cube_dual_circles(0.8))
        beta = EdgeLabelFunction.from_framework(fw)
        assert realization_check(fw, beta)

    def test_mismatch_reported(self):
        fw = CFramework(base=OCT, circles=cube_dual_circles(0.8))
        beta = EdgeLabelFunction.from_framework(fw)
        other = CFramework(base=OCT, circles=cube_dual_circles(0.7))
        report = realization_check(other, beta)
        assert not report
        assert len(report.mismatches) == len(OCT.edges())

    def test_label_lookup_ignores_order(self):
        fw = CFramework(base=OCT, circles=cube_dual_circles(0.8))
        beta = EdgeLabelFunction.from_framework(fw)
        assert beta("+x", "+z") == beta("+z", "+x")

    def test_missing_circle_rejected(self):
        circles = cube_dual_circles(0.8)
        del circles["-y"]
        with pytest.raises(ValueError):
            CFramework(base=OCT, circles=circles)


class TestBuild:
    @pytest.mark.parametrize("a", [0.8, 0.65])
    def test_closed_form_distances(self, a):
        circles = cube_dual_circles(a)
        assert inv_dist(circles["+x"], circles["+y"]) == pytest.approx(
            d_adjacent(a), abs=1e-12)
        assert inv_dist(circles["+x"], circles["-x"]) == pytest.approx(
            d_opposite(a), abs=1e-12)

    def test_builds_and_solves_orthos(self):
        cp = build_cpolyhedron(OCT, cube_dual_circles(0.8))
        assert cp.non_unitary and not cp.convex
        for fi, f in enumerate(OCT.faces):
            for v in f:
                assert abs(inv_dist(cp.face_ortho[fi], cp.circles[v])) < 1e-10

    def test_tangent_edge_rejected(self):
        # adjacent distance a^2/(1-a^2) hits 1 exactly at a = 1/sqrt(2)
        with pytest.raises(Unitary):
            build_cpolyhedron(OCT, cube_dual_circles(1.0 / math.sqrt(2)))

    def test_nested_pair_rejected(self):
        circles = cube_dual_circles(0.8)
        circles["+x"] = cap_circle((0, 1, 0), 0.3)  # inside the +y disk
        with pytest.raises(EdgeCoupled):
            build_cpolyhedron(OCT, circles)

    def test_coaxial_face_rejected(self):
        # three meridians through the poles span a two-dimensional pencil
        circles = cube_dual_circles(0.8)
        circles["+z"] = meridian(0.0)
        circles["+x"] = meridian(0.8)
        circles["+y"] = meridian(1.6)
        with pytest.raises(FaceCoaxial):
            build_cpolyhedron(OCT, circles)

    def test_three_consecutive_coaxial_rejected(self):
        circles = {
            0: cap_circle((0, 0, 1), 0.5),
            1: meridian(0.0),
            2: meridian(0.8),
            3: meridian(1.6),
            4: cap_circle((0, 0, -1), 0.5),
        }
        with pytest.raises(ThreeConsecutiveCoaxial):
            build_cpolyhedron(PYRAMID, circles)


class TestOrientation:
    def test_cube_dual_convex_and_consistent(self):
        cp = build_cpolyhedron(OCT, cube_dual_circles(0.8))
        conv = check_convexity(cp)
        assert conv.convex
        oriented = normalize_orientation(conv.oriented)
        assert oriented.consistently_oriented
        assert check_consistent_orientation(oriented).case == "case_i"

    def test_antipodal_flip_detected_and_undone(self):
        cp = build_cpolyhedron(OCT, cube_dual_circles(0.8))
        oriented = normalize_orientation(check_convexity(cp).oriented)

        flipped_circles = {v: antipodal_reversed(c)
                           for v, c in oriented.circles.items()}
        flipped = build_cpolyhedron(OCT, flipped_circles)
        flipped = check_convexity(flipped).oriented
        assert check_consistent_orientation(flipped).case == "case_ii"

        fixed = normalize_orientation(flipped)
        assert check_consistent_orientation(fixed).case == "case_i"
        for u, v in OCT.edges():
            assert inv_dist(fixed.circles[u], fixed.circles[v]) == pytest.approx(
                inv_dist(oriented.circles[u], oriented.circles[v]), abs=1e-12)

    def test_antipodal_preserves_distances(self):
        circles = cube_dual_circles(0.65)
        for u, v in OCT.edges():
            assert inv_dist(antipodal_reversed(circles[u]),
                            antipodal_reversed(circles[v])) == pytest.approx(
                inv_dist(circles[u], circles[v]), abs=1e-12)


class TestDihedral:
    def test_crossing_regime_is_real(self):
        cp = cube_dual(0.8)
        faces, _ = cp.polyhedron.rotation("+z")
        ang = complex_dihedral(cp, faces[0], faces[1])
        assert ang.as_complex() == pytest.approx(
            math.acos(d_ortho_adjacent(0.8)), abs=1e-10)

    def test_ultraparallel_regime_is_imaginary(self):
        cp = cube_dual(0.65)
        faces, _ = cp.polyhedron.rotation("+z")
        ang = complex_dihedral(cp, faces[0], faces[1])
        assert ang.as_complex() == pytest.approx(
            1j * math.acosh(d_ortho_adjacent(0.65)), abs=1e-10)

    def test_faces_without_shared_edge_rejected(self):
        cp = cube_dual(0.8)
        # faces 0 and 2 share only the vertex +z, faces 0 and 6 share nothing
        with pytest.raises(NotAdjacent):
            complex_dihedral(cp, 0, 2)
        with pytest.raises(NotAdjacent):
            complex_dihedral(cp, 0, 6)


class TestLinkPoint:
    def test_tangent_pair_rejected(self):
        c1 = cap_circle((1, 0, 0), math.acos(0.6))
        c2 = cap_circle((-1, 0, 0), math.acos(-0.6))  # same curve, other side
        equator = cap_circle((0, 0, 1), math.pi / 2)
        with pytest.raises(TangentPair):
            link_point(c1, c2, equator)

    def test_separated_pair_focus_inside_own_disk(self):
        # every circle of the pencil separates the two foci, so the model
        # built on the second circle always holds exactly one of them
        c1 = cap_circle((1, 0, 0), 0.4)
        c2 = cap_circle((-1, 0, 0), 0.4)
        equator = cap_circle((0, 0, 1), math.pi / 2)
        z = link_point(c1, c2, equator)
        assert abs(z) < 1e-12  # the focus is the cap center itself here

    def test_focus_avoiding_disk_rejected(self):
        c1 = cap_circle((1, 0, 0), 0.4)
        c2 = cap_circle((-1, 0, 0), 0.4)
        equator = cap_circle((0, 0, 1), math.pi / 2)
        north = DiskModel(cap_circle((0, 0, 1), 0.8))  # misses both foci
        with pytest.raises(FocusNotInDisk):
            link_point(c1, c2, equator, model=north)


class TestLinks:
    def test_all_black_quadrilateral(self):
        cp = cube_dual(0.8)
        theta = math.acos(d_ortho_adjacent(0.8))
        side = math.acosh(1.0 / math.tan(theta / 2.0) ** 2)
        for v in OCT.vertices:
            lk = c_link(cp, v)
            assert lk.proper
            assert [e.color for e in lk.polygon.edges] == ["black"] * 4
            for gv in lk.polygon.vertices:
                assert gv.color == "green"  # crossing angles carry the variable data
                assert gv.angle.as_complex() == pytest.approx(theta, abs=1e-9)
            for e in lk.polygon.edges:
                assert e.length == pytest.approx(side, abs=1e-9)

    def test_alternating_octagon(self):
        cp = cube_dual(0.65)
        g = math.acosh(d_ortho_adjacent(0.65))
        dd = d_ortho_adjacent(0.65)
        d_diag = (1.0 + 0.65 ** 2) / (3.0 * 0.65 ** 2 - 1.0)
        b = math.acosh((d_diag + dd * dd) / (dd * dd - 1.0))
        for v in OCT.vertices:
            lk = c_link(cp, v)
            assert lk.proper
            colors = [e.color for e in lk.polygon.edges]
            assert colors == ["black", "green"] * 4
            for gv in lk.polygon.vertices:
                assert gv.color == "black"  # right angles are the fixed data
                assert gv.angle.as_complex() == pytest.approx(
                    math.pi / 2, abs=1e-8)
            for e in lk.polygon.edges:
                want = b if e.color == "black" else g
                assert e.length == pytest.approx(want, abs=1e-9)

    @pytest.mark.parametrize("a", [0.8, 0.65])
    def test_black_edges_match_link_points(self, a):
        cp = cube_dual(a)
        lk = c_link(cp, "+z")
        blacks = [e.length for e in lk.polygon.edges if e.color == "black"]
        n = len(lk.faces)
        for k in range(n):
            f = lk.faces[k]
            w_prev = lk.neighbors[(k - 1) % n]
            w_next = lk.neighbors[k]
            p1 = link_point(cp.circles[w_prev], cp.circles["+z"],
                            cp.face_ortho[f], model=lk.model)
            p2 = link_point(cp.circles[w_next], cp.circles["+z"],
                            cp.face_ortho[f], model=lk.model)
            assert hyp_distance(p1, p2) == pytest.approx(blacks[k], abs=1e-12)

    def test_features_match_dihedral_angles(self):
        for a in (0.8, 0.65):
            cp = cube_dual(a)
            lk = c_link(cp, "+z")
            n = len(lk.faces)
            greens = [e for e in lk.polygon.edges if e.color == "green"]
            for k in range(n):
                dih = complex_dihedral(
                    cp, lk.faces[k], lk.faces[(k + 1) % n]).as_complex()
                if a == 0.8:
                    got = lk.polygon.vertices[k].angle.as_complex()
                else:
                    got = 1j * greens[k].length
                assert got == pytest.approx(dih, abs=1e-9)

    def test_requires_validation_flags(self):
        raw = build_cpolyhedron(OCT, cube_dual_circles(0.8))
        with pytest.raises(ValidationMissing):
            c_link(raw, "+z")

    def test_provenance_tags_every_element(self):
        cp = cube_dual(0.65)
        lk = c_link(cp, "+z")
        assert len(lk.provenance) == len(lk.polygon.elements)
        kinds = [tag for tag, _ in lk.provenance]
        assert kinds.count("face") == 4
        faces_seen = [ref for tag, ref in lk.provenance if tag == "face"]
        assert faces_seen == list(lk.faces)
        for tag, ref in lk.provenance:
            if tag == "edge":
                assert ref == canonical_edge(*ref)
                assert "+z" in ref

    @given(st.integers(min_value=0, max_value=2 ** 31 - 1))
    @settings(max_examples=20, deadline=None)
    def test_moebius_invariance_of_links(self, seed):
        cp = cube_dual(0.65)
        moved = transform_cpolyhedron(cp, random_map(seed))
        res = compare_clinks(c_link(cp, "+y"), c_link(moved, "+y"))
        assert res.status == "congruent"


class TestCompareClinks:
    def test_different_patterns_incompatible(self):
        res = compare_clinks(c_link(cube_dual(0.8), "+z"),
                             c_link(cube_dual(0.65), "+z"))
        assert res.status == "incompatible"

    def test_different_blacks_incompatible(self):
        res = compare_clinks(c_link(cube_dual(0.8), "+z"),
                             c_link(cube_dual(0.79), "+z"))
        assert res.status == "incompatible"

    def test_widened_greens_black_edge_congruent(self):
        lk = c_link(cube_dual(0.65), "+z")
        widened = tuple(
            GBEdge(color="green", length=el.length * 1.2)
            if isinstance(el, GBEdge) and el.color == "green" else el
            for el in lk.polygon.elements)
        other = CLink(vertex=lk.vertex, proper=True, model=lk.model,
                      lines=lk.lines, faces=lk.faces, neighbors=lk.neighbors,
                      polygon=GreenBlackPolygon(widened),
                      provenance=lk.provenance)
        res = compare_clinks(lk, other)
        assert res.status == "black_edge_congruent"
        assert {lab for _, lab in res.labels} == {"-"}
        assert res.sign_changes == 0

    def test_improper_links_incompatible(self):
        lk = c_link(cube_dual(0.65), "+z")
        broken = CLink(vertex=lk.vertex, proper=False, model=lk.model,
                       lines=lk.lines, faces=lk.faces,
                       neighbors=lk.neighbors, improper_reason="forced")
        assert compare_clinks(lk, broken).status == "incompatible"


def improper_but_valid():
    """A perturbed octagon-regime dual that stays convex and consistently
    oriented but develops improper links; found by seeded search."""
    base = cube_dual_circles(0.65)
    rng = np.random.RandomState(294)
    circles = {}
    for v in OCT.vertices:
        vec = np.asarray(base[v].lorentz) + rng.normal(scale=0.2, size=4)
        circles[v] = OrientedCircle(vec)
    return validate_cpolyhedron(OCT, circles)


class TestImproperLinks:
    def test_improper_vertex_is_first_class(self):
        cp, diags = improper_but_valid()
        status = {d["check"]: d["status"] for d in diags}
        assert status["properness"] == "fail"
        assert all(v == "pass" for k, v in status.items() if k != "properness")
        assert cp is not None and cp.proper is False

        witness = next(d["witness"] for d in diags if d["check"] == "properness")
        bad = witness[0]["vertex"]
        lk = c_link(cp, bad)
        assert not lk.proper
        assert lk.polygon is None
        assert lk.improper_reason
        assert len(lk.lines) == len(lk.faces)

    def test_strict_mode_raises(self):
        cp, diags = improper_but_valid()
        bad = next(d["witness"] for d in diags
                   if d["check"] == "properness")[0]["vertex"]
        with pytest.raises(NotProperAt):
            c_link(cp, bad, strict=True)


class TestValidationBattery:
    def test_full_battery_passes(self):
        cp, diags = validate_cpolyhedron(OCT, cube_dual_circles(0.8))
        assert cp is not None and cp.proper
        assert cp.convex and cp.non_unitary and cp.consistently_oriented
        assert all(d["status"] == "pass" for d in diags)

    def test_tangent_input_stops_at_build(self):
        cp, diags = validate_cpolyhedron(OCT, cube_dual_circles(1 / math.sqrt(2)))
        assert cp is None
        build = next(d for d in diags if d["check"] == "build")
        assert build["status"] == "fail"
        assert build["witness"]["error"] == "Unitary"

    def test_transformed_battery_still_green(self):
        cp = cube_dual(0.8)
        moved = transform_cpolyhedron(cp, random_map(11))
        again, diags = validate_cpolyhedron(OCT, moved.circles)
        assert again is not None and again.proper, diags
