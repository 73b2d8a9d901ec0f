"""Command line front end.

Exit codes follow one convention everywhere: 0 means the requested check or
construction succeeded, 1 means the input was well formed but failed
geometrically (invalid polyhedron, improper link, not congruent, failing
suite), 2 means the input itself was unusable (unreadable file, schema
violation, unknown vertex or fixture, bad parameter).

All reports go to stdout as JSON with sorted keys and no volatile fields, so
a rerun with the same inputs and seed is byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import formats, suites, svgout
from .cpoly import c_link, validate_cpolyhedron
from .hyperideal import (
    ParamsOutOfRange,
    RejectionBudgetExceeded,
    classify_strictly_hyperideal,
    dual_cpolyhedron,
    generate_fixture,
    validate_polyhedron3,
)
from .rigidity import (
    NoLabeledEdge,
    certify_congruence,
    combinatorial_scan,
    edge_labels,
    sign_changes_around,
)

EXIT_OK = 0
EXIT_GEOMETRY = 1
EXIT_INPUT = 2

DEFAULT_SEED = suites.DEFAULT_SEED


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    if x is None or isinstance(x, (str, int, float, bool)):
        return x
    return str(x)


def _emit(report) -> None:
    print(json.dumps(_jsonable(report), sort_keys=True, indent=2))


def _fail_input(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_INPUT


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write_out(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _load_validated(path: str, tol: float, require_proper: bool = True):
    """(cp, diagnostics) for a c-polyhedron file; cp is None when invalid.

    Improper-but-otherwise-valid polyhedra are kept when the caller can
    still work with them (link extraction draws a diagnostic figure).
    """
    base, circles = formats.load_cpolyhedron(_read(path))
    cp, diags = validate_cpolyhedron(base, circles, tol)
    if cp is not None and require_proper and not cp.proper:
        cp = None
    return cp, diags


def _angle_report(angle) -> dict:
    z = angle.as_complex()
    return {"branch": angle.branch, "complex": [z.real, z.imag]}


def _link_report(link) -> dict:
    rep = {
        "vertex": link.vertex,
        "proper": link.proper,
        "faces": list(link.faces),
        "neighbors": list(link.neighbors),
        "improper_reason": link.improper_reason,
        "polygon": None,
    }
    if link.polygon is not None:
        poly = link.polygon
        rep["polygon"] = {
            "edges": [{"color": e.color, "length": e.length}
                      for e in poly.edges],
            "vertices": [{"color": v.color, "angle": _angle_report(v.angle),
                          "position": v.position}
                         for v in poly.vertices],
        }
        rep["provenance"] = list(link.provenance or ())
    return rep


def cmd_validate(args) -> int:
    cp, diags = _load_validated(args.file, args.tol)
    _emit({"valid": cp is not None, "diagnostics": diags})
    return EXIT_OK if cp is not None else EXIT_GEOMETRY


def cmd_congruence(args) -> int:
    results = {}
    pair = []
    for tag, path in (("first", args.file), ("second", args.other)):
        cp, diags = _load_validated(path, args.tol)
        results[tag] = {"valid": cp is not None, "diagnostics": diags}
        pair.append(cp)
    if pair[0] is None or pair[1] is None:
        _emit({"verdict": "invalid_input_polyhedron", "inputs": results})
        return EXIT_GEOMETRY
    verdict = certify_congruence(pair[0], pair[1], tol=args.tol)
    _emit(verdict.as_report())
    return EXIT_OK if verdict.tag == "congruent" else EXIT_GEOMETRY


def cmd_link(args) -> int:
    cp, diags = _load_validated(args.file, args.tol, require_proper=False)
    if cp is None:
        _emit({"valid": False, "diagnostics": diags})
        return EXIT_GEOMETRY
    by_str = {str(v): v for v in cp.polyhedron.vertices}
    if args.vertex not in by_str:
        return _fail_input(
            f"unknown vertex {args.vertex!r}; have {', '.join(sorted(by_str))}")
    link = c_link(cp, by_str[args.vertex], args.tol)
    if args.svg or args.out:
        _write_out(args.out or "link.svg", svgout.render_link_svg(link))
    _emit(_link_report(link))
    return EXIT_OK if link.proper else EXIT_GEOMETRY


def cmd_label(args) -> int:
    cps = []
    for path in (args.file, args.other):
        cp, diags = _load_validated(path, args.tol)
        if cp is None:
            _emit({"valid": False, "file": path, "diagnostics": diags})
            return EXIT_GEOMETRY
        cps.append(cp)
    labels = edge_labels(cps[0], cps[1], tol=args.tol)
    try:
        scan = combinatorial_scan(labels, cps[0].polyhedron)
    except NoLabeledEdge:
        scan = None
    changes = {str(v): sign_changes_around(labels, cps[0].polyhedron, v)
               for v in cps[0].polyhedron.vertices}
    _emit({
        "labels": {f"{u}-{v}": lab for (u, v), lab in labels.items()},
        "scan_vertex": scan,
        "sign_changes": changes,
    })
    return EXIT_OK


def cmd_import_hyperideal(args) -> int:
    p = formats.load_polyhedron3(_read(args.file))
    diags = validate_polyhedron3(p, tol=args.tol)
    if any(d["status"] == "fail" for d in diags):
        _emit({"valid": False, "diagnostics": diags})
        return EXIT_GEOMETRY
    cls = classify_strictly_hyperideal(p, tol=args.tol)
    report = {
        "strict": cls.strict,
        "regime": cls.regime,
        "min_vertex_norm": cls.min_vertex_norm,
        "max_plane_distance": cls.max_plane_distance,
        "min_edge_distance": cls.min_edge_distance,
        "max_edge_distance": cls.max_edge_distance,
    }
    if not cls.strict:
        _emit({"classification": report, "dual": None})
        return EXIT_GEOMETRY
    try:
        cp = dual_cpolyhedron(p, tol=args.tol)
    except ValueError as exc:
        _emit({"classification": report, "dual": None, "error": str(exc)})
        return EXIT_GEOMETRY
    text = formats.dump_cpolyhedron(cp.polyhedron, cp.circles)
    if args.out:
        _write_out(args.out, text)
    _emit({"classification": report,
           "dual": {"vertices": len(cp.polyhedron.vertices),
                    "faces": len(cp.polyhedron.faces),
                    "proper": cp.proper,
                    "written_to": args.out}})
    return EXIT_OK


def _parse_params(pairs) -> dict:
    params = {}
    for raw in pairs:
        if "=" not in raw:
            raise ValueError(f"parameter {raw!r} is not of the form key=value")
        key, _, val = raw.partition("=")
        try:
            params[key] = int(val)
        except ValueError:
            params[key] = float(val)
    return params


def cmd_gen(args) -> int:
    try:
        params = _parse_params(args.params)
    except ValueError as exc:
        return _fail_input(str(exc))
    try:
        p = generate_fixture(args.kind, seed=args.seed, **params)
    except (ParamsOutOfRange, RejectionBudgetExceeded, ValueError,
            TypeError) as exc:
        return _fail_input(str(exc))
    text = formats.dump_polyhedron3(p)
    if args.out:
        _write_out(args.out, text)
        _emit({"kind": args.kind, "vertices": len(p.vertices),
               "faces": len(p.faces), "written_to": args.out})
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_suite(args) -> int:
    names = args.names or None
    try:
        results = suites.run_all(names, trials=args.trials, seed=args.seed,
                                 tol=args.tol)
    except KeyError as exc:
        return _fail_input(str(exc.args[0]))
    _emit({"seed": args.seed, "results": [r.as_report() for r in results]})
    return EXIT_OK if all(r.ok for r in results) else EXIT_GEOMETRY


def cmd_render(args) -> int:
    base, circles = formats.load_cpolyhedron(_read(args.file))
    text = svgout.render_planar_circles_svg(circles)
    if args.out:
        _write_out(args.out, text)
        _emit({"written_to": args.out, "circles": len(circles)})
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="inversive",
        description="Circle polyhedra: validation, links, rigidity, fixtures.")
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(fn=fn)
        p.add_argument("--tol", type=float, default=None,
                       help="numeric tolerance override")
        return p

    p = add("validate", cmd_validate, "run the validation battery on a file")
    p.add_argument("file")

    p = add("congruence", cmd_congruence,
            "certify Moebius congruence of two c-polyhedra")
    p.add_argument("file")
    p.add_argument("other")

    p = add("link", cmd_link, "extract one vertex link, optionally as SVG")
    p.add_argument("file")
    p.add_argument("vertex")
    p.add_argument("--svg", action="store_true",
                   help="also write an SVG figure")
    p.add_argument("--out", default=None, help="SVG output path")

    p = add("label", cmd_label, "sign edges of a pair and scan for a low-change vertex")
    p.add_argument("file")
    p.add_argument("other")

    p = add("import-hyperideal", cmd_import_hyperideal,
            "classify a Euclidean polyhedron and emit its dual c-polyhedron")
    p.add_argument("file")
    p.add_argument("--out", default=None, help="c-polyhedron output path")

    p = add("gen", cmd_gen, "write a named fixture as a polyhedron file")
    p.add_argument("kind")
    p.add_argument("params", nargs="*", metavar="key=value")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", default=None, help="output path (default stdout)")

    p = add("suite", cmd_suite, "run randomized check suites")
    p.add_argument("names", nargs="*", metavar="suite",
                   help=f"subset of: {', '.join(suites.SUITES)}")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = add("render", cmd_render, "draw a circle family in the plane as SVG")
    p.add_argument("file")
    p.add_argument("--out", default=None, help="output path (default stdout)")

    return top


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if getattr(args, "tol", None) is None and args.command != "suite":
        # suites keep their per-suite defaults when no override is given
        args.tol = 1e-7 if args.command in ("congruence", "label") else 1e-9
    try:
        return args.fn(args)
    except (formats.ParseError, formats.ValidationFailed) as exc:
        return _fail_input(str(exc))
    except FileNotFoundError as exc:
        return _fail_input(f"cannot read {exc.filename}")


if __name__ == "__main__":
    sys.exit(main())
